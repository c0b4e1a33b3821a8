import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgnu.errors import DomainViolation, PoleAtX
from kgnu.qhyper import (
    PotentialParams,
    cosech_q,
    cosh_q,
    coth_q,
    log_abs_one_minus_tanh_q,
    log_abs_one_plus_tanh_q,
    potential_curve,
    potential_eval,
    sech_q,
    sinh_q,
    tanh_q,
)

FIG1 = PotentialParams(1.0, -1.0 / 3.0, 1.0, 1.0)
q_nonzero = st.one_of(st.floats(-1.0, -1e-3), st.floats(1e-3, 1.0))


def test_point_values():
    assert sinh_q(0.0, 0.5) == pytest.approx(0.25, abs=1e-15)
    assert tanh_q(1.0, -1.0) == pytest.approx(1.0 / math.tanh(1.0), rel=1e-14)
    assert tanh_q(1.0, -1.0) == pytest.approx(1.3130352855, abs=1e-10)
    assert sech_q(0.0, 0.5) == pytest.approx(4.0 / 3.0, rel=1e-15)


def test_potential_values():
    assert potential_eval(FIG1, 0.0) == -1.0
    assert potential_eval(FIG1, 60.0) == pytest.approx(1.0 / 3.0, abs=1e-15)
    # sech_q(0)^2 = 16/9 and tanh_q(0) = 1/3 at q = 1/2, so V(0) = -16/9 + 1/9
    p = PotentialParams(1.0, -1.0 / 3.0, 1.0, 0.5)
    assert potential_eval(p, 0.0) == pytest.approx(-5.0 / 3.0, rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-30, 30), q=q_nonzero)
def test_cosh_sinh_identity(x, q):
    if q < 0 and abs(x - 0.5 * math.log(-q)) < 1e-9:
        return
    err = cosh_q(x, q) ** 2 - sinh_q(x, q) ** 2 - q
    # measured against the size of the squares being subtracted
    assert abs(err) <= 1e-12 * max(1.0, math.exp(x), abs(q) * math.exp(-x)) ** 2


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-8, 8), q=st.floats(0.05, 1.0), alpha=st.floats(0.3, 3.0))
def test_tanh_derivative_identity(x, q, alpha):
    h = 1e-5
    # difference 1 -/+ tanh_q through their log forms: no cancellation in the tails
    if alpha * x >= 0.5 * math.log(q):
        f = lambda t: -math.exp(log_abs_one_minus_tanh_q(alpha * t, q))
    else:
        f = lambda t: math.exp(log_abs_one_plus_tanh_q(alpha * t, q))
    fd = (f(x + h) - f(x - h)) / (2 * h)
    exact = alpha * (1 - tanh_q(alpha * x, q) ** 2)
    assert exact == pytest.approx(alpha * q * sech_q(alpha * x, q) ** 2, rel=1e-12, abs=1e-14)
    assert fd == pytest.approx(exact, rel=1e-6, abs=1e-12)


def test_q_one_reductions():
    x = np.linspace(-20, 20, 401)
    assert np.allclose(tanh_q(x, 1.0), np.tanh(x), rtol=0, atol=1e-14)
    assert np.allclose(sech_q(x, 1.0), 1 / np.cosh(x), rtol=0, atol=1e-14)
    assert np.allclose(sinh_q(x, 1.0), np.sinh(x), rtol=1e-14)
    assert np.allclose(cosh_q(x, 1.0), np.cosh(x), rtol=1e-14)


def test_q_minus_one_reductions():
    x = np.concatenate([np.linspace(-10, -0.1, 50), np.linspace(0.1, 10, 50)])
    assert np.allclose(tanh_q(x, -1.0), 1 / np.tanh(x), rtol=1e-13)
    assert np.allclose(sech_q(x, -1.0) ** 2, 1 / np.sinh(x) ** 2, rtol=1e-12)
    # 1 - tanh_{-1}^2 is the one that equals -cosech^2
    assert np.allclose(1 - tanh_q(x, -1.0) ** 2, -1 / np.sinh(x) ** 2, rtol=1e-9)
    assert np.allclose(coth_q(x, -1.0), np.tanh(x), rtol=1e-13)
    assert np.allclose(cosech_q(x, -1.0), 1 / np.cosh(x), rtol=1e-13)


@settings(max_examples=100, deadline=None)
@given(x=st.floats(-15, 15), q=st.floats(1e-3, 1.0))
def test_coordinate_shift(x, q):
    assert tanh_q(x, q) == pytest.approx(math.tanh(x - 0.5 * math.log(q)), abs=1e-12)


def test_pole_reported():
    x0 = 0.5 * math.log(0.25)
    with pytest.raises(PoleAtX) as info:
        tanh_q(x0, -0.25)
    assert info.value.x0 == pytest.approx(x0)
    with pytest.raises(PoleAtX):
        coth_q(0.0, 1.0)
    p = PotentialParams(1.0, 0.3, 2.0, -0.25)
    with pytest.raises(PoleAtX):
        potential_eval(p, math.log(0.25) / 4.0)


def test_no_overflow_far_out():
    x = np.array([-1e4, -400.0, 400.0, 1e4])
    with np.errstate(all="raise"):
        t = tanh_q(x, 0.5)
        s = sech_q(x, 0.5)
    assert np.allclose(t, [-1, -1, 1, 1])
    assert np.all(s == 0)


def test_q_zero_is_exponential():
    x = np.linspace(-2, 2, 9)
    assert np.all(tanh_q(x, 0.0) == 1.0)
    assert np.allclose(cosh_q(x, 0.0), np.exp(x) / 2)
    p = PotentialParams(1.0, 0.0, 1.0, 0.0)
    assert np.allclose(potential_eval(p, x), -4 * np.exp(-2 * x))


@pytest.mark.parametrize("q", [0.3, 1.0, -0.5, -1.0])
def test_stable_logs(q):
    lo = 0.5 * math.log(-q) + 0.05 if q < 0 else -5.0
    x = np.linspace(lo, 5.0, 101)
    t = tanh_q(x, q)
    assert np.allclose(log_abs_one_minus_tanh_q(x, q), np.log(np.abs(1 - t)), atol=1e-10)
    assert np.allclose(log_abs_one_plus_tanh_q(x, q), np.log(np.abs(1 + t)), atol=1e-10)
    # far right, where 1 - tanh underflows in the naive form
    assert log_abs_one_minus_tanh_q(300.0, q) == pytest.approx(math.log(2 * abs(q)) - 600.0)


def test_curve():
    c = potential_curve(FIG1, -5, 5, 11)
    assert c.shape == (11, 2)
    assert tuple(c[5]) == (0.0, -1.0)
    c2 = potential_curve(FIG1, -1, 2, 2)
    assert c2[:, 0].tolist() == [-1.0, 2.0]
    with pytest.raises(DomainViolation):
        potential_curve(PotentialParams(1, -1 / 3, 1, -0.25), -2, 2, 11)
    with pytest.raises(ValueError):
        potential_curve(FIG1, -1, 1, 1)


@pytest.mark.parametrize("bad", [dict(alpha=0.0), dict(alpha=-1.0), dict(v1=math.nan), dict(q=math.inf)])
def test_params_validation(bad):
    kw = dict(v1=1.0, v2=0.0, alpha=1.0, q=1.0)
    kw.update(bad)
    with pytest.raises(ValueError):
        PotentialParams(**kw)


@pytest.mark.parametrize("x", [1e-11, -3e-9, 2e-6, -1e-3, 0.4])
def test_full_relative_accuracy_next_to_zeros(x):
    # q = -1: cosh_q = sinh and sinh_q = cosh; q = 1: ordinary functions, sinh vanishes at 0
    assert sech_q(x, -1.0) == pytest.approx(1 / np.sinh(x), rel=4e-16)
    assert cosh_q(x, -1.0) == pytest.approx(np.sinh(x), rel=4e-16)
    assert tanh_q(x, -1.0) == pytest.approx(1 / np.tanh(x), rel=4e-16)
    assert coth_q(x, 1.0) == pytest.approx(1 / np.tanh(x), rel=4e-16)
    assert cosech_q(x, 1.0) == pytest.approx(1 / np.sinh(x), rel=4e-16)
    assert sinh_q(x, 1.0) == pytest.approx(np.sinh(x), rel=4e-16)
