import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conftest import anchor_energy, levels, physical_grid_states, problem
from kgnu.errors import DegenerateLevel, DiscriminantNegative, NotPhysical
from kgnu.kg_core import (
    PRINTED_BRANCH,
    REGULAR_BRANCH,
    KGProblem,
    effective_problem,
    energy_levels,
    energy_residual,
    exponents_at,
    nu_quantization_gap,
    ode_residual,
    reduced_params,
    wavefunction,
    with_oracle,
)
from kgnu.qhyper import PotentialParams, potential_eval, sech_q, tanh_q

STATES = physical_grid_states()
STATE_IDS = [f"q={c[0]:g},v1={c[1]:g},v2={c[2]:.3g},n={s.n}" for c, s in STATES]
HALF = KGProblem(1.0, PotentialParams(-0.02, 0.6, 0.2, -1.0))


def _sign_changes(y):
    y = y[np.abs(y) > 1e-12 * np.abs(y).max()]
    return int(np.count_nonzero(np.sign(y[1:]) != np.sign(y[:-1])))


def test_effective_problem_examples():
    p = problem(1.0, 1.0, 0.0)
    v_eff, e2 = effective_problem(p, -1.0)
    assert e2 == 0.0
    assert np.all(v_eff(np.linspace(-3, 3, 7)) == 0.0)
    v_eff, e2 = effective_problem(p, 0.5)
    assert e2 == pytest.approx(-0.75)
    # V(0) = -1, so the effective well is 2(E + M) V(0) = -3 deep
    assert v_eff(0.0) == pytest.approx(-3.0)


@settings(max_examples=60, deadline=None)
@given(e=st.floats(-0.99, 0.99), x=st.floats(-5, 5), q=st.floats(0.1, 1.0))
def test_effective_problem_matches_transformed_ode(e, x, q):
    p = problem(q, 1.3, -0.4)
    v_eff, e2 = effective_problem(p, e)
    rp = reduced_params(p, e)
    coef = rp.ebar2 + rp.v1bar * sech_q(x, q) ** 2 + rp.v2bar * tanh_q(x, q)
    assert e2 - v_eff(x) == pytest.approx(coef, rel=1e-12, abs=1e-12)


def test_reduced_params_examples():
    rp = reduced_params(problem(1.0, 0.0, 0.0), 0.3)
    assert rp.eps2 == 0.0 and rp.gam2 == 0.0
    assert rp.beta2 == pytest.approx(1 - 0.09)
    rp = reduced_params(problem(1.0, 2.0, 0.0), 0.0)
    assert (rp.v1bar, rp.eps2, rp.beta2) == (4.0, -4.0, 1.0)
    rp = reduced_params(problem(1.0, 2.0, 0.0), -0.6854)
    assert rp.v1bar == pytest.approx(1.2584)


def test_residual_examples():
    free = problem(1.0, 0.0, 0.0)
    assert energy_residual(free, 1, 0.5) == pytest.approx(0.25)
    with pytest.raises(DegenerateLevel):
        energy_residual(free, 0, 0.5)
    assert abs(energy_residual(problem(1.0, 2.0, 0.0), 0, -0.6854)) < 1e-3
    with pytest.raises(DiscriminantNegative):
        energy_residual(problem(1.0, -2.0, 0.0), 0, 0.0)


def test_residual_pt_sign_flip():
    p = problem(1.0, 2.0, 0.4)
    e, n = 0.1, 0
    f, fpt = energy_residual(p, n, e), energy_residual(p, n, e, pt=True)
    lam = exponents_at(p, n, e).lam_n
    v2bar = 2 * (e + 1) * 0.4
    assert f - fpt == pytest.approx(2 * v2bar**2 / lam**2, rel=1e-12)


def test_free_particle_has_no_levels():
    assert energy_levels(problem(1.0, 0.0, 0.0)) == []


def test_q_zero_rejected():
    with pytest.raises(ValueError, match="q = 0"):
        energy_levels(problem(0.0, 1.0, 0.0))


def test_anchor_ground_state():
    ground = [s for s in levels(1.0, 2.0, 0.0) if s.physical][0]
    assert ground.n == 0
    assert ground.energy == pytest.approx(anchor_energy(), abs=1e-10)


@pytest.mark.parametrize("case", [(1.0, 1.0, -1 / 3), (0.5, 2.0, -2 / 3), (1.0, 2.0, 0.0)])
def test_levels_sorted_and_on_mass_shell(case):
    states = levels(*case)
    keys = [(s.n, s.energy) for s in states]
    assert keys == sorted(keys)
    assert all(-1 < s.energy < 1 and s.ebar2 < 0 for s in states)


def test_physicality_rule():
    for case, s in STATES:
        rp = reduced_params(problem(*case), s.energy)
        assert s.exponents.d > 2 * s.n + 1
        assert rp.beta2**2 > rp.gam2**2
        assert s.mu > abs(s.nu)
    unphysical = [s for s in levels(1.0, 2.0, 0.0) if not s.physical]
    assert unphysical and all("below_threshold" in s.reasons for s in unphysical)


@pytest.mark.parametrize("case,state", STATES, ids=STATE_IDS)
def test_ode_residual(case, state):
    p = problem(*case)
    xs = np.linspace(-8, 8, 801)
    assert ode_residual(p, state, xs) <= 1e-8
    assert ode_residual(p, state, xs, energy=state.energy + 1e-2) > 1e-4


@pytest.mark.parametrize("case,state", STATES, ids=STATE_IDS)
def test_exponent_identities(case, state):
    p = problem(*case)
    rp = reduced_params(p, state.energy)
    mu, nu = state.mu, state.nu
    assert mu**2 + nu**2 == pytest.approx(rp.beta2, abs=1e-10)
    assert 2 * mu * nu == pytest.approx(rp.gam2, abs=1e-10)
    assert (mu + nu) ** 2 == pytest.approx(-(rp.ebar2 + rp.v2bar), abs=1e-10)
    assert (mu - nu) ** 2 == pytest.approx(-(rp.ebar2 - rp.v2bar), abs=1e-10)


@pytest.mark.parametrize("case,state", STATES, ids=STATE_IDS)
def test_nu_engine_route(case, state):
    gap, (a, b) = nu_quantization_gap(problem(*case), state)
    assert gap <= 1e-8
    assert a == pytest.approx(state.mu + state.nu, abs=1e-9)
    assert b == pytest.approx(state.mu - state.nu, abs=1e-9)


@pytest.mark.parametrize("case,state", STATES, ids=STATE_IDS)
def test_wavefunction_normalized_with_n_nodes(case, state):
    p = problem(*case)
    wf = wavefunction(p, state)
    total, _ = integrate.quad(lambda x: wf(x) ** 2, -np.inf, np.inf, limit=400, epsabs=0, epsrel=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)
    xs = np.linspace(-25, 25, 20001)
    assert _sign_changes(wf(xs)) == state.n
    assert state.norm_constant == wf.norm_constant


def test_symmetric_ground_state_is_even():
    s = [s for s in levels(1.0, 2.0, 0.0) if s.physical][0]
    wf = wavefunction(problem(1.0, 2.0, 0.0), s)
    x = np.linspace(0, 10, 101)
    assert np.allclose(wf(x), wf(-x), rtol=0, atol=1e-10)


@pytest.mark.parametrize("case", [(1.0, 1.0, -1 / 3), (1.0, 2.0, -2 / 3), (1.0, 0.5, 0.0)])
def test_asymptotic_decay(case):
    p = problem(*case)
    s = [s for s in levels(*case) if s.physical][0]
    wf = wavefunction(p, s)
    right = (wf.log_abs(12.0) - wf.log_abs(8.0)) / 4.0
    left = (wf.log_abs(-8.0) - wf.log_abs(-12.0)) / 4.0
    assert right == pytest.approx(-(s.mu + s.nu), abs=1e-3)
    assert left == pytest.approx(s.mu - s.nu, abs=1e-3)


def test_unphysical_state_refused():
    bad = [s for s in levels(1.0, 2.0, 0.0) if not s.physical][0]
    with pytest.raises(NotPhysical):
        wavefunction(problem(1.0, 2.0, 0.0), bad)


def test_half_line_states():
    states = energy_levels(HALF)
    phys = [s for s in states if s.physical]
    assert [s.n for s in phys] == [0, 1]
    x0 = HALF.domain.start
    xs = np.linspace(x0 + 0.05, x0 + 60, 2000)
    for s in phys:
        assert s.branch == REGULAR_BRANCH
        assert ode_residual(HALF, s, xs) <= 1e-8
        gap, _ = nu_quantization_gap(HALF, s)
        assert gap <= 1e-8
        wf = wavefunction(HALF, s)
        total, _ = integrate.quad(lambda x: wf(x) ** 2, x0, np.inf, limit=400)
        assert total == pytest.approx(1.0, abs=1e-8)
        assert _sign_changes(wf(np.linspace(x0 + 1e-3, x0 + 150, 20001))) == s.n
    assert all("irregular_at_pole" in s.reasons for s in states if s.branch == PRINTED_BRANCH)


def test_ground_energy_decreases_with_coupling():
    v = np.linspace(0.5, 2.9, 25)
    e = [[s.energy for s in energy_levels(problem(1.0, x, -x / 3)) if s.physical and s.n == 0][0] for x in v]
    assert np.all(np.diff(e) < 0)


def test_abs_ebar2_turns_over_with_coupling():
    # |Ebar^2| = M^2 - E^2 peaks where the ground level crosses E = 0
    v = np.linspace(0.5, 2.9, 25)
    e2 = [[abs(s.ebar2) for s in energy_levels(problem(1.0, x, -x / 3)) if s.physical and s.n == 0][0] for x in v]
    d = np.diff(e2)
    assert np.any(d > 0) and np.any(d < 0)


def test_with_oracle_record():
    s = [s for s in levels(1.0, 2.0, 0.0) if s.physical][0]
    t = with_oracle(s, s.energy + 3e-6)
    assert t.oracle_gap == pytest.approx(3e-6)
    assert s.oracle_energy is None
    assert with_oracle(s, None).oracle_gap is None
