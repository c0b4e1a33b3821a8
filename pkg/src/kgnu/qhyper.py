"""Deformed hyperbolic functions and the Rosen-Morse type potential.

The family is built from ``sinh_q(x) = (e^x - q e^-x)/2`` and
``cosh_q(x) = (e^x + q e^-x)/2``.  For ``q = 1`` it is the ordinary hyperbolic
family, for ``q = -1`` the roles of sinh and cosh swap (``tanh_{-1} = coth``)
and for ``q = 0`` ``tanh_0`` is identically one.

All functions accept scalars or numpy arrays and return the same kind.
Ratios (tanh, coth, sech, cosech) are evaluated in forms that never form
``e^{|x|}`` explicitly, so they stay finite for any argument.  Factors that
vanish at a zero of sinh_q or cosh_q go through ``expm1``, so values next to a
pole or zero keep full relative accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation, PoleAtX

__all__ = [
    "PotentialParams",
    "sinh_q",
    "cosh_q",
    "tanh_q",
    "coth_q",
    "sech_q",
    "cosech_q",
    "cosh_q_zero",
    "sinh_q_zero",
    "log_abs_one_minus_tanh_q",
    "log_abs_one_plus_tanh_q",
    "potential_eval",
    "potential_curve",
]

# Beyond this |x| the ratios are replaced by their limits.
CLAMP = 350.0
# Relative distance to a pole below which evaluation is refused.
POLE_TOL = 1e-12


def _wrap(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def cosh_q_zero(q):
    """Real zero of ``cosh_q``, which exists only for ``q < 0``."""
    if q < 0:
        return 0.5 * math.log(-q)
    return None


def sinh_q_zero(q):
    """Real zero of ``sinh_q``, which exists only for ``q > 0``."""
    if q > 0:
        return 0.5 * math.log(q)
    return None


def _check_pole(x, x0):
    if x0 is None:
        return
    hit = np.abs(x - x0) <= POLE_TOL * max(1.0, abs(x0))
    if np.any(hit):
        raise PoleAtX(x0)


def _one_plus(a, c):
    """``1 + c e^{-2a}`` for ``a >= 0``; ``expm1`` keeps it accurate near its zero."""
    if c < 0:
        return -np.expm1(math.log(-c) - 2.0 * a)
    return 1.0 + c * np.exp(-2.0 * a)


def _w_plus(a, c):
    """``e^{-2a} + c`` for ``a >= 0``, accurate near its zero."""
    if c < 0:
        return -c * np.expm1(-2.0 * a - math.log(-c))
    return np.exp(-2.0 * a) + c


def _combo(x, c):
    """``(e^x + c e^-x)/2`` factored as ``e^{|x|}/2`` times a term that is accurate near zeros."""
    x, scalar = _wrap(x)
    a = np.abs(x)
    with np.errstate(over="ignore", invalid="ignore"):
        out = 0.5 * np.exp(a) * np.where(x >= 0, _one_plus(a, c), _w_plus(a, c))
    return _ret(out, scalar)


def sinh_q(x, q):
    return _combo(x, -q)


def cosh_q(x, q):
    return _combo(x, q)


def _ratio_parts(x, q):
    # a = |x| clamped, w = e^{-2a} <= 1; callers pick the x >= 0 or x < 0 form via ``pos``.
    xc = np.clip(x, -CLAMP, CLAMP)
    a = np.abs(xc)
    return a, np.exp(-2.0 * a), xc >= 0


def tanh_q(x, q):
    x, scalar = _wrap(x)
    _check_pole(x, cosh_q_zero(q))
    if q == 0:
        return _ret(np.ones_like(x), scalar)
    a, _, pos = _ratio_parts(x, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(pos, _one_plus(a, -q) / _one_plus(a, q), _w_plus(a, -q) / _w_plus(a, q))
    return _ret(out, scalar)


def coth_q(x, q):
    x, scalar = _wrap(x)
    _check_pole(x, sinh_q_zero(q))
    if q == 0:
        return _ret(np.ones_like(x), scalar)
    a, _, pos = _ratio_parts(x, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(pos, _one_plus(a, q) / _one_plus(a, -q), _w_plus(a, q) / _w_plus(a, -q))
    return _ret(out, scalar)


def sech_q(x, q):
    x, scalar = _wrap(x)
    _check_pole(x, cosh_q_zero(q))
    if q == 0:
        with np.errstate(over="ignore"):
            return _ret(2.0 * np.exp(-x), scalar)
    a, w, pos = _ratio_parts(x, q)
    half = np.sqrt(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(pos, 2.0 * half / _one_plus(a, q), 2.0 * half / _w_plus(a, q))
    out = np.where(np.abs(x) > CLAMP, 0.0, out)
    return _ret(out, scalar)


def cosech_q(x, q):
    x, scalar = _wrap(x)
    _check_pole(x, sinh_q_zero(q))
    if q == 0:
        with np.errstate(over="ignore"):
            return _ret(2.0 * np.exp(-x), scalar)
    a, w, pos = _ratio_parts(x, q)
    half = np.sqrt(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(pos, 2.0 * half / _one_plus(a, -q), 2.0 * half / _w_plus(a, -q))
    out = np.where(np.abs(x) > CLAMP, 0.0, out)
    return _ret(out, scalar)


def log_abs_one_minus_tanh_q(x, q):
    """``log|1 - tanh_q(x)|`` without cancellation; ``1 - tanh_q = 2q/(e^{2x} + q)``."""
    x, scalar = _wrap(x)
    _check_pole(x, cosh_q_zero(q))
    if q == 0:
        raise ValueError("1 - tanh_0 vanishes identically")
    a, _, pos = _ratio_parts(x, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            pos,
            math.log(2.0 * abs(q)) - 2.0 * x - np.log(np.abs(_one_plus(a, q))),
            math.log(2.0 * abs(q)) - np.log(np.abs(_w_plus(a, q))),
        )
    return _ret(out, scalar)


def log_abs_one_plus_tanh_q(x, q):
    """``log|1 + tanh_q(x)|``; ``1 + tanh_q = 2 e^{2x}/(e^{2x} + q)``."""
    x, scalar = _wrap(x)
    _check_pole(x, cosh_q_zero(q))
    if q == 0:
        return _ret(np.full_like(x, math.log(2.0)), scalar)
    a, _, pos = _ratio_parts(x, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            pos,
            math.log(2.0) - np.log(np.abs(_one_plus(a, q))),
            math.log(2.0) + 2.0 * x - np.log(np.abs(_w_plus(a, q))),
        )
    return _ret(out, scalar)


@dataclass(frozen=True)
class PotentialParams:
    """Parameters of ``V(x) = -v1 sech_q^2(alpha x) - v2 tanh_q(alpha x)``."""

    v1: float
    v2: float
    alpha: float
    q: float

    def __post_init__(self):
        for name in ("v1", "v2", "alpha", "q"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @property
    def pole(self):
        """Location of the ``cosh_q(alpha x)`` zero, or None when q >= 0."""
        y0 = cosh_q_zero(self.q)
        return None if y0 is None else y0 / self.alpha

    @property
    def center(self):
        """Point about which the well is symmetric in shape (q > 0)."""
        return 0.5 * math.log(self.q) / self.alpha if self.q > 0 else None

    def as_dict(self):
        return {"v1": self.v1, "v2": self.v2, "alpha": self.alpha, "q": self.q}


def potential_eval(p: PotentialParams, x):
    y = np.asarray(x, dtype=float) * p.alpha
    sech = sech_q(y, p.q)
    tanh = tanh_q(y, p.q)
    out = -p.v1 * np.square(sech) - p.v2 * tanh
    return float(out) if np.ndim(out) == 0 else out


def potential_curve(p: PotentialParams, x_min: float, x_max: float, n_points: int):
    """Uniform samples of the potential as an ``(n_points, 2)`` array of (x, V)."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if not x_min < x_max:
        raise ValueError("x_min must be smaller than x_max")
    x0 = p.pole
    if x0 is not None and x_min <= x0 <= x_max:
        raise DomainViolation(f"interval [{x_min}, {x_max}] contains the pole x0 = {x0}")
    xs = np.linspace(x_min, x_max, n_points)
    return np.column_stack([xs, potential_eval(p, xs)])
