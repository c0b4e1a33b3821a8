"""Named specializations of the deformed Rosen-Morse family.

* ``RosenMorseWell``: ``V = -V1 sech^2 + V2 tanh`` (q = 1, general ``V2 -> -V2``).
* ``Eckart``: ``V = V1 sech_{-1}^2 - V2 tanh_{-1}`` (q = -1, general ``V1 -> -V1``).
* ``PTRosenMorse``: ``V = -V1 sech_q^2 - i V2 tanh_q`` with V1 > 0, q > 0.
* ``PTEckart``: ``V = -V1 Q cosech_Q^2 - i V2 coth_Q`` with ``Q = exp(2 i alpha theta)``.

Only the real kinds map onto :class:`~kgnu.qhyper.PotentialParams`; the PT
kinds produce a :class:`ComplexPotential` sampler.  PT spectra are computed for
the Rosen-Morse kind only.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import qhyper
from .errors import DegenerateLevel, DiscriminantNegative, InvalidVariantParams, PoleAtX
from .kg_core import (
    DEFAULT_CONFIG,
    KGProblem,
    SolverConfig,
    energy_levels,
    energy_residual,
)

__all__ = [
    "VariantKind",
    "VariantSpec",
    "ComplexPotential",
    "to_general",
    "pt_symmetry_check",
    "pt_rosen_morse_levels",
    "pt_rosen_morse_residual",
    "pt_mu_nu_sq_printed",
    "pt_eckart_potential",
    "pt_eckart_sampler",
    "rosen_morse_well_ebar2_printed",
    "eckart_ebar2_printed",
    "general_ebar2",
]


class VariantKind(str, enum.Enum):
    ROSEN_MORSE_WELL = "RosenMorseWell"
    ECKART = "Eckart"
    PT_ROSEN_MORSE = "PTRosenMorse"
    PT_ECKART = "PTEckart"


@dataclass(frozen=True)
class VariantSpec:
    kind: VariantKind
    v1: float
    v2: float
    alpha: float = 1.0
    q: Optional[float] = None
    theta: Optional[float] = None

    def __post_init__(self):
        kind = VariantKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is VariantKind.ROSEN_MORSE_WELL:
            self._default_q(1.0)
        elif kind is VariantKind.ECKART:
            self._default_q(-1.0)
        for name in ("v1", "v2", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidVariantParams(f"{name} must be finite")
        if self.alpha <= 0:
            raise InvalidVariantParams("alpha must be positive")
        if kind is VariantKind.PT_ROSEN_MORSE:
            if self.q is None or not self.q > 0:
                raise InvalidVariantParams("PTRosenMorse needs q > 0")
            if not self.v1 > 0:
                raise InvalidVariantParams("PTRosenMorse needs V1 > 0")
        if kind is VariantKind.PT_ECKART:
            if not self.v1 > 0:
                raise InvalidVariantParams("PTEckart needs V1 > 0")
            t = self.theta
            if t is None or t == 0 or not abs(t) < math.pi / 4:
                raise InvalidVariantParams("PTEckart needs 0 < |theta| < pi/4")

    def _default_q(self, q):
        if self.q is None:
            object.__setattr__(self, "q", q)
        elif self.q != q:
            raise InvalidVariantParams(f"{self.kind.value} requires q = {q:g}")

    @property
    def deformation(self) -> complex:
        """``Q = exp(2 i alpha theta)`` for PTEckart."""
        if self.kind is not VariantKind.PT_ECKART:
            raise InvalidVariantParams("Q is defined only for PTEckart")
        phase = 2.0 * self.alpha * self.theta
        return complex(math.cos(phase), math.sin(phase))


@dataclass(frozen=True)
class ComplexPotential:
    """Complex-valued potential sampler; ``real_params`` carries the real-coefficient
    parameters that the PT energy equation consumes (PTRosenMorse only)."""

    sampler: Callable
    kind: VariantKind
    real_params: Optional[qhyper.PotentialParams] = None
    center: float = 0.0

    def __call__(self, x):
        return self.sampler(x)


def to_general(v: VariantSpec):
    """General-form parameters implementing the variant's substitution."""
    if v.kind is VariantKind.ROSEN_MORSE_WELL:
        return qhyper.PotentialParams(v.v1, -v.v2, v.alpha, 1.0)
    if v.kind is VariantKind.ECKART:
        return qhyper.PotentialParams(-v.v1, v.v2, v.alpha, -1.0)
    if v.kind is VariantKind.PT_ROSEN_MORSE:
        params = qhyper.PotentialParams(v.v1, v.v2, v.alpha, v.q)
        return ComplexPotential(
            sampler=_pt_rosen_morse_sampler(params),
            kind=v.kind,
            real_params=params,
            center=params.center,
        )
    return pt_eckart_potential(v)


def _pt_rosen_morse_sampler(p: qhyper.PotentialParams):
    def sample(x):
        y = np.asarray(x, dtype=float) * p.alpha
        re = -p.v1 * np.square(qhyper.sech_q(y, p.q))
        im = -p.v2 * qhyper.tanh_q(y, p.q)
        out = re + 1j * im
        return complex(out) if np.ndim(out) == 0 else out

    return sample


def pt_symmetry_check(sampler: Callable, xs, reflection_center: float = 0.0) -> float:
    """``max |conj(V(x)) - V(2c - x)|`` over ``xs``."""
    x = np.asarray(xs, dtype=float)
    direct = np.asarray(sampler(x), dtype=complex)
    mirrored = np.asarray(sampler(2.0 * reflection_center - x), dtype=complex)
    return float(np.max(np.abs(np.conj(direct) - mirrored)))


def _pt_problem(v: VariantSpec, mass: float) -> KGProblem:
    if v.kind is not VariantKind.PT_ROSEN_MORSE:
        raise InvalidVariantParams("PT spectra are available for PTRosenMorse only")
    return KGProblem(mass, qhyper.PotentialParams(v.v1, v.v2, v.alpha, v.q))


def pt_rosen_morse_levels(v: VariantSpec, mass: float, n_max: Optional[int] = None,
                          config: SolverConfig = DEFAULT_CONFIG):
    """Real levels of the sign-flipped energy equation, as :class:`BoundState` records."""
    return energy_levels(_pt_problem(v, mass), n_max, config, pt=True)


def pt_rosen_morse_residual(v: VariantSpec, mass: float, n: int, energy: float) -> float:
    """``E^2 - M^2 - V2bar^2/(alpha^2 Lam^2) + alpha^2 Lam^2/4``; raises DegenerateLevel at ``Lam = 0``."""
    return energy_residual(_pt_problem(v, mass), n, energy, pt=True)


def pt_mu_nu_sq_printed(gam2: float, beta2: float):
    """The printed PT pair ``((beta2 - R)/2, (beta2 + R)/2)`` with ``R = sqrt(beta2^2 + gam2^2)``.

    With ``mu = -Lam/2`` real the first entry is ``nu^2`` and the second
    ``mu^2`` (the labels are swapped, as in the real case).
    """
    root = math.sqrt(beta2 * beta2 + gam2 * gam2)
    return 0.5 * (beta2 - root), 0.5 * (beta2 + root)


def pt_eckart_sampler(v1: float, v2: float, alpha: float, deformation: complex):
    """``x -> -v1 Q cosech_Q^2(alpha x) - i v2 coth_Q(alpha x)`` for complex ``Q``.

    Works on explicit real and imaginary parts of ``Q`` and of the scaled
    exponential ``w = exp(-2|y|)``, so large ``|x|`` never overflows.
    """
    qr, qi = float(deformation.real), float(deformation.imag)

    def sample(x):
        y = np.clip(np.asarray(x, dtype=float) * alpha, -qhyper.CLAMP, qhyper.CLAMP)
        w = np.exp(-2.0 * np.abs(y))
        pos = y >= 0
        # y >= 0: sinh_Q = e^y (1 - Q w)/2,   cosh_Q = e^y (1 + Q w)/2
        # y < 0:  sinh_Q = e^-y (w - Q)/2,    cosh_Q = e^-y (w + Q)/2
        s_re = np.where(pos, 1.0 - qr * w, w - qr)
        s_im = np.where(pos, -qi * w, -qi)
        c_re = np.where(pos, 1.0 + qr * w, w + qr)
        c_im = np.where(pos, qi * w, qi)
        den = s_re * s_re + s_im * s_im
        scale = max(1.0, abs(deformation))
        if np.any(den <= (qhyper.POLE_TOL * scale) ** 2):
            bad = np.asarray(x, dtype=float)[den <= (qhyper.POLE_TOL * scale) ** 2]
            raise PoleAtX(float(np.ravel(bad)[0]))
        # coth = c/s
        coth_re = (c_re * s_re + c_im * s_im) / den
        coth_im = (c_im * s_re - c_re * s_im) / den
        # cosech = 2 sqrt(w) / s; cosech^2 = 4 w / s^2
        s2_re = s_re * s_re - s_im * s_im
        s2_im = 2.0 * s_re * s_im
        s2_abs2 = den * den
        ch2_re = 4.0 * w * s2_re / s2_abs2
        ch2_im = -4.0 * w * s2_im / s2_abs2
        # -v1 Q cosech^2
        t_re = -v1 * (qr * ch2_re - qi * ch2_im)
        t_im = -v1 * (qr * ch2_im + qi * ch2_re)
        # -i v2 coth = v2 coth_im - i v2 coth_re
        out = (t_re + v2 * coth_im) + 1j * (t_im - v2 * coth_re)
        return complex(out) if np.ndim(out) == 0 else out

    return sample


def pt_eckart_potential(v: VariantSpec) -> ComplexPotential:
    if v.kind is not VariantKind.PT_ECKART:
        raise InvalidVariantParams("expected a PTEckart spec")
    return ComplexPotential(
        sampler=pt_eckart_sampler(v.v1, v.v2, v.alpha, v.deformation),
        kind=v.kind,
        center=0.0,
    )


def _printed_rhs(v1bar, v2bar, alpha, n, sqrt_arg):
    if sqrt_arg < 0:
        raise DiscriminantNegative(f"square-root argument {sqrt_arg} is negative")
    lam = 2 * n + 1 - math.sqrt(sqrt_arg)
    if abs(lam) <= DEFAULT_CONFIG.lambda_tol:
        raise DegenerateLevel(f"Lam_{n} vanishes")
    a2 = alpha * alpha
    return -v2bar * v2bar / (a2 * lam * lam) - 0.25 * a2 * lam * lam


def rosen_morse_well_ebar2_printed(v: VariantSpec, mass: float, n: int, energy: float) -> float:
    """Right-hand side of the printed Rosen-Morse well energy equation,
    with ``sqrt(1 + 4 V1bar/alpha^2)`` and barred raw well parameters."""
    c = 2.0 * (energy + mass)
    return _printed_rhs(c * v.v1, c * v.v2, v.alpha, n, 1.0 + 4.0 * c * v.v1 / v.alpha**2)


def eckart_ebar2_printed(v: VariantSpec, mass: float, n: int, energy: float) -> float:
    """Right-hand side of the printed Eckart energy equation,
    with ``sqrt(1 - 4 V1bar/alpha^2)`` and barred raw Eckart parameters."""
    c = 2.0 * (energy + mass)
    return _printed_rhs(c * v.v1, c * v.v2, v.alpha, n, 1.0 - 4.0 * c * v.v1 / v.alpha**2)


def general_ebar2(p: qhyper.PotentialParams, mass: float, n: int, energy: float) -> float:
    """General energy equation's right-hand side, recovered as ``Ebar^2 - F_n(E)``."""
    prob = KGProblem(mass, p)
    return energy * energy - mass * mass - energy_residual(prob, n, energy)
