"""Generic Nikiforov-Uvarov reduction for ``psi'' + (tt/sig) psi' + (st/sig^2) psi = 0``.

Given the polynomial triple ``(tau_tilde, sigma, sigma_tilde)`` the engine

* finds the constants ``kappa`` that make
  ``u(s) = ((sigma' - tau_tilde)/2)^2 - sigma_tilde + kappa*sigma`` a perfect square,
* builds ``pi(s) = (sigma' - tau_tilde)/2 +/- sqrt(u)`` and
  ``tau = tau_tilde + 2 pi``,
* keeps the branches with ``tau' < 0``,
* reports ``lambda = kappa + pi'`` and the ladder
  ``lambda_n = -n tau' - n(n-1)/2 sigma''``,
* for ``sigma = c(1 - s^2)`` solves the weight and phi equations in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    DegenerateSigma,
    NoAdmissibleBranch,
    NoRealKappa,
    NotPerfectSquare,
    UnsupportedSigmaClass,
)

__all__ = [
    "Poly",
    "NUProblem",
    "NUReduction",
    "kappa_candidates",
    "pi_branches",
    "select_admissible",
    "lambda_of_n",
    "lambda_from_kappa",
    "weight_exponents",
    "phi_exponents",
    "tanh_triple",
    "tanh_triple_kappas",
    "tanh_triple_mu_nu_sq",
]

SQUARE_TOL = 1e-10
DEDUP_TOL = 1e-12


@dataclass(frozen=True)
class Poly:
    """Polynomial of degree at most two, coefficients lowest degree first."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence[float]):
        c = [float(v) for v in coeffs]
        if len(c) > 3:
            if any(v != 0.0 for v in c[3:]):
                raise ValueError("degree larger than two")
            c = c[:3]
        c += [0.0] * (3 - len(c))
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def c0(self):
        return self.coeffs[0]

    @property
    def c1(self):
        return self.coeffs[1]

    @property
    def c2(self):
        return self.coeffs[2]

    @property
    def degree(self) -> int:
        for d in (2, 1, 0):
            if self.coeffs[d] != 0.0:
                return d
        return -1

    def __call__(self, s):
        return self.c0 + s * (self.c1 + s * self.c2)

    def deriv(self) -> "Poly":
        return Poly([self.c1, 2.0 * self.c2])

    def __add__(self, other: "Poly") -> "Poly":
        return Poly([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "Poly") -> "Poly":
        return Poly([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def scale(self, k: float) -> "Poly":
        return Poly([k * a for a in self.coeffs])


@dataclass(frozen=True)
class NUProblem:
    tau_tilde: Poly
    sigma: Poly
    sigma_tilde: Poly

    def __post_init__(self):
        if self.tau_tilde.degree > 1:
            raise ValueError("tau_tilde must have degree at most one")
        if self.sigma.degree < 0:
            raise ValueError("sigma must not vanish identically")

    @property
    def half_gap(self) -> Poly:
        """``(sigma' - tau_tilde) / 2``."""
        return (self.sigma.deriv() - self.tau_tilde).scale(0.5)

    def u_coeffs(self, kappa: float):
        """Coefficients of ``u(s; kappa)`` as ``(u0, u1, u2)``."""
        h = self.half_gap
        sq = (h.c0 * h.c0, 2.0 * h.c0 * h.c1, h.c1 * h.c1)
        return tuple(
            sq[i] - self.sigma_tilde.coeffs[i] + kappa * self.sigma.coeffs[i]
            for i in range(3)
        )


@dataclass(frozen=True)
class NUReduction:
    kappa: float
    pi: Poly
    tau: Poly
    # -1 / +1: sign in front of sqrt(u); kappa_index orders the kappa roots
    branch: int
    kappa_index: int

    @property
    def lam(self) -> float:
        return lambda_from_kappa(self)


def kappa_candidates(p: NUProblem) -> tuple:
    """Real ``kappa`` values for which ``u(s; kappa)`` is a perfect square, ascending."""
    h = p.half_gap
    st, sg = p.sigma_tilde, p.sigma
    p2 = h.c1 * h.c1 - st.c2
    p1 = 2.0 * h.c0 * h.c1 - st.c1
    p0 = h.c0 * h.c0 - st.c0

    if sg.c2 == 0.0 and p2 == 0.0:
        # u is linear in s for every kappa: it must reduce to a constant.
        if sg.c1 != 0.0:
            return (-p1 / sg.c1,)
        if p1 == 0.0:
            raise DegenerateSigma("u(s; kappa) is a constant for every kappa")
        raise NoRealKappa("u(s; kappa) keeps a linear term for every kappa")

    qa = sg.c1 * sg.c1 - 4.0 * sg.c2 * sg.c0
    qb = 2.0 * p1 * sg.c1 - 4.0 * (p2 * sg.c0 + p0 * sg.c2)
    qc = p1 * p1 - 4.0 * p2 * p0
    scale = max(abs(qa), abs(qb), abs(qc), 1.0)

    if abs(qa) <= 1e-14 * scale:
        if qb == 0.0:
            if qc == 0.0:
                raise DegenerateSigma("every kappa makes u a perfect square")
            raise NoRealKappa("kappa equation has no solution")
        return (-qc / qb,)

    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        if disc > -1e-14 * qb * qb:
            disc = 0.0
        else:
            raise NoRealKappa(f"kappa quadratic has complex roots (discriminant {disc})")
    root = math.sqrt(disc)
    qq = -0.5 * (qb + math.copysign(root, qb))
    if qq == 0.0:
        return (0.0,)
    k1, k2 = qq / qa, qc / qq
    lo, hi = sorted((k1, k2))
    if abs(hi - lo) <= DEDUP_TOL * max(1.0, abs(lo), abs(hi)):
        return (0.5 * (lo + hi),)
    return (lo, hi)


def pi_branches(p: NUProblem, kappa: float) -> list:
    """Both ``pi`` polynomials for a given ``kappa`` as ``[(sign, Poly), ...]``.

    A repeated branch (``sqrt(u)`` identically zero) is returned once.
    """
    u0, u1, u2 = p.u_coeffs(kappa)
    scale = max(abs(u0), abs(u1), abs(u2), 1.0)
    resid = u1 * u1 - 4.0 * u2 * u0
    if abs(resid) > SQUARE_TOL * scale * scale:
        raise NotPerfectSquare(f"u(s) discriminant residual {resid:.3e} at kappa={kappa}")
    if u2 < -SQUARE_TOL * scale:
        raise NotPerfectSquare("u(s) has a negative leading coefficient")
    # root the larger end coefficient and derive the other from u1 = 2 w0 w1;
    # the smaller end is often a cancellation residue
    if u0 > SQUARE_TOL * scale and u0 >= u2:
        c0 = math.copysign(math.sqrt(u0), u1) if u1 != 0.0 else math.sqrt(u0)
        w = Poly([c0, u1 / (2.0 * c0)])
    elif u2 > SQUARE_TOL * scale:
        r = math.sqrt(u2)
        w = Poly([u1 / (2.0 * r), r])
    else:
        if u0 < -SQUARE_TOL * scale:
            raise NotPerfectSquare("constant u(s) is negative")
        w = Poly([math.sqrt(max(u0, 0.0))])
    h = p.half_gap
    if w.degree < 0:
        return [(-1, h)]
    return [(-1, h - w), (1, h + w)]


def select_admissible(p: NUProblem) -> list:
    """All reductions with ``tau' < 0``, ordered by (kappa ascending, branch sign)."""
    out = []
    for idx, kappa in enumerate(kappa_candidates(p)):
        try:
            branches = pi_branches(p, kappa)
        except NotPerfectSquare:
            continue
        for sign, pi in branches:
            tau = p.tau_tilde + pi.scale(2.0)
            if tau.c1 < 0.0:
                out.append(NUReduction(kappa=kappa, pi=pi, tau=tau, branch=sign, kappa_index=idx))
    if not out:
        raise NoAdmissibleBranch("no (kappa, pi) pair gives tau' < 0")
    out.sort(key=lambda r: (r.kappa, r.branch))
    return out


def lambda_from_kappa(r: NUReduction) -> float:
    """``lambda = kappa + pi'``."""
    return r.kappa + r.pi.c1


def lambda_of_n(r: NUReduction, sigma: Poly, n: int) -> float:
    """``lambda_n = -n tau' - n(n-1)/2 sigma''``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return -n * r.tau.c1 - 0.5 * n * (n - 1) * (2.0 * sigma.c2)


def _jacobi_scale(sigma: Poly) -> float:
    c = sigma.c0
    tol = 1e-12 * max(1.0, abs(c))
    if not (c > 0 and abs(sigma.c1) <= tol and abs(sigma.c2 + c) <= tol):
        raise UnsupportedSigmaClass(f"sigma {sigma.coeffs} is not of the form c(1 - s^2), c > 0")
    return c


def weight_exponents(r: NUReduction, sigma: Poly):
    """Exponents ``(a, b)`` of ``rho = (1-s)^a (1+s)^b`` solving ``(sigma rho)' = tau rho``."""
    c = _jacobi_scale(sigma)
    # (tau - sigma')/sigma = (-(a+b) s + (b-a)) / (1 - s^2)
    total = -(r.tau.c1 + 2.0 * c) / c
    diff = r.tau.c0 / c
    return 0.5 * (total - diff), 0.5 * (total + diff)


def phi_exponents(r: NUReduction, sigma: Poly):
    """Exponents of ``phi = (1-s)^a (1+s)^b`` solving ``phi'/phi = pi/sigma``."""
    c = _jacobi_scale(sigma)
    total = -r.pi.c1 / c
    diff = r.pi.c0 / c
    return 0.5 * (total - diff), 0.5 * (total + diff)


def tanh_triple(eps2: float, gam2: float, beta2: float) -> NUProblem:
    """Triple produced by the substitution ``s = tanh_q(alpha x)``:

    ``tau_tilde = -2s``, ``sigma = 1 - s^2``,
    ``sigma_tilde = -eps2 s^2 + gam2 s + eps2 - beta2``.
    """
    return NUProblem(
        tau_tilde=Poly([0.0, -2.0]),
        sigma=Poly([1.0, 0.0, -1.0]),
        sigma_tilde=Poly([eps2 - beta2, gam2, -eps2]),
    )


def tanh_triple_kappas(eps2: float, gam2: float, beta2: float):
    """Closed-form ``(kappa_minus, kappa_plus) = (2 eps2 - beta2 -/+ sqrt(beta2^2 - gam2^2)) / 2``."""
    root = math.sqrt(beta2 * beta2 - gam2 * gam2)
    return 0.5 * (2.0 * eps2 - beta2 - root), 0.5 * (2.0 * eps2 - beta2 + root)


def tanh_triple_mu_nu_sq(gam2: float, beta2: float):
    """Closed-form ``(mu^2, nu^2) = ((beta2 - R)/2, (beta2 + R)/2)``, ``R = sqrt(beta2^2 - gam2^2)``.

    For ``kappa_minus`` the slope of ``pi`` squares to the second value and the
    constant term to the first; for ``kappa_plus`` it is the other way round.
    """
    root = math.sqrt(beta2 * beta2 - gam2 * gam2)
    return 0.5 * (beta2 - root), 0.5 * (beta2 + root)
