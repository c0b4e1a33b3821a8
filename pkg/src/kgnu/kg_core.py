"""Klein-Gordon bound states for equal scalar and vector Rosen-Morse type potentials.

With ``S = V`` the one-dimensional KG equation becomes

    psi'' + [Ebar^2 + V1bar sech_q^2(alpha x) + V2bar tanh_q(alpha x)] psi = 0,

with ``Ebar^2 = E^2 - M^2`` and ``ViBar = 2(E + M) Vi``.  The substitution
``s = tanh_q(alpha x)`` turns it into a Jacobi-class equation whose
quantization condition is

    Ebar^2 = -V2bar^2 / (alpha^2 Lam^2) - alpha^2 Lam^2 / 4,
    Lam = 2n + 1 - D,  D = sqrt(1 + 4 V1bar / (q alpha^2)).

``E`` enters both sides, so levels are roots of the residual
:func:`energy_residual` in ``(-M, M)``.

Reduced symbols follow the convention

    eps2 = -V1bar/(q alpha^2),  gam2 = -V2bar/alpha^2,  beta2 = -Ebar^2/alpha^2,

so that ``D = sqrt(1 - 4 eps2)``, ``mu = -Lam/2``, ``nu = gam2/(2 mu)`` and at a
solution ``mu^2 + nu^2 = beta2``, ``2 mu nu = gam2``.  The wavefunction is

    psi = |1-s|^{(mu+nu)/2} |1+s|^{(mu-nu)/2} P_n^{(mu+nu, mu-nu)}(s).

For ``q < 0`` the problem lives on the half line right of the ``cosh_q`` zero,
where ``s`` runs over ``(1, inf)``.  A solution regular at that pole needs the
other square-root branch, ``Lam = 2n + 1 + D``; both branches are scanned and
the printed one is flagged ``irregular_at_pole``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from . import nu_engine, qhyper
from .errors import DegenerateLevel, DiscriminantNegative, NotPhysical
from .orthopoly import jacobi_derivative, jacobi_eval
from .qhyper import PotentialParams

__all__ = [
    "Domain",
    "KGProblem",
    "SolverConfig",
    "DEFAULT_CONFIG",
    "ReducedParams",
    "Exponents",
    "BoundState",
    "Wavefunction",
    "effective_problem",
    "reduced_params",
    "exponents_at",
    "energy_residual",
    "energy_levels",
    "classify",
    "wavefunction",
    "ode_residual",
    "nu_quantization_gap",
]

PRINTED_BRANCH = -1
REGULAR_BRANCH = 1


@dataclass(frozen=True)
class Domain:
    kind: str  # "full" or "half"
    start: Optional[float] = None


@dataclass(frozen=True)
class KGProblem:
    mass: float
    potential: PotentialParams

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError("mass must be positive and finite")

    @property
    def domain(self) -> Domain:
        x0 = self.potential.pole
        if x0 is None:
            return Domain("full")
        return Domain("half", x0)

    def as_dict(self):
        return {"mass": self.mass, **self.potential.as_dict()}


@dataclass(frozen=True)
class SolverConfig:
    delta_rel: float = 1e-6
    grid_points: int = 2001
    bisect_tol_rel: float = 1e-12
    lambda_tol: float = 1e-8
    # auto n-range cap for the half line, where no D-threshold bounds n
    max_levels: int = 50


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class ReducedParams:
    energy: float
    ebar2: float
    v1bar: float
    v2bar: float
    eps2: float
    gam2: float
    beta2: float

    @property
    def d_squared(self) -> float:
        return 1.0 - 4.0 * self.eps2


@dataclass(frozen=True)
class Exponents:
    mu: float
    nu: complex | float
    lam_n: float
    d: float
    branch: int = PRINTED_BRANCH

    @property
    def a(self):
        return self.mu + self.nu

    @property
    def b(self):
        return self.mu - self.nu


@dataclass
class BoundState:
    n: int
    energy: float
    ebar2: float
    exponents: Exponents
    physical: bool
    reasons: tuple = ()
    branch: int = PRINTED_BRANCH
    pt: bool = False
    norm_constant: Optional[float] = None
    oracle_energy: Optional[float] = None
    oracle_gap: Optional[float] = None

    @property
    def mu(self):
        return self.exponents.mu

    @property
    def nu(self):
        return self.exponents.nu


def _require_q(p: KGProblem):
    if p.potential.q == 0:
        raise ValueError(
            "spectra are undefined at q = 0: the energy equation divides by q "
            "(the q = 0 exponential potential is not covered)"
        )


def effective_problem(p: KGProblem, energy: float):
    """Effective Schrodinger problem ``-psi'' + V_eff psi = Ebar^2 psi`` at trial energy.

    ``V_eff(x) = 2(E + M) V(x)``, the sign that reproduces the transformed ODE.
    Returns ``(V_eff, Ebar^2)``.
    """
    coupling = 2.0 * (energy + p.mass)
    pot = p.potential

    def v_eff(x):
        return coupling * qhyper.potential_eval(pot, x)

    return v_eff, energy * energy - p.mass * p.mass


def reduced_params(p: KGProblem, energy: float) -> ReducedParams:
    _require_q(p)
    pot = p.potential
    a2 = pot.alpha * pot.alpha
    ebar2 = energy * energy - p.mass * p.mass
    v1bar = 2.0 * (energy + p.mass) * pot.v1
    v2bar = 2.0 * (energy + p.mass) * pot.v2
    return ReducedParams(
        energy=energy,
        ebar2=ebar2,
        v1bar=v1bar,
        v2bar=v2bar,
        eps2=-v1bar / (pot.q * a2),
        gam2=-v2bar / a2,
        beta2=-ebar2 / a2,
    )


def _lam(p: KGProblem, n: int, energy, branch: int):
    """``(Lam, D)`` arrays; NaN where ``D`` is not real."""
    pot = p.potential
    e = np.asarray(energy, dtype=float)
    d2 = 1.0 + 8.0 * (e + p.mass) * pot.v1 / (pot.q * pot.alpha**2)
    with np.errstate(invalid="ignore"):
        d = np.where(d2 >= 0.0, np.sqrt(np.abs(d2)), np.nan)
    return 2 * n + 1 + branch * d, d


def _residual(p: KGProblem, n: int, energy, branch: int, sign: float, lam_tol: float):
    """Vectorized residual; NaN wherever the preconditions fail."""
    pot = p.potential
    e = np.asarray(energy, dtype=float)
    lam, _ = _lam(p, n, e, branch)
    v2bar = 2.0 * (e + p.mass) * pot.v2
    a2 = pot.alpha**2
    ok = np.isfinite(lam) & (np.abs(lam) > lam_tol)
    safe = np.where(ok, lam, 1.0)
    f = e * e - p.mass**2 + sign * v2bar**2 / (a2 * safe * safe) + 0.25 * a2 * safe * safe
    return np.where(ok, f, np.nan), lam


def energy_residual(
    p: KGProblem,
    n: int,
    energy: float,
    branch: int = PRINTED_BRANCH,
    pt: bool = False,
    lambda_tol: float = DEFAULT_CONFIG.lambda_tol,
) -> float:
    """``F_n(E) = E^2 - M^2 + V2bar^2/(alpha^2 Lam^2) + alpha^2 Lam^2 / 4``.

    ``pt=True`` flips the sign of the ``V2bar^2`` term (``V2 -> i V2``).
    ``branch=+1`` uses ``Lam = 2n + 1 + D``.
    """
    _require_q(p)
    lam, d = _lam(p, n, energy, branch)
    if not np.isfinite(d):
        raise DiscriminantNegative(f"1 + 4 V1bar/(q alpha^2) < 0 at E = {energy}")
    if abs(float(lam)) <= lambda_tol:
        raise DegenerateLevel(f"Lam_{n} vanishes at E = {energy}")
    f, _ = _residual(p, n, energy, branch, -1.0 if pt else 1.0, 0.0)
    return float(f)


def exponents_at(p: KGProblem, n: int, energy: float, branch: int = PRINTED_BRANCH, pt: bool = False) -> Exponents:
    rp = reduced_params(p, energy)
    lam, d = _lam(p, n, energy, branch)
    lam, d = float(lam), float(d)
    mu = -0.5 * lam
    if pt:
        nu = complex(0.0, rp.gam2) / (2.0 * mu) if mu != 0 else complex("nan")
    else:
        nu = rp.gam2 / (2.0 * mu) if mu != 0 else math.nan
    return Exponents(mu=mu, nu=nu, lam_n=lam, d=d, branch=branch)


def classify(p: KGProblem, n: int, energy: float, branch: int = PRINTED_BRANCH,
             pt: bool = False, config: SolverConfig = DEFAULT_CONFIG):
    """Exponents plus the list of reasons that make a root unphysical."""
    ex = exponents_at(p, n, energy, branch, pt)
    rp = reduced_params(p, energy)
    reasons = []
    delta = config.delta_rel * p.mass
    if abs(energy + p.mass) <= 2 * delta or abs(energy - p.mass) <= 2 * delta:
        reasons.append("mass_edge")
    if p.domain.kind == "full":
        if branch != PRINTED_BRANCH:
            reasons.append("wrong_branch")
        if not ex.d > 2 * n + 1:
            reasons.append("below_threshold")
        if pt:
            pass  # nu is imaginary; mu > 0 is all normalizability needs
        else:
            if not rp.beta2**2 > rp.gam2**2:
                reasons.append("beta_discriminant")
            if not ex.mu > abs(ex.nu):
                reasons.append("exponent_sign")
    else:
        if branch != REGULAR_BRANCH:
            reasons.append("irregular_at_pole")
        if pt or not (ex.mu + ex.nu) > 0:
            reasons.append("no_decay")
    return ex, tuple(reasons)


def _bisect(f: Callable[[float], float], lo: float, hi: float, flo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scan_roots(fvals, lam, grid):
    """Indices of sign-change brackets and exact zeros on a residual grid."""
    valid = np.isfinite(fvals)
    same_side = np.sign(lam[:-1]) == np.sign(lam[1:])
    pair = valid[:-1] & valid[1:] & same_side
    brackets = np.nonzero(pair & (fvals[:-1] * fvals[1:] < 0))[0]
    zeros = []
    for i in np.nonzero(valid & (fvals == 0.0))[0]:
        if 0 < i < len(grid) - 1 and pair[i - 1] and pair[i] and fvals[i - 1] * fvals[i + 1] < 0:
            zeros.append(int(i))
    return brackets, zeros


def _default_n_max(p: KGProblem, lo: float, hi: float) -> int:
    _, d = _lam(p, 0, np.array([lo, hi]), PRINTED_BRANCH)
    d = d[np.isfinite(d)]
    if d.size == 0:
        return -1
    d_max = float(d.max())
    if d_max <= 1.0:
        return -1
    return int(math.ceil((d_max - 1.0) / 2.0)) - 1


def _roots_for_n(p, n, branch, sign, grid, config):
    lo_tol = config.bisect_tol_rel * p.mass
    fvals, lam = _residual(p, n, grid, branch, sign, config.lambda_tol)
    brackets, zeros = _scan_roots(fvals, lam, grid)

    def f(e):
        return float(_residual(p, n, e, branch, sign, config.lambda_tol)[0])

    roots = [float(grid[i]) for i in zeros]
    for i in brackets:
        roots.append(_bisect(f, float(grid[i]), float(grid[i + 1]), float(fvals[i]), lo_tol))
    return sorted(roots)


def energy_levels(
    p: KGProblem,
    n_max_hint: Optional[int] = None,
    config: SolverConfig = DEFAULT_CONFIG,
    pt: bool = False,
) -> list:
    """All roots of the quantization residual in ``(-M, M)``, flagged for physicality.

    Without ``n_max_hint`` the n-range is chosen automatically: on the full line
    up to the largest ``n`` with ``2n + 1 < D`` somewhere in the energy window,
    on the half line until a level index has no physical root.
    """
    _require_q(p)
    delta = config.delta_rel * p.mass
    lo, hi = -p.mass + delta, p.mass - delta
    grid = np.linspace(lo, hi, config.grid_points)
    sign = -1.0 if pt else 1.0
    half = p.domain.kind == "half"
    branches = (REGULAR_BRANCH, PRINTED_BRANCH) if half else (PRINTED_BRANCH,)

    if n_max_hint is not None:
        n_values = range(n_max_hint + 1)
        auto = False
    elif half:
        n_values = range(config.max_levels)
        auto = True
    else:
        n_values = range(_default_n_max(p, lo, hi) + 1)
        auto = False

    states = []
    for n in n_values:
        found = []
        for branch in branches:
            for e in _roots_for_n(p, n, branch, sign, grid, config):
                ex, reasons = classify(p, n, e, branch, pt, config)
                found.append(BoundState(
                    n=n, energy=e, ebar2=e * e - p.mass**2, exponents=ex,
                    physical=not reasons, reasons=reasons, branch=branch, pt=pt,
                ))
        states.extend(found)
        if auto and not any(s.physical for s in found):
            break
    states.sort(key=lambda s: (s.n, s.energy, s.branch))
    return states


class Wavefunction:
    """``psi(x) = B |1-s|^{a/2} |1+s|^{b/2} P_n^{(a,b)}(s)`` with ``s = tanh_q(alpha x)``."""

    def __init__(self, problem: KGProblem, n: int, mu: float, nu: float, normalize: bool = True):
        self.problem = problem
        self.n = n
        self.mu = float(mu)
        self.nu = float(nu)
        self.a = self.mu + self.nu
        self.b = self.mu - self.nu
        self.norm_constant = 1.0
        if normalize:
            self.norm_constant = 1.0 / math.sqrt(self._raw_norm_squared())

    @property
    def domain(self):
        return self.problem.domain

    def _parts(self, x):
        pot = self.problem.potential
        y = np.asarray(x, dtype=float) * pot.alpha
        lm = qhyper.log_abs_one_minus_tanh_q(y, pot.q)
        lp = qhyper.log_abs_one_plus_tanh_q(y, pot.q)
        s = qhyper.tanh_q(y, pot.q)
        # signed 1 - s and 1 + s from their stable logs
        m = np.exp(lm) * (1.0 if pot.q > 0 else -1.0)
        pl = np.exp(lp)
        log_env = 0.5 * self.a * lm + 0.5 * self.b * lp
        return s, m, pl, log_env

    def log_abs(self, x):
        s, _, _, log_env = self._parts(x)
        poly = jacobi_eval(self.n, self.a, self.b, s)
        with np.errstate(divide="ignore"):
            return log_env + np.log(np.abs(poly)) + math.log(abs(self.norm_constant))

    def __call__(self, x):
        s, _, _, log_env = self._parts(x)
        poly = jacobi_eval(self.n, self.a, self.b, s)
        return self.norm_constant * np.exp(log_env) * poly

    def derivatives(self, x):
        """``(psi, psi', psi'')`` from the exact chain rule in ``s``."""
        alpha = self.problem.potential.alpha
        s, m, pl, log_env = self._parts(x)
        n, a, b = self.n, self.a, self.b
        g = self.norm_constant * np.exp(log_env)
        P = jacobi_eval(n, a, b, s)
        dP = jacobi_derivative(n, a, b, s, 1)
        d2P = jacobi_derivative(n, a, b, s, 2)
        mp = m * pl  # = 1 - s^2
        K = 0.5 * (b * m - a * pl)  # (log g)' * (1 - s^2)
        psi = g * P
        d1 = g * alpha * (K * P + mp * dP)
        d2 = g * alpha**2 * (
            (K * K - 0.5 * a * pl * pl - 0.5 * b * m * m) * P
            + 2.0 * K * mp * dP
            + mp * mp * d2P
            - 2.0 * s * (K * P + mp * dP)
        )
        return psi, d1, d2

    def _raw_norm_squared(self) -> float:
        pot = self.problem.potential
        if self.domain.kind == "full":
            if not (self.a > 0 and self.b > 0):
                raise NotPhysical("wavefunction exponents must be positive to normalize")
            # int psi^2 dx = (1/alpha) int (1-s)^{a-1} (1+s)^{b-1} P_n(s)^2 ds, exact by Gauss-Jacobi
            nodes, weights = special.roots_jacobi(self.n + 2, self.a - 1.0, self.b - 1.0)
            vals = jacobi_eval(self.n, self.a, self.b, nodes)
            return float(np.dot(weights, vals * vals)) / pot.alpha
        x0 = self.domain.start
        scale = 1.0 / pot.alpha

        def integrand(x):
            return float(np.exp(2.0 * self.log_abs(x)))

        first, _ = integrate.quad(integrand, x0, x0 + scale, limit=200, epsabs=0.0, epsrel=1e-12)
        rest, _ = integrate.quad(integrand, x0 + scale, np.inf, limit=200, epsabs=0.0, epsrel=1e-12)
        return first + rest


def wavefunction(p: KGProblem, state: BoundState) -> Wavefunction:
    if state.pt:
        raise NotPhysical("PT-symmetric wavefunctions (complex Jacobi parameters) are not evaluated")
    if not state.physical:
        raise NotPhysical(f"state n={state.n}, E={state.energy} is not physical: {','.join(state.reasons)}")
    wf = Wavefunction(p, state.n, state.mu, state.nu)
    state.norm_constant = wf.norm_constant
    return wf


def ode_residual(p: KGProblem, state: BoundState, xs, energy: Optional[float] = None) -> float:
    """Max of ``|psi'' + (Ebar^2 + V1bar sech_q^2 + V2bar tanh_q) psi| / max|psi|`` on ``xs``.

    With ``energy`` given, exponents and ODE coefficients are recomputed at
    that (generally non-solution) energy for the same ``n`` and branch.
    """
    e = state.energy if energy is None else float(energy)
    if energy is None:
        mu, nu = state.mu, state.nu
    else:
        ex = exponents_at(p, state.n, e, state.branch)
        mu, nu = ex.mu, ex.nu
    wf = Wavefunction(p, state.n, mu, nu, normalize=False)
    xs = np.asarray(xs, dtype=float)
    psi, _, d2 = wf.derivatives(xs)
    rp = reduced_params(p, e)
    pot = p.potential
    y = pot.alpha * xs
    coef = rp.ebar2 + rp.v1bar * qhyper.sech_q(y, pot.q) ** 2 + rp.v2bar * qhyper.tanh_q(y, pot.q)
    return float(np.max(np.abs(d2 + coef * psi)) / np.max(np.abs(psi)))


def nu_quantization_gap(p: KGProblem, state: BoundState):
    """Re-derive the quantization through the generic NU engine.

    The tanh-substitution triple is built with ``sigma_tilde`` coefficients
    ``(-eps2, -gam2, beta2)`` in the engine's ``tanh_triple`` convention.  On the
    full line the admissible ``(kappa_minus, pi_minus)`` reduction is used; on
    the half line (``s > 1``) the ``tau' < 0`` rule does not apply and the
    ``(kappa_plus, pi_plus)`` pair carries the regular solution.

    Returns ``(|lambda - lambda_n|, (a, b))`` with the engine's weight exponents.
    """
    rp = reduced_params(p, state.energy)
    prob = nu_engine.tanh_triple(-rp.eps2, -rp.gam2, rp.beta2)
    if p.domain.kind == "full":
        red = [r for r in nu_engine.select_admissible(prob) if r.kappa_index == 0 and r.branch == -1][0]
    else:
        kappas = nu_engine.kappa_candidates(prob)
        kappa = kappas[-1]
        sign, pi = [b for b in nu_engine.pi_branches(prob, kappa) if b[0] == 1][0]
        tau = prob.tau_tilde + pi.scale(2.0)
        red = nu_engine.NUReduction(kappa=kappa, pi=pi, tau=tau, branch=sign, kappa_index=len(kappas) - 1)
    gap = abs(nu_engine.lambda_from_kappa(red) - nu_engine.lambda_of_n(red, prob.sigma, state.n))
    return gap, nu_engine.weight_exponents(red, prob.sigma)


def with_oracle(state: BoundState, oracle_energy: Optional[float]) -> BoundState:
    gap = None if oracle_energy is None else abs(oracle_energy - state.energy)
    return replace(state, oracle_energy=oracle_energy, oracle_gap=gap)
