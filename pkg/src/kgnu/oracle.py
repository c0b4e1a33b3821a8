"""Finite-difference ground truth for the self-consistent KG levels.

At a trial energy ``E`` the effective problem ``-psi'' + 2(E+M)V(x) psi =
Ebar^2 psi`` is discretized with second-order central differences and
Dirichlet walls.  Its Dirichlet eigenvalues ``eps_n(E)`` come from
Sturm-sequence bisection on the symmetric tridiagonal matrix.  A level is
a root of ``g_n(E) = eps_n(E) - (E^2 - M^2)``.

The eigenvalue count below a shift already fixes the sign of ``g_n``, which
makes the energy scan cheap (one sweep per scan point for all ``n``).  Only
the bisection uses full, Richardson-extrapolated eigenvalues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numba
import numpy as np
from scipy.linalg import solve_banded

from .errors import NoRoot
from .kg_core import KGProblem
from .qhyper import potential_eval

__all__ = [
    "GridSpec",
    "OracleConfig",
    "OracleResult",
    "DEFAULT_ORACLE",
    "sturm_count",
    "tridiag_eigen_lowest",
    "inverse_iteration",
    "pencil_eigen_lowest",
    "schrodinger_levels",
    "default_grid",
    "wall_coupling",
    "kg_selfconsistent_levels",
    "kg_selfconsistent_level",
    "count_nodes",
    "oracle_eigenvector",
]

_SAFMIN = np.finfo(float).tiny
_EPS = np.finfo(float).eps


@numba.njit(cache=True, nogil=True)
def _count(d, e2, x, pivmin):
    n = d.shape[0]
    cnt = 0
    piv = d[0] - x
    if abs(piv) < pivmin:
        piv = -pivmin
    if piv < 0.0:
        cnt += 1
    for i in range(1, n):
        piv = d[i] - x - e2[i - 1] / piv
        if abs(piv) < pivmin:
            piv = -pivmin
        if piv < 0.0:
            cnt += 1
    return cnt


@numba.njit(cache=True, nogil=True)
def _lowest(d, e2, k, lo, hi, rtol, atol, pivmin):
    out = np.empty(k)
    start = lo
    for j in range(k):
        a = start
        b = hi
        while b - a > max(rtol * max(abs(a), abs(b)), atol):
            mid = 0.5 * (a + b)
            if _count(d, e2, mid, pivmin) >= j + 1:
                b = mid
            else:
                a = mid
        out[j] = 0.5 * (a + b)
        start = a
    return out


@numba.njit(cache=True, nogil=True)
def _count_w(d, w, e2, x, pivmin):
    """Eigenvalues of the pencil ``(T, diag(w))`` below ``x``: negative pivots of ``T - x W``."""
    n = d.shape[0]
    cnt = 0
    piv = d[0] - x * w[0]
    if abs(piv) < pivmin:
        piv = -pivmin
    if piv < 0.0:
        cnt += 1
    for i in range(1, n):
        piv = d[i] - x * w[i] - e2[i - 1] / piv
        if abs(piv) < pivmin:
            piv = -pivmin
        if piv < 0.0:
            cnt += 1
    return cnt


@numba.njit(cache=True, nogil=True)
def _lowest_w(d, w, e2, k, lo, hi, rtol, atol, pivmin):
    out = np.empty(k)
    start = lo
    for j in range(k):
        a = start
        b = hi
        while b - a > max(rtol * max(abs(a), abs(b)), atol):
            mid = 0.5 * (a + b)
            if _count_w(d, w, e2, mid, pivmin) >= j + 1:
                b = mid
            else:
                a = mid
        out[j] = 0.5 * (a + b)
        start = a
    return out


def _prep(diag, offdiag):
    d = np.ascontiguousarray(diag, dtype=float)
    e = np.ascontiguousarray(offdiag, dtype=float)
    if e.shape[0] != max(d.shape[0] - 1, 0):
        raise ValueError("offdiag must have length len(diag) - 1")
    e2 = e * e
    pivmin = _SAFMIN * max(1.0, float(e2.max()) if e2.size else 1.0)
    return d, e, e2, pivmin


def _gershgorin(d, e):
    r = np.zeros_like(d)
    if e.size:
        ae = np.abs(e)
        r[:-1] += ae
        r[1:] += ae
    return float((d - r).min()), float((d + r).max())


def sturm_count(diag, offdiag, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal matrix strictly below ``x``."""
    d, _, e2, pivmin = _prep(diag, offdiag)
    return int(_count(d, e2, float(x), pivmin))


def tridiag_eigen_lowest(diag, offdiag, k: int, rtol: float = 1e-12):
    """Lowest ``k`` eigenvalues (ascending) by Sturm-sequence bisection.

    Accuracy is ``max(rtol * |lambda|, 4 eps ||T||)``; the second term is the
    floor set by rounding in the pivot recurrence.
    """
    d, e, e2, pivmin = _prep(diag, offdiag)
    if not 0 <= k <= d.shape[0]:
        raise ValueError("k must lie between 0 and the matrix size")
    lo, hi = _gershgorin(d, e)
    norm = max(abs(lo), abs(hi), 1e-300)
    atol = 4.0 * _EPS * norm
    return _lowest(d, e2, k, lo - atol, hi + atol, rtol, atol, pivmin)


def pencil_eigen_lowest(diag, offdiag, weights, k: int, rtol: float = 1e-12):
    """Lowest ``k`` eigenvalues of ``T v = lambda W v`` with ``W = diag(weights) > 0``.

    Counts come from the inertia of ``T - x W`` (Sylvester), so ``T`` is never
    rescaled by ``W^{-1/2}``, which matters when the weights span many decades.
    """
    d, e, e2, pivmin = _prep(diag, offdiag)
    w = np.ascontiguousarray(weights, dtype=float)
    if w.shape != d.shape or not np.all(w > 0):
        raise ValueError("weights must be positive and match diag")
    if not 0 <= k <= d.shape[0]:
        raise ValueError("k must lie between 0 and the matrix size")
    r = np.zeros_like(d)
    if e.size:
        r[:-1] += np.abs(e)
        r[1:] += np.abs(e)
    lo = float(((d - r) / w).min())
    hi = max(1.0, abs(lo))
    while k and _count_w(d, w, e2, hi, pivmin) < k:
        hi *= 2.0
    atol = 4.0 * _EPS * max(abs(lo), hi, 1.0)
    return _lowest_w(d, w, e2, k, lo - atol, hi + atol, rtol, atol, pivmin)


def inverse_iteration(diag, offdiag, eigenvalue: float, iterations: int = 3, weights=None):
    """Unit-norm eigenvector for a converged eigenvalue (of the pencil, with ``weights``)."""
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    n = d.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    norm = float(np.abs(d).max() + 2 * (np.abs(e).max() if e.size else 0.0))
    shift = eigenvalue + 1e3 * _EPS * max(norm, 1.0) / float(w.max())
    ab = np.zeros((3, n))
    ab[0, 1:] = e
    ab[1] = d - shift * w
    ab[2, :-1] = e
    v = np.ones(n) / math.sqrt(n)
    for _ in range(iterations):
        v = solve_banded((1, 1), ab, v)
        v /= np.linalg.norm(v)
    # fix the sign so the largest component is positive
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


@dataclass(frozen=True)
class GridSpec:
    """Dirichlet grid.

    Full line: ``[-L, L]``.  Half line: ``[x0 + eta, x0 + 2L]``.  ``points`` is
    the number of intervals; the unknowns are the ``points - 1`` interior nodes.
    A ``graded`` half line is uniform in ``t = ln(x - x0)`` instead of ``x``
    (see :meth:`log_nodes`).
    """

    half_width: float
    points: int
    start: Optional[float] = None
    eta: float = 0.0
    graded: bool = False

    def __post_init__(self):
        if self.points < 100:
            raise ValueError("grid needs at least 100 intervals")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.graded and (self.start is None or not self.eta > 0):
            raise ValueError("a graded grid needs a half line with eta > 0")

    @property
    def bounds(self):
        if self.start is None:
            return -self.half_width, self.half_width
        a = self.start + self.eta
        return a, self.start + 2.0 * self.half_width

    def nodes(self, points: Optional[int] = None):
        n = self.points if points is None else points
        a, b = self.bounds
        h = (b - a) / n
        return a + h * np.arange(1, n), h

    def log_nodes(self, points: Optional[int] = None):
        """Interior nodes ``x0 + exp(t_j)`` of a uniform ``t`` grid, and the ``t`` step."""
        n = self.points if points is None else points
        a, b = math.log(self.eta), math.log(2.0 * self.half_width)
        k = (b - a) / n
        return self.start + np.exp(a + k * np.arange(1, n)), k

    def refined(self, factor: int = 2) -> "GridSpec":
        return replace(self, half_width=self.half_width * factor, points=self.points * factor)


@dataclass(frozen=True)
class OracleConfig:
    half_width_alpha: float = 20.0
    points: int = 4000
    scan_points: int = 512
    bisect_tol: float = 1e-10
    eta_alpha: float = 1e-12
    graded: bool = True
    leak_tol: float = 1e-6
    extrapolate: bool = True
    max_widenings: int = 5
    delta_rel: float = 1e-6


DEFAULT_ORACLE = OracleConfig()


@dataclass
class OracleResult:
    n: int
    energy: float
    eigenvalue: float
    boundary_leak: float
    grid: GridSpec
    extrapolated: bool
    nodes: int = -1
    bound: bool = True


@dataclass
class LevelSet:
    values: np.ndarray
    x: np.ndarray
    vectors: Optional[np.ndarray] = None
    raw: tuple = field(default_factory=tuple)


def _operator(v_values, h):
    diag = 2.0 / (h * h) + v_values
    off = np.full(v_values.shape[0] - 1, -1.0 / (h * h))
    return diag, off


def schrodinger_levels(v_eff: Callable, grid: GridSpec, k: int, extrapolate: bool = True,
                       vectors: bool = False) -> LevelSet:
    """Lowest ``k`` Dirichlet eigenvalues of ``-d^2/dx^2 + v_eff`` on ``grid``.

    With ``extrapolate`` the values from ``N`` and ``2N`` intervals are combined
    as ``(4 e_2N - e_N) / 3``.  Eigenvectors, when requested, live on the
    ``N``-interval nodes returned in ``x``.
    """
    x, h = grid.nodes()
    diag, off = _operator(np.asarray(v_eff(x), dtype=float), h)
    coarse = tridiag_eigen_lowest(diag, off, k)
    values, raw = coarse, (coarse,)
    if extrapolate:
        xf, hf = grid.nodes(2 * grid.points)
        fd, fo = _operator(np.asarray(v_eff(xf), dtype=float), hf)
        fine = tridiag_eigen_lowest(fd, fo, k)
        values = (4.0 * fine - coarse) / 3.0
        raw = (coarse, fine)
    vecs = None
    if vectors:
        vecs = np.array([inverse_iteration(diag, off, lam) for lam in coarse])
    return LevelSet(values=values, x=x, vectors=vecs, raw=raw)


def count_nodes(vector) -> int:
    """Strict sign changes, skipping entries below ``1e-12 * max|v|``."""
    v = np.asarray(vector, dtype=float)
    if v.size == 0:
        return 0
    keep = v[np.abs(v) > 1e-12 * np.abs(v).max()]
    if keep.size < 2:
        return 0
    s = np.sign(keep)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def default_grid(p: KGProblem, config: OracleConfig = DEFAULT_ORACLE) -> GridSpec:
    alpha = p.potential.alpha
    dom = p.domain
    L = config.half_width_alpha / alpha
    if dom.kind == "full":
        return GridSpec(L, config.points)
    return GridSpec(L, config.points, start=dom.start, eta=config.eta_alpha / alpha, graded=config.graded)


def wall_coupling(p: KGProblem, grid: GridSpec, energy: float) -> float:
    """Strength ``g`` of the ``-g/(x - x0)^2`` tail of the effective potential at the pole.

    Read off the sampled potential a short distance from the pole. For
    ``g > 1/4`` the Hamiltonian is unbounded below (fall to the center) and the
    grid levels move without limit as the spacing shrinks.  Zero on a full line.
    """
    if grid.start is None:
        return 0.0
    d = 1e-11 / p.potential.alpha  # the coth-type 1/d term enters g at relative order d
    v = float(potential_eval(p.potential, grid.start + d))
    return -2.0 * (energy + p.mass) * v * d * d


CRITICAL_COUPLING = 0.25


class _Discretization:
    """``-d^2/dx^2 + 2(E+M)V`` on one grid, with the potential sampled once.

    On a graded half line, ``x = x0 + e^t`` and ``psi = e^{t/2} phi`` give the
    pencil ``-phi'' + (1/4 + e^{2t} V_eff) phi = eps e^{2t} phi``, uniform in
    ``t``.  Near the pole ``V_eff ~ -g/(x - x0)^2`` and the solutions behave
    like ``(x - x0)^{(1 +/- D)/2}``: a uniform ``x`` grid with a Dirichlet wall
    converges only like ``h^D``.  The ``t`` grid is smooth, and the inner wall
    carries the regular asymptotics instead of ``phi = 0``.
    """

    def __init__(self, p: KGProblem, grid: GridSpec, points: int):
        self.mass = p.mass
        self.graded = grid.graded
        if self.graded:
            self.x, self.h = grid.log_nodes(points)
            self.delta = self.x - grid.start
            self.w = self.delta * self.delta
        else:
            self.x, self.h = grid.nodes(points)
            self.w = None
        self.v = np.asarray(potential_eval(p.potential, self.x), dtype=float)
        off = np.full(self.x.shape[0] - 1, -1.0 / (self.h * self.h))
        self.off = off
        self.e2 = off * off
        self.pivmin = _SAFMIN * max(1.0, float(self.e2.max()))

    def diag(self, energy):
        c = 2.0 * (energy + self.mass)
        if self.graded:
            d = 2.0 / (self.h * self.h) + 0.25 + self.w * c * self.v
            # ghost node phi_0 = phi_1 exp(-D k/2): the regular pole solution
            # phi ~ (x - x0)^{D/2}, D = sqrt(1 - 4g), with g read off the first node
            g = -c * self.w[0] * self.v[0]
            if g < CRITICAL_COUPLING:
                d[0] -= math.exp(-0.5 * math.sqrt(1.0 - 4.0 * g) * self.h) / (self.h * self.h)
            return d
        return 2.0 / (self.h * self.h) + c * self.v

    def count_below(self, energy, shift):
        if self.graded:
            return int(_count_w(self.diag(energy), self.w, self.e2, float(shift), self.pivmin))
        return int(_count(self.diag(energy), self.e2, float(shift), self.pivmin))

    def levels(self, energy, k):
        if self.graded:
            return pencil_eigen_lowest(self.diag(energy), self.off, self.w, k)
        return tridiag_eigen_lowest(self.diag(energy), self.off, k)

    def vector(self, energy, eigenvalue):
        """``psi`` on ``self.x``, normalized so ``sum psi^2 dx = 1`` (``dx = (x - x0) k`` when graded)."""
        vec = inverse_iteration(self.diag(energy), self.off, eigenvalue, weights=self.w)
        if self.graded:
            psi = np.sqrt(self.delta) * vec
            return psi / math.sqrt(float(np.sum(self.w * vec * vec)) * self.h)
        return vec / math.sqrt(self.h)

    def threshold(self, energy, half_line=False):
        """Continuum edge estimate: effective potential at the truncation walls."""
        c = 2.0 * (energy + self.mass)
        if half_line:
            return float(c * self.v[-1])
        return float(min(c * self.v[0], c * self.v[-1]))


class _SelfConsistent:
    def __init__(self, p: KGProblem, grid: GridSpec, extrapolate: bool):
        self.p = p
        self.grid = grid
        self.extrapolate = extrapolate
        self.coarse = _Discretization(p, grid, grid.points)
        self.fine = _Discretization(p, grid, 2 * grid.points) if extrapolate else None

    def eps(self, energy, n):
        c = self.coarse.levels(energy, n + 1)[n]
        if not self.extrapolate:
            return c
        f = self.fine.levels(energy, n + 1)[n]
        return (4.0 * f - c) / 3.0

    def g(self, energy, n):
        return self.eps(energy, n) - (energy * energy - self.p.mass**2)

    def signs(self, energies, n):
        """True where ``g_n < 0`` on the coarse grid, from a single Sturm count."""
        m2 = self.p.mass**2
        return np.array([self.coarse.count_below(e, e * e - m2) > n for e in energies])

    def bisect(self, n, lo, hi, glo, tol):
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            gm = self.g(mid, n)
            if gm == 0.0:
                return mid
            if (gm < 0) == (glo < 0):
                lo, glo = mid, gm
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def bracket_root(self, n, lo, hi, step, e_min, e_max, widen=3):
        glo, ghi = self.g(lo, n), self.g(hi, n)
        for _ in range(widen):
            if glo * ghi <= 0:
                break
            lo, hi = max(e_min, lo - step), min(e_max, hi + step)
            glo, ghi = self.g(lo, n), self.g(hi, n)
        if glo * ghi > 0:
            return None
        return lo, hi, glo

    def describe(self, energy, n):
        disc = self.fine if self.extrapolate else self.coarse
        vec = disc.vector(energy, disc.levels(energy, n + 1)[n])
        amax = np.abs(vec).max()
        # the pole-side wall of a half line is physical, not a truncation
        edges = abs(vec[-1]) if self.grid.start is not None else max(abs(vec[0]), abs(vec[-1]))
        leak = float(edges / amax)
        eig = self.eps(energy, n)
        bound = eig < disc.threshold(energy, self.grid.start is not None)
        return OracleResult(
            n=n, energy=energy, eigenvalue=eig, boundary_leak=leak, grid=self.grid,
            extrapolated=self.extrapolate, nodes=count_nodes(vec), bound=bool(bound),
        )


def _scan_brackets(sc: _SelfConsistent, n, energies):
    neg = sc.signs(energies, n)
    return [i for i in range(len(energies) - 1) if neg[i] != neg[i + 1]]


def kg_selfconsistent_levels(p: KGProblem, n: int, grid: Optional[GridSpec] = None,
                             config: OracleConfig = DEFAULT_ORACLE) -> list:
    """Every accepted self-consistent root of ``g_n`` in ``(-M, M)``, ascending in energy.

    A root is accepted when its eigenvalue lies below the continuum edge and
    the eigenvector leaks at most ``leak_tol`` into the truncation walls (the
    far wall only, on a half line).  On a half line a root is also dropped
    when the inverse-square coupling at the pole is supercritical
    (:func:`wall_coupling` above 1/4).  Roots that are
    bound but leak are re-solved on a grid twice as wide (same spacing), up to
    ``max_widenings`` times.
    """
    if p.potential.q == 0:
        raise ValueError("q = 0 has no bound-state problem")
    grid = grid or default_grid(p, config)
    delta = config.delta_rel * p.mass
    e_min, e_max = -p.mass + delta, p.mass - delta
    energies = np.linspace(e_min, e_max, config.scan_points)
    step = energies[1] - energies[0]
    sc = _SelfConsistent(p, grid, config.extrapolate)
    out = []
    for i in _scan_brackets(sc, n, energies):
        res = _solve_bracket(p, sc, n, energies[i], energies[i + 1], step, e_min, e_max, config)
        if res is not None:
            out.append(res)
    out.sort(key=lambda r: r.energy)
    return out


def _solve_bracket(p, sc, n, lo, hi, step, e_min, e_max, config):
    for attempt in range(config.max_widenings + 1):
        br = sc.bracket_root(n, lo, hi, step, e_min, e_max)
        if br is None:
            return None
        root = sc.bisect(n, br[0], br[1], br[2], config.bisect_tol)
        if wall_coupling(p, sc.grid, root) > CRITICAL_COUPLING:
            return None  # cutoff artifact, not a level
        res = sc.describe(root, n)
        if not res.bound:
            return None
        if res.boundary_leak <= config.leak_tol:
            return res
        if attempt == config.max_widenings:
            return None
        sc = _SelfConsistent(p, sc.grid.refined(2), config.extrapolate)
        lo, hi = max(e_min, root - step), min(e_max, root + step)
    return None


def kg_selfconsistent_level(p: KGProblem, n: int, near: Optional[float] = None,
                            grid: Optional[GridSpec] = None,
                            config: OracleConfig = DEFAULT_ORACLE) -> OracleResult:
    """One self-consistent level: the one closest to ``near``, else the lowest."""
    roots = kg_selfconsistent_levels(p, n, grid, config)
    if not roots:
        raise NoRoot(f"no self-consistent bound level n={n}")
    if near is None:
        return roots[0]
    return min(roots, key=lambda r: abs(r.energy - near))


def oracle_eigenvector(p: KGProblem, n: int, energy: float, grid: Optional[GridSpec] = None,
                       config: OracleConfig = DEFAULT_ORACLE):
    """Grid nodes and the n-th FD eigenvector at ``energy``, scaled so ``sum psi^2 dx = 1``.

    ``dx`` is the grid step, or ``(x - x0) k`` on a graded half line.
    """
    grid = grid or default_grid(p, config)
    disc = _Discretization(p, grid, grid.points)
    return disc.x, disc.vector(energy, disc.levels(energy, n + 1)[n])
