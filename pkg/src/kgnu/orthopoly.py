"""Jacobi polynomials with arbitrary real parameters.

Two independent evaluation routes are provided: the three-term recurrence in
the degree (:func:`jacobi_eval`) and the explicit finite sum
(:func:`jacobi_eval_sum`).  The solver uses the recurrence; the sum exists to
cross-check it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "JacobiParams",
    "jacobi_eval",
    "jacobi_eval_sum",
    "jacobi_derivative",
    "jacobi_at_one",
    "generalized_binomial",
]


@dataclass(frozen=True)
class JacobiParams:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise ValueError("n must be a non-negative integer")

    @property
    def integrable(self) -> bool:
        """Whether the weight ``(1-s)^a (1+s)^b`` is integrable on [-1, 1]."""
        return self.a > -1 and self.b > -1

    def __call__(self, s):
        return jacobi_eval(self.n, self.a, self.b, s)

    def derivative(self, s, k: int = 1):
        return jacobi_derivative(self.n, self.a, self.b, s, k)


def generalized_binomial(x: float, m: int) -> float:
    """``C(x, m)`` for real ``x`` and integer ``m >= 0``, via log-gamma with sign tracking."""
    if m < 0:
        return 0.0
    if m == 0:
        return 1.0
    top = x + 1.0
    bottom = x - m + 1.0
    # Gamma(top) / Gamma(bottom) is a finite product even when Gamma has poles.
    if _is_nonpositive_int(top) or _is_nonpositive_int(bottom):
        return math.prod((x - m + j) / j for j in range(1, m + 1))
    lg_top, sg_top = _lgamma_signed(top)
    lg_bot, sg_bot = _lgamma_signed(bottom)
    return sg_top * sg_bot * math.exp(lg_top - lg_bot - math.lgamma(m + 1.0))


def _is_nonpositive_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _lgamma_signed(v: float):
    sign = 1.0
    if v < 0 and math.floor(v) % 2 == 1:
        sign = -1.0
    return math.lgamma(v), sign


def jacobi_at_one(n: int, a: float) -> float:
    """Endpoint value ``P_n^{(a,b)}(1) = C(n + a, n)``."""
    return generalized_binomial(n + a, n)


def jacobi_eval(n: int, a: float, b: float, s):
    """Evaluate ``P_n^{(a,b)}(s)`` by the three-term recurrence in ``n``."""
    s_arr = np.asarray(s, dtype=float)
    p_prev = np.ones_like(s_arr)
    if n == 0:
        return _scalar(p_prev, s)
    p = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * s_arr
    for k in range(2, n + 1):
        c = 2.0 * k + a + b
        a1 = 2.0 * k * (k + a + b) * (c - 2.0)
        if a1 == 0.0:
            return jacobi_eval_sum(n, a, b, s)
        a2 = (c - 1.0) * (a * a - b * b)
        a3 = (c - 1.0) * c * (c - 2.0)
        a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c
        p, p_prev = ((a2 + a3 * s_arr) * p - a4 * p_prev) / a1, p
    return _scalar(p, s)


def jacobi_eval_sum(n: int, a: float, b: float, s):
    """Evaluate ``P_n^{(a,b)}(s)`` from the explicit sum

    ``sum_k C(n+a, n-k) C(n+b, k) ((s-1)/2)^k ((s+1)/2)^(n-k)``.

    Binomials use the falling-product form so this route shares no code with
    :func:`jacobi_eval` or :func:`generalized_binomial`.
    """
    s_arr = np.asarray(s, dtype=float)
    lo = 0.5 * (s_arr - 1.0)
    hi = 0.5 * (s_arr + 1.0)
    total = np.zeros_like(s_arr)
    for k in range(n + 1):
        coef = _falling_binomial(n + a, n - k) * _falling_binomial(n + b, k)
        total = total + coef * lo**k * hi ** (n - k)
    return _scalar(total, s)


def _falling_binomial(x: float, m: int) -> float:
    out = 1.0
    for j in range(1, m + 1):
        out *= (x - m + j) / j
    return out


def jacobi_derivative(n: int, a: float, b: float, s, k: int = 1):
    """k-th derivative, ``d^k P_n^{(a,b)} = prod_{j=1..k} (n+a+b+j)/2 * P_{n-k}^{(a+k,b+k)}``."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    if k > n:
        return _scalar(np.zeros_like(np.asarray(s, dtype=float)), s)
    factor = 1.0
    for j in range(1, k + 1):
        factor *= 0.5 * (n + a + b + j)
    return factor * jacobi_eval(n - k, a + k, b + k, s)


def _scalar(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr
