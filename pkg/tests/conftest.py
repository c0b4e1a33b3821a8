import functools

import numpy as np
import pytest

from kgnu.kg_core import KGProblem, energy_levels
from kgnu.qhyper import PotentialParams

GRID_CASES = tuple(
    (q, v1, v2)
    for q in (1.0, 0.5, -1.0)
    for v1 in (0.5, 1.0, 2.0)
    for v2 in (0.0, -v1 / 3.0)
)


def anchor_energy() -> float:
    """Root in (-1, 1) of E^3 + 7E^2 + 16E + 8, from numpy's companion-matrix solver."""
    roots = np.roots([1.0, 7.0, 16.0, 8.0])
    real = [r.real for r in roots if abs(r.imag) < 1e-12 and -1 < r.real < 1]
    assert len(real) == 1
    return real[0]


@functools.lru_cache(maxsize=None)
def problem(q, v1, v2, mass=1.0, alpha=1.0):
    return KGProblem(mass, PotentialParams(v1, v2, alpha, q))


@functools.lru_cache(maxsize=None)
def levels(q, v1, v2):
    return tuple(energy_levels(problem(q, v1, v2)))


def physical_grid_states():
    out = []
    for case in GRID_CASES:
        for s in levels(*case):
            if s.physical:
                out.append((case, s))
    return out


@pytest.fixture(scope="session")
def grid_states():
    return physical_grid_states()
