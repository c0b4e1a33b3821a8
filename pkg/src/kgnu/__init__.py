"""Klein-Gordon bound states for equal scalar and vector Rosen-Morse type
potentials, solved by the Nikiforov-Uvarov method and checked against a
finite-difference eigensolver."""

__version__ = "0.1.0"

from .errors import KGNUError  # noqa: E402
from .kg_core import BoundState, KGProblem, energy_levels, wavefunction  # noqa: E402
from .qhyper import PotentialParams, potential_eval  # noqa: E402

__all__ = [
    "__version__",
    "KGNUError",
    "BoundState",
    "KGProblem",
    "PotentialParams",
    "energy_levels",
    "potential_eval",
    "wavefunction",
]
