"""Berry phase of a harmonic Unruh-DeWitt detector.

Closed-form phases for inertial and uniformly accelerated detectors, a
symplectic normal-mode fit, and a truncated Fock-space oracle that checks
the closed forms numerically.
"""

__version__ = "0.1.0"

from .core import CONSTANTS, DetectorConfig, PhysicalConstants, Trajectory  # noqa: E402
from .diagonalizer import NormalModeDecomposition, fit_decomposition  # noqa: E402
from .errors import DomainError, UnruhBerryError, ValidationError  # noqa: E402
from .phases import evaluate  # noqa: E402

__all__ = [
    "__version__",
    "CONSTANTS",
    "DetectorConfig",
    "PhysicalConstants",
    "Trajectory",
    "NormalModeDecomposition",
    "fit_decomposition",
    "DomainError",
    "UnruhBerryError",
    "ValidationError",
    "evaluate",
]
