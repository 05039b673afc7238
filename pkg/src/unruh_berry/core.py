"""Physical constants, detector configuration, trajectories and kinematics.

All frequencies are angular (rad/s).  Frequencies quoted in "GHz", "kHz"
or "Hz" are read as rad/s throughout: one field cycle at 2.0e9 rad/s then
lasts 2*pi/2.0e9 = 3.14 ns.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from scipy import constants as _codata

from .errors import DomainError, ValidationError

#: Largest coupling ratio lambda/Omega_a for which the closed-form phases are used.
WEAK_COUPLING_LIMIT = 1e-3


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants (CODATA values from :mod:`scipy.constants`)."""

    hbar: float = _codata.hbar
    c: float = _codata.c
    k_B: float = _codata.k

    def __post_init__(self):
        for name in ("hbar", "c", "k_B"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be strictly positive", key=name)


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class DetectorConfig:
    """Field frequency, detector frequency and coupling, all in rad/s.

    Construction rejects configurations whose quadratic form is not
    positive definite (``omega_field * omega_detector <= 4 * coupling**2``).
    """

    omega_field: float
    omega_detector: float
    coupling: float = 0.0

    def __post_init__(self):
        for name in ("omega_field", "omega_detector", "coupling"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}", key=name)
        if self.omega_field <= 0:
            raise ValidationError("omega_field must be > 0", key="omega_field")
        if self.omega_detector <= 0:
            raise ValidationError("omega_detector must be > 0", key="omega_detector")
        if self.coupling < 0:
            raise ValidationError("coupling must be >= 0", key="coupling")
        if self.omega_field * self.omega_detector <= 4.0 * self.coupling**2:
            raise ValidationError(
                "unstable configuration: omega_field*omega_detector must exceed 4*coupling^2",
                key="coupling",
            )

    @property
    def coupling_ratio(self) -> float:
        return self.coupling / self.omega_field

    @property
    def weak_coupling(self) -> bool:
        """True when the closed-form phases may be used."""
        return self.coupling_ratio <= WEAK_COUPLING_LIMIT

    def require_weak_coupling(self):
        if not self.weak_coupling:
            raise DomainError(
                f"coupling/omega_field = {self.coupling_ratio:.3g} exceeds the closed-form "
                f"limit {WEAK_COUPLING_LIMIT:g}; use the Fock-space oracle instead"
            )


class TrajectoryKind(enum.Enum):
    INERTIAL = "inertial"
    UNIFORM_ACCELERATION = "uniform_acceleration"


@dataclass(frozen=True)
class Trajectory:
    kind: TrajectoryKind
    proper_acceleration: Optional[float] = None

    def __post_init__(self):
        if self.kind is TrajectoryKind.INERTIAL:
            if self.proper_acceleration is not None:
                raise ValidationError(
                    "an inertial trajectory carries no acceleration", key="proper_acceleration"
                )
        elif self.proper_acceleration is None or not self.proper_acceleration > 0:
            raise ValidationError(
                "uniform acceleration requires proper_acceleration > 0", key="proper_acceleration"
            )

    @classmethod
    def inertial(cls) -> "Trajectory":
        return cls(TrajectoryKind.INERTIAL)

    @classmethod
    def accelerated(cls, a: float) -> "Trajectory":
        return cls(TrajectoryKind.UNIFORM_ACCELERATION, float(a))

    @property
    def acceleration(self) -> float:
        """Proper acceleration, 0 for inertial motion."""
        return self.proper_acceleration or 0.0


def unruh_temperature(a: float, k: PhysicalConstants = CONSTANTS) -> float:
    """Unruh temperature hbar*a / (2*pi*c*k_B) in kelvin."""
    if a < 0:
        raise DomainError(f"acceleration must be >= 0, got {a!r}")
    return k.hbar * a / (2.0 * math.pi * k.c * k.k_B)


def cycle_period(omega_field: float) -> float:
    """Proper time for the field phase to sweep one 2*pi loop."""
    if not omega_field > 0:
        raise DomainError(f"omega_field must be > 0, got {omega_field!r}")
    return 2.0 * math.pi / omega_field


def speed_after_proper_time(a: float, tau: float, k: PhysicalConstants = CONSTANTS) -> float:
    """Speed, as a fraction of c, of a hyperbolic worldline after proper time tau.

    Starts from rest; v/c = tanh(a*tau/c).
    """
    if a < 0:
        raise DomainError(f"acceleration must be >= 0, got {a!r}")
    if tau < 0:
        raise DomainError(f"proper time must be >= 0, got {tau!r}")
    return math.tanh(a * tau / k.c)
