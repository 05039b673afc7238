"""Closed-form Berry phases for inertial and uniformly accelerated detectors.

Phase functions return :class:`mpmath.mpf`.  Near resonance the accelerated
correction is many orders of magnitude below the inertial phase, so the
difference ``gamma_I - gamma_a`` is carried exactly (``mp.fsub(..., exact=True)``)
rather than rounded to double precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import mpmath as mp

from .core import CONSTANTS, DetectorConfig, PhysicalConstants, Trajectory, cycle_period
from .diagonalizer import WORKING_DPS, NormalModeDecomposition, fit_decomposition
from .errors import DomainError, UnreachableTargetError

# ratios within this relative distance of an integer count as that integer
_CEIL_SLACK = 1e-12


def _mpf(x):
    # mp.mpf() would round an exactly-carried difference back to WORKING_DPS
    return x if isinstance(x, mp.mpf) else mp.mpf(x)


class QConvention(str, enum.Enum):
    ARCTAN = "arctan"
    ARCTANH = "arctanh"


def principal(angle):
    """Reduce an angle to (-pi, pi]; values already inside are returned untouched."""
    with mp.workdps(WORKING_DPS):
        angle = mp.mpf(angle)
        if -mp.pi < angle <= mp.pi:
            return angle
        r = angle - 2 * mp.pi * mp.floor(angle / (2 * mp.pi))
        return r - 2 * mp.pi if r > mp.pi else r


def _check_constraint(d: NormalModeDecomposition):
    if not d.constraint_satisfied:
        raise DomainError(
            "closed form requires omega_a/omega_b > exp(2v) "
            f"(C = {float(d.C):.6g}, v = {float(d.v):.6g})"
        )


def _shifts(d: NormalModeDecomposition):
    c = d.C
    return d.omega_a_dressed, d.omega_b_dressed, d.v, c - d.v


def gamma_inertial(d: NormalModeDecomposition):
    """Berry phase of ``U^dag|0 0>`` for one loop of the field phase.

    The ``sin(v)**2`` factor is kept exactly as the closed form is usually
    printed; ``sinh(v)**2`` would equal ``2 pi <a^dag a>`` identically, and the
    two differ at relative order ``v**2``.
    """
    if d.v == 0:
        return mp.mpf(0)
    _check_constraint(d)
    with mp.workdps(WORKING_DPS):
        wa, wb, v, cv = _shifts(d)
        num = wa * mp.sin(v) ** 2 * mp.sinh(2 * cv) + wb * mp.sinh(2 * v) * mp.sinh(cv) ** 2
        den = wa * mp.sinh(2 * cv) + wb * mp.sinh(2 * v)
        return principal(2 * mp.pi * num / den)


def g_factor(d: NormalModeDecomposition):
    """Phase gained per dressed field quantum, in units of 2 pi."""
    if d.v == 0:
        return mp.mpf(0)
    _check_constraint(d)
    with mp.workdps(WORKING_DPS):
        wa, wb, v, cv = _shifts(d)
        return wb * mp.sinh(2 * v) * mp.cosh(2 * cv) / (wa * mp.sinh(2 * cv) + wb * mp.sinh(2 * v))


def squeezing_q(
    omega_field: float,
    a: float,
    k: PhysicalConstants = CONSTANTS,
    convention: QConvention | str = QConvention.ARCTAN,
):
    """Unruh squeezing parameter for field frequency ``omega_field`` and acceleration ``a``.

    ``arctan(exp(-pi Omega c / a))`` by default; ``arctanh`` gives the
    two-mode-squeezing convention ``tanh q = exp(-pi Omega c / a)``.
    """
    convention = QConvention(convention)
    if not omega_field > 0:
        raise DomainError("omega_field must be > 0")
    if a < 0:
        raise DomainError("acceleration must be >= 0")
    with mp.workdps(WORKING_DPS):
        if a == 0:
            return mp.mpf(0)
        x = mp.exp(-mp.pi * mp.mpf(omega_field) * mp.mpf(k.c) / mp.mpf(a))
        return mp.atan(x) if convention is QConvention.ARCTAN else mp.atanh(x)


def accelerated_shift(q, g):
    """``Arg(cosh^2 q - e^{2 pi i G} sinh^2 q)`` evaluated without cancellation.

    Written as ``Arg(1 + sinh^2 q (1 - e^{2 pi i G}))`` so that tiny ``q`` and
    ``G`` close to an integer keep full relative precision.
    """
    if q < 0:
        raise DomainError("q must be >= 0")
    with mp.workdps(WORKING_DPS):
        sh2 = mp.sinh(mp.mpf(q)) ** 2
        theta = 2 * mp.pi * mp.mpf(g)
        # 1 - cos(theta) = 2 sin^2(theta/2)
        return mp.atan2(-sh2 * mp.sin(theta), 1 + 2 * sh2 * mp.sin(theta / 2) ** 2)


def gamma_accelerated(gamma_i, q, g):
    """Mixed-state Berry phase of the accelerated detector."""
    shift = accelerated_shift(q, g)
    with mp.workdps(WORKING_DPS):
        result = mp.fsub(_mpf(gamma_i), shift, exact=True)
        if -mp.pi < result <= mp.pi:
            return result
        return principal(result)


def delta_per_cycle(gamma_i, gamma_a):
    """Inertial minus accelerated phase per loop, principal branch."""
    with mp.workdps(WORKING_DPS):
        diff = mp.fsub(_mpf(gamma_i), _mpf(gamma_a), exact=True)
        if -mp.pi < diff <= mp.pi:
            return diff
        return principal(diff)


def visibility(q):
    """Fringe visibility ``1/cosh(q)``."""
    if q < 0:
        raise DomainError("q must be >= 0")
    with mp.workdps(WORKING_DPS):
        return mp.sech(mp.mpf(q))


def cycles_to_target(delta, target=math.pi) -> int:
    """Number of loops for an unwrapped phase difference to reach ``target``.

    Pass ``abs(delta)``: the phase accumulates with the same sign for either
    sign of the acceleration.
    """
    if delta == 0:
        raise UnreachableTargetError("zero phase difference per cycle never reaches the target")
    if delta < 0:
        raise DomainError("delta must be > 0; pass abs(delta)")
    if not target > 0:
        raise DomainError("target must be > 0")
    with mp.workdps(WORKING_DPS):
        ratio = mp.mpf(target) / mp.mpf(delta)
        return max(1, int(mp.ceil(ratio * (1 - mp.mpf(_CEIL_SLACK)))))


def time_to_target(cycles: int, omega_field: float) -> float:
    """Proper time needed for ``cycles`` loops."""
    if cycles < 1:
        raise DomainError("cycles must be >= 1")
    return cycles * cycle_period(omega_field)


def accumulated_phase(delta, cycles: int):
    """Unwrapped phase difference after ``cycles`` loops."""
    with mp.workdps(WORKING_DPS):
        return cycles * abs(mp.mpf(delta))


@dataclass(frozen=True)
class PhaseResult:
    q: float
    G: float
    gamma_inertial: float
    gamma_accelerated: float
    delta_per_cycle: float
    visibility: float
    q_convention: str = QConvention.ARCTAN.value

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(
    config: DetectorConfig,
    trajectory: Trajectory,
    decomposition: NormalModeDecomposition | None = None,
    convention: QConvention | str = QConvention.ARCTAN,
    k: PhysicalConstants = CONSTANTS,
) -> PhaseResult:
    """All closed-form quantities for one detector and one trajectory.

    An inertial trajectory has ``q = 0`` and therefore ``delta = 0``.
    """
    config.require_weak_coupling()
    d = decomposition if decomposition is not None else fit_decomposition(config)
    gi = gamma_inertial(d)
    g = g_factor(d)
    q = squeezing_q(config.omega_field, trajectory.acceleration, k, convention)
    ga = gamma_accelerated(gi, q, g)
    return PhaseResult(
        q=float(q),
        G=float(g),
        gamma_inertial=float(gi),
        gamma_accelerated=float(ga),
        delta_per_cycle=float(delta_per_cycle(gi, ga)),
        visibility=float(visibility(q)),
        q_convention=QConvention(convention).value,
    )
