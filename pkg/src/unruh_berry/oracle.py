"""Truncated Fock-space oracle for the Berry phases.

Builds the detector-field Hamiltonian as a dense Hermitian matrix on
``|n_field, m_detector>`` (row-major in ``n``), follows eigenvectors around
the loop of the field phase by maximal overlap, and evaluates Berry phases as
gauge-invariant products of overlaps.  Nothing here uses the normal-mode
decomposition; the two routes meet only in the cross-checks.

The Hamiltonian conserves the parity of ``n + m``; eigensolves run on the
two parity blocks separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import DetectorConfig
from .errors import (
    ConvergenceError,
    DegenerateBranchError,
    GridTooCoarseError,
    SingularLoopError,
    TruncationError,
    UndefinedPhaseError,
    ValidationError,
)

MAX_TRUNCATION_MASS = 1e-12


@dataclass(frozen=True)
class FockOracleConfig:
    """Discretisation of the oracle.

    ``gap_tolerance`` is relative to ``omega_field``; a tracked branch closer
    than that to a neighbour of the same parity aborts.
    """

    cutoff: int = 16
    grid_points: int = 256
    thermal_levels: int = 12
    tolerance: float = 1e-8
    gap_tolerance: float = 1e-10
    min_overlap: float = 0.5

    def __post_init__(self):
        if self.cutoff < 4:
            raise ValidationError("cutoff must be >= 4", key="cutoff")
        if self.grid_points < 16 or self.grid_points % 2:
            raise ValidationError("grid_points must be even and >= 16", key="grid_points")
        if self.thermal_levels < 1:
            raise ValidationError("thermal_levels must be >= 1", key="thermal_levels")
        if self.thermal_levels >= self.cutoff:
            raise ValidationError("thermal_levels must be below cutoff", key="thermal_levels")
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be > 0", key="tolerance")

    def doubled(self, cutoff: bool = False, grid: bool = False) -> "FockOracleConfig":
        return FockOracleConfig(
            cutoff=self.cutoff * (2 if cutoff else 1),
            grid_points=self.grid_points * (2 if grid else 1),
            thermal_levels=self.thermal_levels,
            tolerance=self.tolerance,
            gap_tolerance=self.gap_tolerance,
            min_overlap=self.min_overlap,
        )


@dataclass(frozen=True)
class ThermalWeights:
    probabilities: np.ndarray
    truncation_mass: float


def phi_grid(grid_points: int) -> np.ndarray:
    """``grid_points + 1`` samples of [0, 2 pi], both ends included."""
    return np.linspace(0.0, 2.0 * math.pi, grid_points + 1)


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, cutoff + 1)), 1)


class FockModel:
    """Hamiltonian pieces ``H(phi) = H0 + e^{i phi} X + e^{-i phi} X^dag``."""

    def __init__(self, config: DetectorConfig, cutoff: int):
        self.config = config
        self.cutoff = cutoff
        dim = cutoff + 1
        ann = annihilation(cutoff)
        eye = np.eye(dim)
        a = np.kron(ann, eye)
        b = np.kron(eye, ann)
        n, m = np.divmod(np.arange(dim * dim), dim)
        self.n_field = n
        self.h0 = np.diag(config.omega_field * n + config.omega_detector * m).astype(complex)
        self.x = config.coupling * (b + b.T) @ a.T
        parity = (n + m) % 2
        self.blocks = [np.flatnonzero(parity == 0), np.flatnonzero(parity == 1)]

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** 2

    def hamiltonian(self, phi: float) -> np.ndarray:
        e = np.exp(1j * phi)
        xe = e * self.x
        return self.h0 + xe + xe.conj().T

    def block_eigh(self, phi: float, block: int, count: int | None = None):
        """Lowest ``count`` eigenpairs of one parity block, vectors embedded in the full space."""
        idx = self.blocks[block]
        h = self.hamiltonian(phi)[np.ix_(idx, idx)]
        if count is None or count >= len(idx):
            w, v = np.linalg.eigh(h)
        else:
            w, v = scipy.linalg.eigh(h, subset_by_index=[0, count - 1])
        full = np.zeros((self.dim, v.shape[1]), dtype=complex)
        full[idx] = v
        return w, full


def build_fock_hamiltonian(config: DetectorConfig, phi: float, cutoff: int) -> np.ndarray:
    """Dense Hermitian matrix of the Hamiltonian in the truncated number basis."""
    if cutoff < 1:
        raise ValidationError("cutoff must be >= 1", key="cutoff")
    return FockModel(config, cutoff).hamiltonian(phi)


def _seed_gauge(vec: np.ndarray) -> np.ndarray:
    k = np.argmax(np.abs(vec))
    return vec * (abs(vec[k]) / vec[k])


def _locate(model: FockModel, branch_index: int, phi0: float):
    """Parity block and in-block position of the ``branch_index``-th level at ``phi0``."""
    levels = []
    for block in (0, 1):
        w, _ = model.block_eigh(phi0, block, branch_index + 1)
        levels += [(e, block, pos) for pos, e in enumerate(w)]
    levels.sort()
    _, block, pos = levels[branch_index]
    return block, pos


def track_branches(
    model: FockModel,
    branches: list[tuple[int, int]],
    phis: np.ndarray,
    gap_tolerance: float = 1e-10,
    min_overlap: float = 0.5,
) -> dict[tuple[int, int], np.ndarray]:
    """Follow eigenvectors ``(block, position at phis[0])`` along ``phis``.

    Returns, per branch, an array of shape ``(len(phis), dim)``.  Each vector
    is the eigenvector of maximal overlap with its predecessor (which must be
    the same level, since the spectrum is phi-independent), phased so
    that this overlap is real and positive; the first vector has its
    largest amplitude real and positive.
    """
    counts = {}
    for block, pos in branches:
        counts[block] = max(counts.get(block, 0), pos + 2)
    gap_floor = gap_tolerance * model.config.omega_field
    out = {br: np.empty((len(phis), model.dim), dtype=complex) for br in branches}
    prev = {}
    for k, phi in enumerate(phis):
        for block, count in counts.items():
            w, v = model.block_eigh(phi, block, count)
            for br in branches:
                if br[0] != block:
                    continue
                if k == 0:
                    j = br[1]
                    vec = _seed_gauge(v[:, j])
                else:
                    ov = v.conj().T @ prev[br]
                    j = int(np.argmax(np.abs(ov)))
                    if abs(ov[j]) < min_overlap:
                        raise GridTooCoarseError(
                            f"overlap {abs(ov[j]):.3f} between adjacent samples at phi={phi:.4f}"
                        )
                    if j != br[1]:
                        # the spectrum does not depend on phi, so a new level index is a branch swap
                        raise GridTooCoarseError(
                            f"branch {br} jumped to level {j} at phi={phi:.4f}; refine the grid"
                        )
                    vec = v[:, j] * (ov[j] / abs(ov[j]))
                neighbours = [abs(w[j] - w[i]) for i in (j - 1, j + 1) if 0 <= i < len(w)]
                if neighbours and min(neighbours) < gap_floor:
                    raise DegenerateBranchError(
                        f"gap {min(neighbours):.3e} below {gap_floor:.3e} at phi={phi:.4f}"
                    )
                out[br][k] = vec
                prev[br] = vec
    return out


def adiabatic_branch(
    config: DetectorConfig,
    branch_index: int,
    phis: np.ndarray,
    cutoff: int = 16,
    gap_tolerance: float = 1e-10,
    min_overlap: float = 0.5,
) -> list[np.ndarray]:
    """Eigenvectors of the ``branch_index``-th level (0 = ground) along ``phis``."""
    model = FockModel(config, cutoff)
    br = _locate(model, branch_index, float(phis[0]))
    states = track_branches(model, [br], phis, gap_tolerance, min_overlap)[br]
    return list(states)


def _step_phases(states) -> np.ndarray:
    states = np.asarray(states)
    ov = np.einsum("ij,ij->i", states.conj(), np.roll(states, -1, axis=0))
    if np.min(np.abs(ov)) < 1e-12:
        raise SingularLoopError("vanishing overlap in the loop")
    return np.angle(ov)


def _wrap(x: float) -> float:
    r = math.remainder(x, 2.0 * math.pi)
    return math.pi if r == -math.pi else r


def wilson_loop_phase(states, unwrapped: bool = False, extrapolate: bool = False) -> float:
    """``-Arg prod_k <psi_k|psi_{k+1}>`` over the closed loop ``psi_0 ... psi_last, psi_0``.

    ``unwrapped`` returns minus the sum of the individual overlap arguments
    instead of reducing the total to (-pi, pi].

    ``extrapolate`` combines the loop with its every-other-sample sub-loop,
    ``(4 W_K - W_{K/2}) / 3``, cancelling the leading ``O(K^-2)`` discretisation
    error for a uniform grid.  The sub-loop needs ``states[::2]`` to end on the
    last state, i.e. an odd number of states.
    """
    states = np.asarray(states)
    total = -float(np.sum(_step_phases(states)))
    if extrapolate:
        if len(states) % 2 == 0:
            raise ValueError("extrapolation needs an odd number of loop states")
        coarse = -float(np.sum(_step_phases(states[::2])))
        # in an arbitrary gauge the sums agree only modulo 2 pi
        coarse = total + _wrap(coarse - total)
        total = (4.0 * total - coarse) / 3.0
    return total if unwrapped else _wrap(total)


def thermal_weights(q: float, n_max: int, max_truncation: float = MAX_TRUNCATION_MASS) -> ThermalWeights:
    """Occupation probabilities ``tanh^{2n} q / cosh^2 q`` of the Unruh state, ``n <= n_max``."""
    if q < 0:
        raise ValidationError("q must be >= 0", key="q")
    q = float(q)
    t2 = math.tanh(q) ** 2
    n = np.arange(n_max + 1)
    probs = t2**n / math.cosh(q) ** 2
    mass = t2 ** (n_max + 1)
    if mass > max_truncation:
        raise TruncationError(f"truncation mass {mass:.3e} exceeds {max_truncation:.1e}; raise n_max")
    return ThermalWeights(probs, mass)


def mixed_state_phase(branch_phases, weights: ThermalWeights) -> float:
    """Interferometric mixed-state phase ``Arg sum_n p_n e^{i gamma_n}``."""
    gam = np.asarray(branch_phases, dtype=float)
    p = weights.probabilities
    if len(gam) != len(p):
        raise ValueError(f"{len(gam)} phases for {len(p)} weights")
    z = np.sum(p * np.exp(1j * gam))
    if abs(z) < 1e-14:
        raise UndefinedPhaseError("weighted phase sum vanishes")
    return float(np.angle(z))


def ground_fidelity(config: DetectorConfig, cutoff: int = 16) -> float:
    """``|<0 0|psi_ground(phi = 0)>|^2``."""
    model = FockModel(config, cutoff)
    _, v = model.block_eigh(0.0, 0, 1)
    return float(abs(v[0, 0]) ** 2)


def field_branches(model: FockModel, n_max: int, phi0: float = 0.0) -> list[tuple[int, int]]:
    """``(block, position)`` of the levels adiabatically connected to ``|n, 0>``, n = 0..n_max.

    The dressed field mode is the lowest excitation with the larger weight on
    ``|1, 0>`` (the higher one on a tie, as at resonance); level ``n`` is the
    one nearest ``E_0 + n * omega_field_dressed`` in parity block ``n % 2``.
    """
    spectra = [model.block_eigh(phi0, block) for block in (0, 1)]
    e0 = spectra[0][0][0]
    w1, v1 = spectra[1]
    dim = model.cutoff + 1
    weights = np.abs(v1[dim, :2]) ** 2  # amplitude on |1, 0>
    if abs(weights[0] - weights[1]) <= 1e-6:
        omega = w1[1] - e0
    else:
        omega = w1[int(np.argmax(weights))] - e0
    found = []
    for n in range(n_max + 1):
        w = spectra[n % 2][0]
        dist = np.abs(w - (e0 + n * omega))
        order = np.argsort(dist)
        if len(order) > 1 and dist[order[0]] * 4 > dist[order[1]]:
            raise DegenerateBranchError(f"cannot single out the level of |{n}, 0>")
        found.append((n % 2, int(order[0])))
    return found


def reference_gauge(states: np.ndarray, index: int) -> np.ndarray:
    """Rephase every state so its amplitude on basis vector ``index`` is real positive.

    Gives a single-valued gauge in which the summed overlap arguments of a
    loop are the unwrapped Berry phase.
    """
    ref = states[:, index]
    if np.min(np.abs(ref)) < 1e-300:
        raise SingularLoopError(f"reference amplitude {index} vanishes on the loop")
    return states * (np.abs(ref) / ref)[:, None]


def branch_berry_phases(config: DetectorConfig, oracle: FockOracleConfig, n_max: int | None = None) -> np.ndarray:
    """Unwrapped Berry phases of the levels connected to ``|n, 0>``, n = 0..n_max.

    The loop runs in the physical direction: ``phi = k x - Omega_a t``
    decreases with time, so the tracked loop is traversed from 2 pi down to 0.
    Phases are unwrapped in the gauge fixed by each branch's largest
    field-vacuum amplitude ``|0, m>``.
    """
    n_max = oracle.thermal_levels if n_max is None else n_max
    if config.coupling == 0:
        # H does not depend on phi: every eigenvector loop is constant
        return np.zeros(n_max + 1)
    model = FockModel(config, oracle.cutoff)
    brs = field_branches(model, n_max)
    phis = phi_grid(oracle.grid_points)[::-1]
    tracked = track_branches(model, brs, phis, oracle.gap_tolerance, oracle.min_overlap)
    dim = oracle.cutoff + 1
    phases = []
    for br in brs:
        states = tracked[br]
        ref = int(np.argmax(np.abs(states[0, :dim])))  # n_field = 0 row of the basis
        phases.append(wilson_loop_phase(reference_gauge(states, ref), unwrapped=True, extrapolate=True))
    return np.array(phases)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    max_residual: float


def branch_phase_linearity(config: DetectorConfig, n_range, oracle: FockOracleConfig | None = None) -> LinearFit:
    """Least-squares line through the unwrapped branch phases ``gamma_n`` against ``n``."""
    oracle = oracle or FockOracleConfig()
    ns = np.asarray(list(n_range))
    phases = branch_berry_phases(config, oracle, int(ns.max()))[ns]
    slope, intercept = np.polyfit(ns, phases, 1)
    resid = phases - (slope * ns + intercept)
    return LinearFit(float(slope), float(intercept), float(np.max(np.abs(resid))))


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Largest phase change under ``cutoff -> 2 cutoff`` and ``grid -> 2 grid``."""

    cutoff_change: float
    grid_change: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.cutoff_change, self.grid_change) < self.tolerance

    def as_dict(self) -> dict:
        return {
            "cutoff_change": self.cutoff_change,
            "grid_change": self.grid_change,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class OracleResult:
    """Oracle Berry phases: ground (inertial) and thermal mixtures (accelerated)."""

    gamma_inertial: float
    branch_phases: np.ndarray
    gamma_accelerated: list[float]
    certificate: ConvergenceCertificate | None = None
    settings: dict = field(default_factory=dict)

    def require_converged(self):
        if self.certificate is not None and not self.certificate.passed:
            raise ConvergenceError(
                f"oracle not converged: cutoff change {self.certificate.cutoff_change:.3e}, "
                f"grid change {self.certificate.grid_change:.3e}, tolerance {self.certificate.tolerance:.1e}"
            )


def _phases_once(config, oracle, qs):
    branches = branch_berry_phases(config, oracle)
    gi = _wrap(branches[0])
    mixed = [mixed_state_phase(branches, thermal_weights(q, oracle.thermal_levels)) for q in qs]
    return gi, branches, mixed


def oracle_phases(
    config: DetectorConfig,
    oracle: FockOracleConfig | None = None,
    qs=(),
    certify: bool = True,
) -> OracleResult:
    """Inertial phase and mixed-state phases for each squeezing parameter in ``qs``.

    With ``certify`` the run is repeated at doubled cutoff and doubled grid,
    and the largest change of any reported phase is recorded.
    """
    oracle = oracle or FockOracleConfig()
    qs = [float(q) for q in qs]
    gi, branches, mixed = _phases_once(config, oracle, qs)
    cert = None
    if certify:
        changes = []
        for dbl in (oracle.doubled(cutoff=True), oracle.doubled(grid=True)):
            gi2, _, mixed2 = _phases_once(config, dbl, qs)
            diffs = [abs(_wrap(gi2 - gi))] + [abs(_wrap(a - b)) for a, b in zip(mixed2, mixed)]
            changes.append(max(diffs))
        cert = ConvergenceCertificate(changes[0], changes[1], oracle.tolerance)
    settings = {
        "cutoff": oracle.cutoff,
        "grid_points": oracle.grid_points,
        "thermal_levels": oracle.thermal_levels,
        "tolerance": oracle.tolerance,
    }
    return OracleResult(gi, branches, mixed, cert, settings)
