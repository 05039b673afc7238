"""Quadrature form of the detector-field Hamiltonian and its normal-mode decomposition.

Conventions (fixed package-wide):

* quadratures ``x = (a + a^dag)/sqrt(2)``, ``p = -i (a - a^dag)/sqrt(2)``,
  ordered ``(x_a, p_a, x_b, p_b)``;
* ``H = 1/2 X^T M X + constant_offset`` with ``M`` real symmetric;
* every unitary ``V`` acts on the quadrature vector as
  ``V^dag X V = S_V X``, so the product ``U = S_a S_b D_ab Shat_b R_a``
  has ``S_U = S_{S_a} S_{S_b} S_{D_ab} S_{Shat_b} S_{R_a}`` and
  ``U^dag H0(w_a, w_b) U`` has quadrature matrix ``S_U^T diag(w) S_U``.

With these conventions the ground state ``U^dag |0 0>`` carries
``<a^dag a> = gamma_I / 2 pi`` and each dressed field quantum adds ``G`` to
``<a^dag a>``.

The operator called a "two-mode displacement" ``D_ab = exp[s(a^dag b - a b^dag)]``
is, functionally, a beam splitter; it mixes the modes by the angle ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
import scipy.linalg

from .core import DetectorConfig
from .errors import DecompositionError, InstabilityError

#: Decimal digits carried by the decomposition and the closed-form phases.
WORKING_DPS = 50

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 200

_J1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
SYMPLECTIC_FORM = scipy.linalg.block_diag(_J1, _J1)


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``H = 1/2 X^T matrix X + constant_offset`` in units with hbar = 1."""

    matrix: np.ndarray
    phase_angle: float
    constant_offset: float

    def is_positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.matrix)
        except np.linalg.LinAlgError:
            return False
        return True


@dataclass(frozen=True)
class NormalModeDecomposition:
    """Dressed frequencies and the parameters of ``U = S_a S_b D_ab Shat_b R_a``.

    Parameters are :class:`mpmath.mpf` values carried at ``WORKING_DPS``
    digits; the closed-form phases need ``G - 1/2`` which, near resonance
    and at weak coupling, sits far below double precision.
    """

    config: DetectorConfig
    omega_a_dressed: mp.mpf
    omega_b_dressed: mp.mpf
    u: mp.mpf
    v: mp.mpf
    s: mp.mpf
    p: mp.mpf
    residual: float
    iterations: int = 0

    @property
    def C(self) -> mp.mpf:
        with mp.workdps(WORKING_DPS):
            return mp.log(self.omega_a_dressed / self.omega_b_dressed) / 2

    @property
    def constraint_satisfied(self) -> bool:
        """Whether ``omega_a/omega_b > exp(2 v)``, i.e. ``C > v``."""
        with mp.workdps(WORKING_DPS):
            return bool(self.C > self.v)

    def as_floats(self) -> dict:
        return {
            "omega_a_dressed": float(self.omega_a_dressed),
            "omega_b_dressed": float(self.omega_b_dressed),
            "u": float(self.u),
            "v": float(self.v),
            "s": float(self.s),
            "p": float(self.p),
            "C": float(self.C),
            "residual": self.residual,
            "constraint_satisfied": self.constraint_satisfied,
        }


def build_quadratic_form(config: DetectorConfig, phi: float) -> QuadraticHamiltonian:
    """Quadrature matrix of ``W_a a^dag a + W_b b^dag b + lam (b + b^dag)(a^dag e^{i phi} + a e^{-i phi})``.

    The coupling expands to ``2 lam x_b (x_a cos phi + p_a sin phi)``.
    """
    wa, wb, lam = config.omega_field, config.omega_detector, config.coupling
    m = np.diag([wa, wa, wb, wb]).astype(float)
    c, s = 2.0 * lam * math.cos(phi), 2.0 * lam * math.sin(phi)
    m[0, 2] = m[2, 0] = c
    m[1, 2] = m[2, 1] = s
    return QuadraticHamiltonian(
        matrix=m,
        phase_angle=float(phi) % (2.0 * math.pi),
        constant_offset=-(wa + wb) / 2.0,
    )


def symplectic_spectrum(h: QuadraticHamiltonian) -> tuple[float, float]:
    """Normal-mode frequencies ``(omega_plus, omega_minus)`` of a positive form.

    They are the moduli of the (purely imaginary) eigenvalues of ``J M``.
    """
    if not h.is_positive_definite():
        raise InstabilityError("quadratic form is not positive definite")
    ev = np.linalg.eigvals(SYMPLECTIC_FORM @ h.matrix)
    freqs = np.sort(np.abs(ev.imag))[::-1]
    # eigenvalues come in +-i*omega pairs
    return float(freqs[0]), float(freqs[2])


# --- symplectic representation of the operator product -----------------------


def _mode_mixer(u, v, s, p):
    """2x2 matrix ``A`` with ``x -> A x`` for ``S_a S_b D_ab Shat_b``."""
    return (
        mp.diag([mp.exp(u), mp.exp(-v)])
        * mp.matrix([[mp.cos(s), mp.sin(s)], [-mp.sin(s), mp.cos(s)]])
        * mp.diag([1, mp.exp(2 * p)])
    )


def decomposition_symplectic(d: NormalModeDecomposition, phi: float = 0.0) -> np.ndarray:
    """4x4 symplectic matrix ``S_U`` of ``U(phi)`` in the quadrature ordering."""
    with mp.workdps(WORKING_DPS):
        a = _mode_mixer(d.u, d.v, d.s, d.p)
        a_inv_t = (a**-1).T
        a = np.array(a.tolist(), dtype=float)
        a_inv_t = np.array(a_inv_t.tolist(), dtype=float)
    s = np.zeros((4, 4))
    xs, ps = [0, 2], [1, 3]
    s[np.ix_(xs, xs)] = a
    s[np.ix_(ps, ps)] = a_inv_t
    rot = np.eye(4)
    c, sn = math.cos(phi), math.sin(phi)
    rot[:2, :2] = [[c, sn], [-sn, c]]
    return s @ rot


def reconstruct_residual(d: NormalModeDecomposition, h: QuadraticHamiltonian) -> float:
    """Relative Frobenius error between ``S_U^T diag(w) S_U`` and ``h.matrix``."""
    s = decomposition_symplectic(d, h.phase_angle)
    w = np.diag(
        [float(d.omega_a_dressed)] * 2 + [float(d.omega_b_dressed)] * 2
    )
    recon = s.T @ w @ s
    return float(np.linalg.norm(recon - h.matrix) / np.linalg.norm(h.matrix))


def _equations(x, kx, kp):
    u, v, s, p, wa, wb = x
    a = _mode_mixer(u, v, s, p)
    w = mp.diag([wa, wb])
    ai = a**-1
    rx = a.T * w * a - kx
    rp = ai * w * ai.T - kp
    return [rx[0, 0], rx[0, 1], rx[1, 1], rp[0, 0], rp[0, 1], rp[1, 1]]


def _perturbative_seed(config: DetectorConfig):
    """Rotating-wave (first order in lambda) normal modes, in units of omega_field."""
    wa = mp.mpf(1)
    wb = mp.mpf(config.omega_detector) / config.omega_field
    lam = mp.mpf(config.coupling) / config.omega_field
    detuning = (wa - wb) / 2
    split = mp.sqrt(detuning**2 + lam**2)
    mean = (wa + wb) / 2
    if detuning >= 0:
        da, db = mean + split, mean - split
    else:
        da, db = mean - split, mean + split
    s = mp.pi / 4 if detuning == 0 else mp.atan(lam / detuning) / 2
    return [mp.log(da / wa) / 2, mp.log(wa / db) / 2, s, mp.log(wa / wb) / 4, da, db]


def fit_decomposition(
    config: DetectorConfig,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> NormalModeDecomposition:
    """Solve for ``(u, v, s, p, w_a, w_b)`` reproducing the phi = 0 quadratic form.

    Damped Newton iteration at ``WORKING_DPS`` digits on the six independent
    entries of ``A^T W A = K_x`` and ``A^-1 W A^-T = K_p``, started from the
    rotating-wave normal modes.  The field-like mode keeps the label ``a``
    (continuity from zero coupling); at exact resonance the higher frequency
    is labelled ``a``.
    """
    h0 = build_quadratic_form(config, 0.0)
    if config.coupling == 0:
        zero = mp.mpf(0)
        d = NormalModeDecomposition(
            config, mp.mpf(config.omega_field), mp.mpf(config.omega_detector),
            zero, zero, zero, zero, residual=0.0,
        )
        return d

    with mp.workdps(WORKING_DPS):
        scale = mp.mpf(config.omega_field)
        wb = mp.mpf(config.omega_detector) / scale
        lam = mp.mpf(config.coupling) / scale
        kx = mp.matrix([[1, 2 * lam], [2 * lam, wb]])
        kp = mp.diag([1, wb])
        x = mp.matrix(_perturbative_seed(config))
        target = mp.mpf(10) ** (-(WORKING_DPS - 8))
        step = mp.mpf(10) ** (-(WORKING_DPS // 2))

        def norm(vec):
            return mp.sqrt(sum(e**2 for e in vec))

        f = mp.matrix(_equations(x, kx, kp))
        fnorm = norm(f)
        iterations = 0
        while fnorm > target and iterations < max_iterations:
            iterations += 1
            jac = mp.matrix(6, 6)
            for j in range(6):
                xp, xm = x.copy(), x.copy()
                xp[j] += step
                xm[j] -= step
                col = (mp.matrix(_equations(xp, kx, kp)) - mp.matrix(_equations(xm, kx, kp))) / (2 * step)
                for i in range(6):
                    jac[i, j] = col[i]
            try:
                dx = mp.lu_solve(jac, -f)
            except ZeroDivisionError:
                break
            damping = mp.mpf(1)
            for _ in range(40):
                trial = x + damping * dx
                if trial[4] > 0 and trial[5] > 0:
                    ft = mp.matrix(_equations(trial, kx, kp))
                    if norm(ft) < fnorm:
                        break
                damping /= 2
            else:
                break
            x, f, fnorm = trial, ft, norm(ft)

        u, v, s, p, wa_d, wb_d = x
        d = NormalModeDecomposition(
            config, wa_d * scale, wb_d * scale, u, v, s, p,
            residual=0.0, iterations=iterations,
        )
    residual = reconstruct_residual(d, h0)
    if not residual <= tolerance:
        raise DecompositionError(
            f"decomposition did not converge: residual {residual:.3e} > {tolerance:.1e}",
            best_residual=residual,
        )
    return NormalModeDecomposition(
        config, d.omega_a_dressed, d.omega_b_dressed, d.u, d.v, d.s, d.p,
        residual=residual, iterations=iterations,
    )


def implied_config(v, omega_a_dressed, omega_b_dressed) -> DetectorConfig:
    """Detector configuration determined by ``(v, w_a, w_b)`` alone.

    ``Omega_a = w_b e^{2v}``; the trace and determinant of ``K_p^{1/2} K_x K_p^{1/2}``
    then fix ``Omega_b`` and ``lambda``.
    """
    with mp.workdps(WORKING_DPS):
        wa, wb = mp.mpf(omega_a_dressed), mp.mpf(omega_b_dressed)
        big_a = wb * mp.exp(2 * mp.mpf(v))
        big_b = mp.sqrt(wa**2 + wb**2 - big_a**2)
        lam = mp.sqrt((big_a**2 * big_b**2 - wa**2 * wb**2) / (4 * big_a * big_b))
        return DetectorConfig(float(big_a), float(big_b), float(lam))


def fock_ground_state(d: NormalModeDecomposition, cutoff: int, phi: float = 0.0) -> np.ndarray:
    """``U^dag |0 0>`` built from matrix exponentials in a truncated Fock space.

    Basis ordering ``|n_field, m_detector>`` row-major in ``n``.
    """
    dim = cutoff + 1
    ann = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    a = np.kron(ann, eye)
    b = np.kron(eye, ann)
    ad, bd = a.conj().T, b.conj().T
    u, v, s, p = (float(t) for t in (d.u, d.v, d.s, d.p))
    expm = scipy.linalg.expm
    s_a = expm(0.5 * u * (ad @ ad - a @ a))
    s_b = expm(0.5 * v * (b @ b - bd @ bd))
    d_ab = expm(s * (ad @ b - a @ bd))
    sh_b = expm(p * (bd @ bd - b @ b))
    r_a = expm(-1j * phi * (ad @ a))
    unitary = s_a @ s_b @ d_ab @ sh_b @ r_a
    vac = np.zeros(dim * dim, dtype=complex)
    vac[0] = 1.0
    return unitary.conj().T @ vac
