"""Acceptance suite: one PASS/FAIL line per criterion (shown in the terminal summary).

The oracle criteria (5, 6) take a few minutes on one core.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from unruh_berry.core import DetectorConfig, cycle_period, speed_after_proper_time
from unruh_berry.diagonalizer import fit_decomposition
from unruh_berry.oracle import (
    FockOracleConfig,
    branch_berry_phases,
    build_fock_hamiltonian,
    ground_fidelity,
    mixed_state_phase,
    thermal_weights,
    wilson_loop_phase,
)
from unruh_berry.phases import (
    accelerated_shift,
    cycles_to_target,
    delta_per_cycle,
    g_factor,
    gamma_accelerated,
    gamma_inertial,
    squeezing_q,
    time_to_target,
    visibility,
)
from unruh_berry.scenarios import load_scenarios, read_csv_rows, render_csv, run_crosscheck, run_sweep

GOLDEN = Path(__file__).parent / "fixtures" / "fig2_golden.csv"
ANCHOR_A = 4.5e17


@pytest.fixture(scope="module")
def fig2():
    return {s.id: s for s in load_scenarios("fig2")}


@pytest.fixture(scope="module")
def fig2_rows(fig2):
    return {sid: run_sweep(s) for sid, s in fig2.items()}


def _anchor_delta(fig2):
    sc = fig2["fig2-3"]
    d = fit_decomposition(sc.detector)
    gi = gamma_inertial(d)
    q = squeezing_q(sc.detector.omega_field, ANCHOR_A)
    return delta_per_cycle(gi, gamma_accelerated(gi, q, g_factor(d)))


def test_c01_cycle_timing(report):
    t = cycle_period(2.0e9)
    rel = abs(t - 3.14159e-9) / 3.14159e-9
    assert report("1 cycle timing", rel < 5e-3, f"T = {t:.6e} s, rel err {rel:.1e}")


def test_c02_planning_cycles(report, fig2):
    delta = _anchor_delta(fig2)
    cycles = cycles_to_target(abs(delta), math.pi)
    ok = 1e4 <= cycles <= 1e5
    assert report(
        "2 planning anchor: cycles to pi in [1e4, 1e5]",
        ok,
        f"|delta| = {float(abs(delta)):.3e} rad/cycle, cycles = {cycles:.3e}",
    )


def test_c02_planning_duration(report):
    t = time_to_target(30000, 2.0e9)
    rel = abs(t - 95e-6) / 95e-6
    assert report("2 planning anchor: 30000 cycles vs 95 us", rel < 0.02, f"t = {t * 1e6:.2f} us, rel {rel:.2%}")


def test_c03_kinematics(report):
    v = speed_after_proper_time(1e17, 5e-10)
    assert report("3 kinematics", 0.14 <= v <= 0.17, f"v/c = {v:.4f}")


def test_c04_trivial_limits(report):
    tol = 1e-12
    worst = 0.0
    accs = np.logspace(15, 19, 9)
    # a = 0
    for cfg in (DetectorConfig(2e9, 2e9, 250.0), DetectorConfig(1.3, 1.0, 1e-4)):
        d = fit_decomposition(cfg)
        gi = gamma_inertial(d)
        q = squeezing_q(cfg.omega_field, 0.0)
        worst = max(worst, abs(float(delta_per_cycle(gi, gamma_accelerated(gi, q, g_factor(d))))))
        worst = max(worst, abs(float(visibility(q)) - 1.0))
    # lambda = 0
    d = fit_decomposition(DetectorConfig(2e9, 2e9, 0.0))
    gi, g = gamma_inertial(d), g_factor(d)
    worst = max(worst, abs(float(gi)), abs(float(g)))
    for a in accs:
        q = squeezing_q(2e9, a)
        worst = max(worst, abs(float(delta_per_cycle(gi, gamma_accelerated(gi, q, g)))))
    # integer G
    for g_int in (0, 1, 2, -1):
        for q in np.linspace(0, math.pi / 4, 7):
            worst = max(worst, abs(float(gamma_accelerated(0.3, q, g_int)) - 0.3))
    assert report("4 trivial limits", worst < tol, f"max deviation {worst:.1e}")


@pytest.mark.slow
def test_c05_oracle_pure(report):
    worst = 0.0
    details = []
    for ratio in (1e-7, 1e-5, 1e-3):
        cfg = DetectorConfig(2e9, 2e9, ratio * 2e9)
        closed = float(gamma_inertial(fit_decomposition(cfg)))
        oracle = branch_berry_phases(cfg, FockOracleConfig(cutoff=16, grid_points=256), n_max=0)[0]
        rel = abs(oracle - closed) / max(abs(closed), 1e-12)
        worst = max(worst, rel)
        details.append(f"{ratio:g}:{rel:.1e}")
    assert report("5 oracle pure case", worst < 1e-4, "rel err " + " ".join(details))


@pytest.mark.slow
def test_c06_oracle_mixed(report, fig2):
    worst = 0.0
    certified = True
    for sc in fig2.values():
        rep = run_crosscheck(sc, FockOracleConfig())
        assert not rep.errors, rep.errors
        certified &= bool(rep.certificate["passed"])
        for s in rep.samples:
            worst = max(worst, abs(s.gamma_accelerated_closed - s.gamma_accelerated_oracle))
    assert report(
        "6 oracle mixed case",
        worst < 1e-6 and certified,
        f"max |gamma_a closed - oracle| = {worst:.1e} rad, certificates passed: {certified}",
    )


def test_c07_series_identity(report):
    worst = 0.0
    for q in np.linspace(0.0, math.pi / 4, 20):
        t2 = math.tanh(q) ** 2
        n_max = 0 if t2 == 0 else math.ceil(math.log(1e-13) / math.log(t2))
        w = thermal_weights(q, n_max)
        assert w.truncation_mass < 1e-12
        for g in np.arange(20) / 20:
            series = mixed_state_phase(2 * math.pi * g * np.arange(n_max + 1), w)
            closed = float(accelerated_shift(q, g))
            worst = max(worst, abs(math.remainder(series + closed, 2 * math.pi)))
    assert report("7 series identity", worst < 1e-10, f"max deviation {worst:.1e}")


def _spin_half_loop(theta, k, rng):
    states = []
    for phi in np.linspace(0, 2 * math.pi, k + 1):
        n = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
        h = -(n[0] * np.array([[0, 1], [1, 0]]) + n[1] * np.array([[0, -1j], [1j, 0]])
              + n[2] * np.array([[1, 0], [0, -1]]))
        _, vecs = np.linalg.eigh(h)
        states.append(vecs[:, 0] * np.exp(2j * math.pi * rng.random()))  # arbitrary gauge
    return np.array(states)


def test_c08_wilson_fixture(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for theta in (math.pi / 6, math.pi / 3, math.pi / 2):
        w = wilson_loop_phase(_spin_half_loop(theta, 1024, rng), extrapolate=True)
        exact = -math.pi * (1 - math.cos(theta))
        worst = max(worst, abs(math.remainder(w - exact, 2 * math.pi)))
    assert report("8 spin-1/2 Wilson loop", worst < 1e-6, f"max deviation {worst:.1e} at K = 1024")


def test_c09_phi_invariance(report):
    worst = 0.0
    for cfg in (DetectorConfig(2e9, 2e9, 250.0), DetectorConfig(1.0, 1.0, 1e-3), DetectorConfig(1.0, 1.4, 0.05)):
        e0 = np.linalg.eigvalsh(build_fock_hamiltonian(cfg, 0.0, 16))
        scale = np.maximum(np.abs(e0), cfg.omega_field)
        for phi in np.linspace(0, 2 * math.pi, 8, endpoint=False)[1:]:
            e = np.linalg.eigvalsh(build_fock_hamiltonian(cfg, phi, 16))
            worst = max(worst, float(np.max(np.abs(e - e0) / scale)))
    assert report("9 spectrum phi-invariance", worst < 1e-10, f"max rel change {worst:.1e}")


def test_c10_ground_fidelity(report):
    f = ground_fidelity(DetectorConfig(2e9, 2e9, 1e-7 * 2e9), cutoff=16)
    assert report("10 ground fidelity", f >= 1 - 1e-6, f"1 - F = {1 - f:.1e}")


def test_c11_fig2_shape(report, fig2, fig2_rows):
    increasing = all(
        all(b.delta_per_cycle > a.delta_per_cycle for a, b in zip(rows, rows[1:]))
        for rows in fig2_rows.values()
    )
    ids = sorted(fig2, key=lambda i: fig2[i].detector.coupling)
    ordered = all(
        fig2_rows[ids[0]][k].delta_per_cycle < fig2_rows[ids[1]][k].delta_per_cycle < fig2_rows[ids[2]][k].delta_per_cycle
        for k in range(len(fig2_rows[ids[0]]))
    )
    emitted = read_csv_rows(render_csv([r for sid in fig2 for r in fig2_rows[sid]]))
    golden = read_csv_rows(GOLDEN.read_text())
    worst = 0.0
    same_shape = len(emitted) == len(golden)
    for got, want in zip(emitted, golden):
        for key, value in want.items():
            if key == "scenario_id":
                same_shape &= got[key] == value
                continue
            x, y = float(got[key]), float(value)
            worst = max(worst, 0.0 if x == y else abs(x - y) / abs(y))
    ok = increasing and ordered and same_shape and worst <= 1e-9
    assert report(
        "11 fig2 shape and golden CSV",
        ok,
        f"increasing {increasing}, ordered by coupling {ordered}, golden rel dev {worst:.1e}",
    )


def test_c12_detectability(report, fig2):
    delta = abs(float(_anchor_delta(fig2)))
    assert report("12 detectability margin", delta >= 1e-5, f"|delta| = {delta:.3e} rad vs required 1e-5")
