import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unruh_berry.core import DetectorConfig, Trajectory
from unruh_berry.diagonalizer import NormalModeDecomposition, fit_decomposition, implied_config
from unruh_berry.errors import DomainError, UnreachableTargetError
from unruh_berry.phases import (
    QConvention,
    accelerated_shift,
    accumulated_phase,
    cycles_to_target,
    delta_per_cycle,
    evaluate,
    g_factor,
    gamma_accelerated,
    gamma_inertial,
    principal,
    squeezing_q,
    time_to_target,
    visibility,
)


def manual(v, wa, wb, cfg=None):
    cfg = cfg or implied_config(v, wa, wb)
    z = mp.mpf(0)
    return NormalModeDecomposition(cfg, mp.mpf(wa), mp.mpf(wb), z, mp.mpf(v), z, z, 0.0)


def test_gamma_inertial_and_g_examples():
    d = manual(0.1, 2.0, 1.0)
    assert float(gamma_inertial(d)) == pytest.approx(0.1163, abs=5e-5)
    assert float(g_factor(d)) == pytest.approx(0.1843, abs=5e-5)
    zero = fit_decomposition(DetectorConfig(1.0, 1.0, 0.0))
    assert gamma_inertial(zero) == 0 and g_factor(zero) == 0


def test_constraint_violation_is_reported():
    d = manual(0.5, 2.0, 1.0, DetectorConfig(1.0, 1.0, 0.1))  # C = ln(2)/2 < v
    with pytest.raises(DomainError, match="exp"):
        gamma_inertial(d)
    with pytest.raises(DomainError):
        g_factor(d)


def test_g_tends_to_one_at_constraint_boundary():
    c = math.log(2.0) / 2
    d = manual(c * (1 - 1e-9), 2.0, 1.0)
    assert float(g_factor(d)) == pytest.approx(1.0, rel=1e-6)


def test_g_equals_dressed_occupation_gain():
    # G is the phase per dressed field quantum, checked against the linear fit of the oracle
    from unruh_berry.oracle import FockOracleConfig, branch_phase_linearity

    cfg = DetectorConfig(1.0, 1.0, 1e-3)
    fit = branch_phase_linearity(cfg, range(5), FockOracleConfig(cutoff=12, grid_points=128, thermal_levels=6))
    assert fit.slope == pytest.approx(2 * math.pi * float(g_factor(fit_decomposition(cfg))), rel=1e-6)


def test_squeezing_q():
    assert squeezing_q(2e9, 0.0) == 0
    assert float(squeezing_q(2e9, 4.5e17)) == pytest.approx(0.0152, abs=5e-5)
    assert float(squeezing_q(1.0, 1e30)) == pytest.approx(math.pi / 4, rel=1e-12)
    assert float(squeezing_q(1.0, 1e30, convention="arctanh")) > 10
    with pytest.raises(DomainError):
        squeezing_q(2e9, -1.0)


def test_accelerated_examples():
    assert float(gamma_accelerated(0.2, 0.0, 0.37)) == pytest.approx(0.2)
    assert float(gamma_accelerated(0.2, 0.5, 3)) == pytest.approx(0.2, abs=1e-15)
    assert float(accelerated_shift(0.3, 0.25)) == pytest.approx(-0.0847, abs=5e-5)
    assert float(gamma_accelerated(0.0, 0.3, 0.25)) == pytest.approx(0.0847, abs=5e-5)


def test_shift_matches_direct_complex_argument():
    for q, g in [(0.01, 0.3), (0.3, 0.25), (0.7, 0.9), (1e-5, 0.5 + 1e-9)]:
        with mp.workdps(80):
            direct = mp.arg(mp.cosh(q) ** 2 - mp.exp(2j * mp.pi * g) * mp.sinh(q) ** 2)
        assert float(accelerated_shift(q, g)) == pytest.approx(float(direct), rel=1e-12, abs=1e-300)


def test_delta_small_q_expansion():
    # delta ~ -sin(2 pi G) q^2 at small q
    q, g = 1e-6, 0.3
    assert float(accelerated_shift(q, g)) == pytest.approx(-math.sin(2 * math.pi * g) * q**2, rel=1e-6)


def test_delta_limits():
    gi = gamma_inertial(fit_decomposition(DetectorConfig(2e9, 2e9, 250.0)))
    assert delta_per_cycle(gi, gi) == 0


def test_visibility():
    assert visibility(0) == 1
    assert float(visibility(0.0152)) == pytest.approx(0.99988, abs=5e-6)
    assert float(visibility(math.pi / 4)) == pytest.approx(0.7549, abs=5e-5)


def test_cycles_and_time():
    assert cycles_to_target(math.pi) == 1
    assert cycles_to_target(math.pi / 30000) == 30000
    assert cycles_to_target(1.05e-4) == 29920
    with pytest.raises(UnreachableTargetError):
        cycles_to_target(0.0)
    with pytest.raises(DomainError):
        cycles_to_target(-1e-3)
    assert time_to_target(1, 2e9) == pytest.approx(3.14e-9, rel=1e-3)
    assert time_to_target(30000, 2e9) == pytest.approx(95e-6, rel=0.02)
    with pytest.raises(DomainError):
        time_to_target(0, 2e9)
    assert float(accumulated_phase(1e-4, 30000)) == pytest.approx(3.0)


def test_principal():
    assert float(principal(3 * math.pi)) == pytest.approx(math.pi)
    assert float(principal(-4.0)) == pytest.approx(2 * math.pi - 4.0)
    assert float(principal(0.5)) == 0.5


def test_evaluate_inertial_and_accelerated():
    cfg = DetectorConfig(2e9, 2e9, 250.0)
    r0 = evaluate(cfg, Trajectory.inertial())
    assert r0.delta_per_cycle == 0 and r0.visibility == 1 and r0.q == 0
    r = evaluate(cfg, Trajectory.accelerated(4.5e17))
    assert r.gamma_inertial == r0.gamma_inertial
    assert r.delta_per_cycle > 0
    assert r.q_convention == QConvention.ARCTAN.value
    with pytest.raises(DomainError):
        evaluate(DetectorConfig(1.0, 1.0, 0.01), Trajectory.inertial())


def test_delta_monotone_in_acceleration_and_coupling():
    accs = np.logspace(16, 18, 10)
    prev_curve = None
    for lam in (34.0, 100.0, 250.0):
        d = fit_decomposition(DetectorConfig(2e9, 2e9, lam))
        gi, g = gamma_inertial(d), g_factor(d)
        curve = [delta_per_cycle(gi, gamma_accelerated(gi, squeezing_q(2e9, a), g)) for a in accs]
        assert all(b > a for a, b in zip(curve, curve[1:]))
        if prev_curve is not None:
            assert all(b > a for a, b in zip(prev_curve, curve))
        prev_curve = curve


@settings(max_examples=60, deadline=None)
@given(q=st.floats(0, math.pi / 4), g=st.floats(0, 1, exclude_max=True), gi=st.floats(-3, 3))
def test_gamma_accelerated_properties(q, g, gi):
    ga = gamma_accelerated(gi, q, g)
    assert -math.pi < float(ga) <= math.pi
    # integer shifts of G leave the phase unchanged
    assert float(gamma_accelerated(gi, q, g + 1)) == pytest.approx(float(ga), abs=1e-12)
    # G -> 1 - G mirrors the shift
    assert float(accelerated_shift(q, 1 - g)) == pytest.approx(-float(accelerated_shift(q, g)), abs=1e-12)
