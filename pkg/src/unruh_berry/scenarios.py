"""Scenario files, acceleration sweeps, oracle cross-checks and CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Optional

import mpmath as mp
import numpy as np
import yaml

from . import __version__
from .core import DetectorConfig, Trajectory, unruh_temperature
from .diagonalizer import fit_decomposition
from .errors import DecompositionError, UnruhBerryError, ValidationError
from .oracle import FockOracleConfig, oracle_phases
from .phases import (
    QConvention,
    cycles_to_target,
    delta_per_cycle,
    g_factor,
    gamma_accelerated,
    gamma_inertial,
    squeezing_q,
    time_to_target,
    visibility,
)

PRESETS = {"fig2": "fig2.yaml"}

#: Scenario assumed to carry the "30000 cycles at 4.5e17 m/s^2" planning example.
PLANNING_SCENARIO = "fig2-3"

#: Largest |closed form - oracle| phase deviation accepted by a cross-check (rad).
PHASE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SweepSpec:
    a_min: float
    a_max: float
    points: int
    spacing: str = "log"

    def accelerations(self) -> np.ndarray:
        if self.spacing == "log":
            acc = np.logspace(math.log10(self.a_min), math.log10(self.a_max), self.points)
        else:
            acc = np.linspace(self.a_min, self.a_max, self.points)
        # pin the endpoints exactly
        acc[0], acc[-1] = self.a_min, self.a_max
        return acc


@dataclass(frozen=True)
class Scenario:
    id: str
    detector: DetectorConfig
    sweep: SweepSpec
    q_convention: str = QConvention.ARCTAN.value

    def with_convention(self, convention: str | None) -> "Scenario":
        if convention is None:
            return self
        return Scenario(self.id, self.detector, self.sweep, QConvention(convention).value)


@dataclass(frozen=True)
class SweepRow:
    scenario_id: str
    acceleration: float
    unruh_temperature: float
    q: float
    G: float
    gamma_inertial: float
    gamma_accelerated: float
    delta_per_cycle: float
    visibility: float
    cycles_to_pi: Optional[int]
    time_to_pi: Optional[float]


COLUMNS = [f.name for f in fields(SweepRow)]


# --- loading -----------------------------------------------------------------


def _number(raw, key: str) -> float:
    if isinstance(raw, bool):
        raise ValidationError(f"{key}: expected a number, got {raw!r}", key=key)
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ValidationError(f"{key}: expected a number, got {raw!r}", key=key) from None
    if not math.isfinite(value):
        raise ValidationError(f"{key}: must be finite", key=key)
    return value


def _require(mapping, name: str, prefix: str):
    if not isinstance(mapping, dict):
        raise ValidationError(f"{prefix}: expected a mapping", key=prefix)
    if name not in mapping:
        raise ValidationError(f"{prefix}.{name}: missing", key=f"{prefix}.{name}")
    return mapping[name]


def _parse_scenario(raw, prefix: str) -> Scenario:
    sid = _require(raw, "id", prefix)
    if not isinstance(sid, str) or not sid:
        raise ValidationError(f"{prefix}.id: expected a non-empty string", key=f"{prefix}.id")
    values = {
        name: _number(_require(raw, name, prefix), f"{prefix}.{name}")
        for name in ("omega_field", "omega_detector", "coupling")
    }
    try:
        detector = DetectorConfig(**values)
    except ValidationError as exc:
        raise ValidationError(f"{prefix}.{exc.key}: {exc}", key=f"{prefix}.{exc.key}") from None

    sp = f"{prefix}.sweep"
    raw_sweep = _require(raw, "sweep", prefix)
    a_min = _number(_require(raw_sweep, "a_min", sp), f"{sp}.a_min")
    a_max = _number(_require(raw_sweep, "a_max", sp), f"{sp}.a_max")
    points = _require(raw_sweep, "points", sp)
    spacing = raw_sweep.get("spacing", "log")
    if not a_min > 0:
        raise ValidationError(f"{sp}.a_min: must be > 0", key=f"{sp}.a_min")
    if not a_max > a_min:
        raise ValidationError(f"{sp}.a_max: must exceed sweep.a_min", key=f"{sp}.a_max")
    if isinstance(points, bool) or not isinstance(points, int) or points < 2:
        raise ValidationError(f"{sp}.points: must be an integer >= 2", key=f"{sp}.points")
    if spacing not in ("log", "linear"):
        raise ValidationError(f"{sp}.spacing: must be 'log' or 'linear'", key=f"{sp}.spacing")

    convention = raw.get("q_convention", QConvention.ARCTAN.value)
    try:
        convention = QConvention(convention).value
    except ValueError:
        raise ValidationError(
            f"{prefix}.q_convention: must be 'arctan' or 'arctanh'", key=f"{prefix}.q_convention"
        ) from None
    return Scenario(sid, detector, SweepSpec(a_min, a_max, points, spacing), convention)


def parse_scenarios(document) -> list[Scenario]:
    """Validate a parsed scenario document ``{scenarios: [...]}``."""
    items = _require(document, "scenarios", "document") if isinstance(document, dict) else None
    if not isinstance(items, list) or not items:
        raise ValidationError("scenarios: expected a non-empty list", key="scenarios")
    result = [_parse_scenario(raw, f"scenarios[{i}]") for i, raw in enumerate(items)]
    seen = set()
    for i, sc in enumerate(result):
        if sc.id in seen:
            raise ValidationError(f"scenarios[{i}].id: duplicate id {sc.id!r}", key=f"scenarios[{i}].id")
        seen.add(sc.id)
    return result


def load_scenarios(path) -> list[Scenario]:
    """Scenarios from a YAML file, or from a built-in preset name such as ``"fig2"``."""
    if str(path) in PRESETS:
        text = resources.files("unruh_berry").joinpath("data", PRESETS[str(path)]).read_text()
    else:
        text = Path(path).read_text()
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"cannot parse {path}: {exc}") from None
    return parse_scenarios(document)


def select(scenarios: list[Scenario], ids) -> list[Scenario]:
    if not ids:
        return scenarios
    by_id = {s.id: s for s in scenarios}
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise ValidationError(f"unknown scenario id(s): {', '.join(missing)}", key="scenario")
    return [by_id[i] for i in ids]


# --- sweeps ------------------------------------------------------------------


def sweep_row(scenario_id, config, decomposition, a, convention) -> SweepRow:
    """One row of closed-form results at acceleration ``a``."""
    gi = gamma_inertial(decomposition)
    g = g_factor(decomposition)
    q = squeezing_q(config.omega_field, a, convention=convention)
    ga = gamma_accelerated(gi, q, g)
    delta = delta_per_cycle(gi, ga)
    cycles = time = None
    if float(abs(delta)) > 0:
        cycles = cycles_to_target(abs(delta), mp.pi)
        time = time_to_target(cycles, config.omega_field)
        if not math.isfinite(time):
            cycles = time = None
    return SweepRow(
        scenario_id=scenario_id,
        acceleration=float(a),
        unruh_temperature=unruh_temperature(a),
        q=float(q),
        G=float(g),
        gamma_inertial=float(gi),
        gamma_accelerated=float(ga),
        delta_per_cycle=float(delta),
        visibility=float(visibility(q)),
        cycles_to_pi=cycles,
        time_to_pi=time,
    )


def run_sweep(scenario: Scenario) -> list[SweepRow]:
    """Closed-form rows for every sample acceleration, in increasing order."""
    config = scenario.detector
    config.require_weak_coupling()
    try:
        d = fit_decomposition(config)
    except DecompositionError as exc:
        raise DecompositionError(f"scenario {scenario.id}: {exc}", exc.best_residual) from None
    return [
        sweep_row(scenario.id, config, d, a, scenario.q_convention)
        for a in sorted(scenario.sweep.accelerations())
    ]


# --- cross-check -------------------------------------------------------------


@dataclass(frozen=True)
class CrosscheckSample:
    acceleration: float
    q: float
    gamma_inertial_closed: float
    gamma_inertial_oracle: float
    gamma_accelerated_closed: float
    gamma_accelerated_oracle: float
    delta_closed: float
    delta_oracle: float

    @property
    def max_deviation(self) -> float:
        return max(
            abs(self.gamma_inertial_closed - self.gamma_inertial_oracle),
            abs(self.gamma_accelerated_closed - self.gamma_accelerated_oracle),
            abs(self.delta_closed - self.delta_oracle),
        )


@dataclass
class CrosscheckReport:
    scenario_id: str
    samples: list[CrosscheckSample]
    certificate: dict
    oracle_settings: dict
    phase_tolerance: float = PHASE_TOLERANCE
    errors: list[str] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((s.max_deviation for s in self.samples), default=0.0)

    @property
    def ok(self) -> bool:
        return (
            not self.errors
            and bool(self.certificate.get("passed", False))
            and self.max_deviation < self.phase_tolerance
        )

    def as_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "ok": self.ok,
            "max_deviation": self.max_deviation,
            "phase_tolerance": self.phase_tolerance,
            "certificate": self.certificate,
            "oracle": self.oracle_settings,
            "errors": self.errors,
            "samples": [dict(asdict(s), max_deviation=s.max_deviation) for s in self.samples],
        }


def run_crosscheck(scenario: Scenario, oracle: FockOracleConfig | None = None) -> CrosscheckReport:
    """Compare closed-form and Fock-space phases at every sweep acceleration."""
    oracle = oracle or FockOracleConfig()
    config = scenario.detector
    settings = {
        "cutoff": oracle.cutoff,
        "grid_points": oracle.grid_points,
        "thermal_levels": oracle.thermal_levels,
        "tolerance": oracle.tolerance,
    }
    rows = run_sweep(scenario)
    qs = [squeezing_q(config.omega_field, r.acceleration, convention=scenario.q_convention) for r in rows]
    try:
        result = oracle_phases(config, oracle, qs)
    except UnruhBerryError as exc:
        return CrosscheckReport(scenario.id, [], {"passed": False}, settings, errors=[str(exc)])
    samples = []
    for row, q, ga_oracle in zip(rows, qs, result.gamma_accelerated):
        d_oracle = math.remainder(result.gamma_inertial - ga_oracle, 2 * math.pi)
        samples.append(
            CrosscheckSample(
                acceleration=row.acceleration,
                q=float(q),
                gamma_inertial_closed=row.gamma_inertial,
                gamma_inertial_oracle=result.gamma_inertial,
                gamma_accelerated_closed=row.gamma_accelerated,
                gamma_accelerated_oracle=ga_oracle,
                delta_closed=row.delta_per_cycle,
                delta_oracle=d_oracle,
            )
        )
    return CrosscheckReport(scenario.id, samples, result.certificate.as_dict(), settings)


# --- output ------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".8e")


def metadata(q_convention: str | None = None, oracle: dict | None = None, **extra) -> dict:
    meta = {"tool": "unruh-berry", "version": __version__}
    if q_convention is not None:
        meta["q_convention"] = q_convention
    if oracle is not None:
        meta["oracle"] = oracle
    meta.update(extra)
    return meta


def render_csv(rows: list[SweepRow], meta: dict | None = None) -> str:
    """CSV text: ``# key: value`` metadata lines, header, one line per row."""
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, c)) for c in COLUMNS])
    return buf.getvalue()


def render_json(rows: list[SweepRow], meta: dict | None = None) -> str:
    return json.dumps({"meta": meta or {}, "rows": [asdict(r) for r in rows]}, indent=2) + "\n"


def emit(rows: list[SweepRow], format: str = "csv", path=None, meta: dict | None = None):
    """Write rows as CSV or JSON to ``path`` (``None`` or ``"-"`` for stdout)."""
    if format == "csv":
        text = render_csv(rows, meta)
    elif format == "json":
        text = render_json(rows, meta)
    else:
        raise ValidationError(f"unknown format {format!r}", key="format")
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_json_rows(text: str) -> tuple[dict, list[SweepRow]]:
    document = json.loads(text)
    return document["meta"], [SweepRow(**r) for r in document["rows"]]


def read_csv_rows(text: str) -> list[dict]:
    """Data rows of an emitted CSV as dicts of strings (metadata lines skipped)."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
