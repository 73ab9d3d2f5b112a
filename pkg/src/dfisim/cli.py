"""Command-line front end: scenario files, presets, sweeps, comparisons.

Outputs are plain decimal CSV (12 significant digits) so any consumer can
reproduce plots bit-for-bit; every run also writes a ``.meta.json`` sidecar
with the resolved configuration and the integrator step actually used.  The
system is fully deterministic: identical inputs give byte-identical outputs
(the SEED environment variable, if set, is ignored).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .analysis import circulation_order, smooth_trace
from .core import (
    ParseError,
    Regime,
    ScenarioConfig,
    ValidationError,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
    with_params,
)
from .integrator import (
    NumericalBlowup,
    StepTooLarge,
    TimeSeries,
    dde_step_size,
    integrate_dde,
    integrate_ode,
    ode_step_size,
)
from .models import build_rhs
from .presets import PRESET_NAMES, preset

_ATOM_NAMES = ("A", "B", "C")
SWEEP_PARAMETERS = ("chi", "omega", "theta", "tau")


class IncompatibleScenarios(ValueError):
    """The two scenarios of a comparison do not describe the same system."""


def parse_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a JSON scenario document."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        cfg = scenario_from_dict(data)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None
    diagnostics = validate_scenario(cfg)
    if diagnostics:
        raise ValidationError(diagnostics)
    return cfg


def execute(cfg: ScenarioConfig) -> tuple[TimeSeries, float]:
    """Integrate a validated scenario; returns the series and the step used."""
    diagnostics = validate_scenario(cfg)
    if diagnostics:
        raise ValidationError(diagnostics)
    rhs = build_rhs(cfg)
    if cfg.regime is Regime.FULL_DELAY:
        h, _ = dde_step_size(cfg)
        return integrate_dde(rhs, cfg), h
    return integrate_ode(rhs, cfg), ode_step_size(cfg)


def _csv_text(series: TimeSeries) -> str:
    n = series.n_atoms
    names = _ATOM_NAMES[:n]
    header = (["t"] + [f"P_{a}" for a in names] + ["P_tot"]
              + [c for a in names for c in (f"re_u{a}", f"im_u{a}")])
    lines = [",".join(header)]
    fmt = "{:.12g}".format
    for i in range(len(series.times)):
        row = [fmt(series.times[i])]
        row += [fmt(series.probabilities[i, j]) for j in range(n)]
        row.append(fmt(series.total_probability[i]))
        for j in range(n):
            u = series.amplitudes[i, j]
            row.append(fmt(u.real))
            row.append(fmt(u.imag))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)  # mkstemp defaults to 0600
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(output_path: str | Path) -> Path:
    out = Path(output_path)
    return out.with_suffix(".meta.json") if out.suffix else out.with_name(out.name + ".meta.json")


def run(cfg: ScenarioConfig, output_path: str | Path) -> int:
    """Integrate and export one scenario; returns a process exit status."""
    out = Path(output_path)
    try:
        series, step = execute(cfg)
    except (ValidationError, StepTooLarge, NumericalBlowup, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_atomic(out, _csv_text(series))
    meta = {"config": scenario_to_dict(cfg), "integrator_step": step,
            "samples": len(series.times)}
    _write_atomic(sidecar_path(out), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return 0


@dataclass(frozen=True)
class ComparisonReport:
    """Pointwise probability deviation between two runs of the same system."""

    scenario_a: str
    scenario_b: str
    deviations: tuple[float, ...]   # per atom, max over common samples
    horizon: float
    tolerance: float
    passed: bool


def compare(cfg_full: ScenarioConfig, cfg_reduced: ScenarioConfig,
            tolerance: float) -> ComparisonReport:
    """Run two scenarios of the same system and report probability deviations.

    The usual pairing is a full-delay scenario against its Markovian or
    rotating-frame reduction, but any two runs sharing the model, initial
    state and sample interval can be compared (a scenario against itself
    gives zero deviation).  The comparison covers the overlap of the two
    horizons.
    """
    if cfg_full.model is not cfg_reduced.model:
        raise IncompatibleScenarios("models differ")
    if cfg_full.initial_state != cfg_reduced.initial_state:
        raise IncompatibleScenarios("initial states differ")
    if cfg_full.sample_interval != cfg_reduced.sample_interval:
        raise IncompatibleScenarios("sample intervals differ")

    series_a, _ = execute(cfg_full)
    series_b, _ = execute(cfg_reduced)
    n = min(len(series_a.times), len(series_b.times))
    dev = tuple(
        float(abs(series_a.probabilities[:n, j] - series_b.probabilities[:n, j]).max())
        for j in range(series_a.n_atoms)
    )
    return ComparisonReport(
        scenario_a=f"{cfg_full.model.value}/{cfg_full.regime.value}",
        scenario_b=f"{cfg_reduced.model.value}/{cfg_reduced.regime.value}",
        deviations=dev,
        horizon=float(series_a.times[:n][-1]),
        tolerance=tolerance,
        passed=all(d < tolerance for d in dev),
    )


@dataclass(frozen=True)
class SweepRow:
    value: float
    final_p_tot: float | None
    circulation: str
    error: str | None = None


def _sweep_config(base: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
    if parameter == "omega" and base.params.delta == base.params.omega:
        # resonant-modulation scenarios keep delta locked to omega
        return with_params(base, omega=value, delta=value)
    return with_params(base, **{parameter: value})


def _circulation_label(cfg: ScenarioConfig, series: TimeSeries) -> str:
    if series.n_atoms != 3:
        return ""
    window = 0.0
    if cfg.regime is Regime.FULL_DELAY and cfg.params.omega != 0.0:
        window = 2.0 * math.pi / abs(cfg.params.omega)
    # threshold relative to the transfer crests so that small precursor
    # bumps (direct-link leakage) are not read as first peaks
    crest = max(
        smooth_trace(series.probability(j), series.times, window).max()
        for j in (1, 2))
    height = max(0.05, 0.3 * float(crest))
    return circulation_order(series, min_height=height,
                             smooth_window=window).ordering.value


def sweep(base_cfg: ScenarioConfig, parameter: str, values: list[float],
          output_dir: str | Path) -> list[SweepRow]:
    """Run base_cfg once per value; failures are recorded and skipped.

    Writes one CSV per value plus summary.csv (value, final P_tot,
    circulation label) into output_dir.
    """
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[SweepRow] = []
    for value in values:
        try:
            cfg = _sweep_config(base_cfg, parameter, value)
            series, step = execute(cfg)
        except (ValidationError, StepTooLarge, NumericalBlowup, ValueError) as exc:
            print(f"error: {parameter}={value:g}: {exc}", file=sys.stderr)
            rows.append(SweepRow(value, None, "", error=str(exc)))
            continue
        stem = f"{parameter}_{value:.6g}"
        _write_atomic(out_dir / f"{stem}.csv", _csv_text(series))
        meta = {"config": scenario_to_dict(cfg), "integrator_step": step,
                "samples": len(series.times)}
        _write_atomic(out_dir / f"{stem}.meta.json",
                      json.dumps(meta, indent=2, sort_keys=True) + "\n")
        rows.append(SweepRow(value, float(series.total_probability[-1]),
                             _circulation_label(cfg, series)))
    lines = [f"{parameter},final_P_tot,circulation"]
    for row in rows:
        if row.error is not None:
            lines.append(f"{row.value:.12g},,error")
        else:
            lines.append(f"{row.value:.12g},{row.final_p_tot:.12g},{row.circulation}")
    _write_atomic(out_dir / "summary.csv", "\n".join(lines) + "\n")
    return rows


# --- argparse front end -------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfisim",
        description="Simulate decoherence-free dynamics of modulated giant atoms.",
        epilog="Deterministic: the SEED environment variable is ignored.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a JSON scenario and export CSV")
    p_sim.add_argument("config", help="path to a scenario JSON document")
    p_sim.add_argument("-o", "--output", required=True, help="output CSV path")

    p_pre = sub.add_parser("preset", help="run a named reference scenario")
    p_pre.add_argument("name", choices=PRESET_NAMES)
    p_pre.add_argument("-o", "--output", required=True, help="output CSV path")

    p_cmp = sub.add_parser("compare", help="full-delay run vs a reduced run")
    p_cmp.add_argument("full", help="full_delay scenario JSON")
    p_cmp.add_argument("reduced", help="reduced (markovian_ode/rwa_effective) scenario JSON")
    p_cmp.add_argument("--tol", type=float, required=True, help="pass threshold on max |dP|")

    p_swp = sub.add_parser("sweep", help="repeat a scenario over parameter values")
    p_swp.add_argument("base", help="base scenario JSON")
    p_swp.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    p_swp.add_argument("--values", required=True,
                       help="comma-separated list, e.g. 0.5,1,2")
    p_swp.add_argument("-o", "--output", required=True, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return run(parse_scenario(args.config), args.output)
        if args.command == "preset":
            return run(preset(args.name), args.output)
        if args.command == "compare":
            report = compare(parse_scenario(args.full), parse_scenario(args.reduced),
                             args.tol)
            for name, dev in zip(_ATOM_NAMES, report.deviations):
                print(f"max |dP_{name}| = {dev:.6g}")
            print(f"horizon t = {report.horizon:.6g}, tolerance {report.tolerance:g}: "
                  f"{'PASS' if report.passed else 'FAIL'}")
            return 0 if report.passed else 3
        if args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                print("error: --values must be a comma-separated list of numbers",
                      file=sys.stderr)
                return 2
            if not values or not all(math.isfinite(v) for v in values):
                print("error: sweep values must be finite numbers", file=sys.stderr)
                return 2
            rows = sweep(parse_scenario(args.base), args.param, values, args.output)
            return 0 if all(r.error is None for r in rows) else 1
    except (ParseError, ValidationError, IncompatibleScenarios) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StepTooLarge, NumericalBlowup) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
