"""Command-line interface: ``dualsim run | compare | list-scenarios``.

Runs are described by a JSON config document and/or flags (flags win).  Every
run writes a manifest recording all resolved inputs and seeds; re-running
from a manifest reproduces the output files byte for byte.

Exit codes: 0 success, 2 configuration error, 3 engine error, 4 I/O error.
Nothing is written on a nonzero exit except diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import kernels, stats
from .errors import ConfigError, EngineError, ModelDomainError
from .models import (
    GrowthLaw,
    KuznetsovParams,
    PopulationState,
    experiment_one_law,
    scenario_preset,
)
from .plotting import Curve, emit_svg_plot
from .sds import IntegratorConfig, integrate
from .ssa import (
    DEFAULT_REPS,
    Ensemble,
    EnsembleSpec,
    Floors,
    RatePolicy,
    growth_channels,
    kuznetsov_channels,
    run_ensemble,
)
from .trajectory import Trajectory

__all__ = ["RunSpec", "parse_config", "cmd_run", "cmd_compare", "main"]

_MODELS = ("logistic", "bertalanffy", "gompertz", "kuznetsov")
_PARADIGMS = ("sds", "abs", "both")
_METHODS = ("exact", "tau")
_POLICIES = ("live", "frozen")
_FIXES = ("none", "tumour", "both")

# Defaults for the two-equation initial conditions; arbitrary (no canonical
# values exist), overridable, and stamped into every manifest.
_KUZNETSOV_T0 = 100.0
_KUZNETSOV_E0 = 10.0


@dataclass(frozen=True)
class RunSpec:
    """A fully resolved run description (what the manifest records)."""

    model: str
    paradigm: str = "both"
    scenario: int | None = None
    c: float | None = None
    a: float | None = None
    b: float | None = None
    t0: float = 1.0
    e0: float | None = None
    dt: float = 0.001
    t_end: float = 100.0
    grid: float = 1.0
    reps: int = DEFAULT_REPS
    seed: int = 1
    method: str = "exact"
    policy: str = "live"
    fix: str = "none"
    alpha: float = 0.05
    out: str = "."
    plot: bool = False


_FIELD_TYPES = {
    "model": str,
    "paradigm": str,
    "scenario": int,
    "c": float,
    "a": float,
    "b": float,
    "t0": float,
    "e0": float,
    "dt": float,
    "t_end": float,
    "grid": float,
    "reps": int,
    "seed": int,
    "method": str,
    "policy": str,
    "fix": str,
    "alpha": float,
    "out": str,
    "plot": bool,
}


def _coerce(name: str, value):
    want = _FIELD_TYPES[name]
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    if want is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if want is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected true/false, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{name}: expected a string, got {value!r}")
    return value


def _validate_raw(raw: dict) -> RunSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"config must be a JSON object, got {type(raw).__name__}")
    unknown = sorted(set(raw) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    vals = {k: _coerce(k, v) for k, v in raw.items() if v is not None}

    model = vals.get("model")
    if model is None:
        raise ConfigError("model: required (one of logistic, bertalanffy, gompertz, kuznetsov)")
    if model not in _MODELS:
        raise ConfigError(f"model: must be one of {_MODELS}, got {model!r}")

    for name, allowed in (("paradigm", _PARADIGMS), ("method", _METHODS),
                          ("policy", _POLICIES), ("fix", _FIXES)):
        v = vals.get(name)
        if v is not None and v not in allowed:
            raise ConfigError(f"{name}: must be one of {allowed}, got {v!r}")

    if model == "kuznetsov":
        if vals.get("scenario") is None:
            raise ConfigError("scenario: required for the kuznetsov model (1..4)")
        if vals["scenario"] not in (1, 2, 3, 4):
            raise ConfigError(f"scenario: must be 1..4, got {vals['scenario']}")
        for bad in ("c", "a", "b"):
            if bad in vals:
                raise ConfigError(f"{bad}: only applies to one-equation models, not kuznetsov")
        if vals.get("policy") == "frozen":
            raise ConfigError("policy: frozen is invalid for kuznetsov (one-equation models only)")
        vals.setdefault("t0", _KUZNETSOV_T0)
        vals.setdefault("e0", _KUZNETSOV_E0)
    else:
        if vals.get("scenario") is not None:
            raise ConfigError("scenario: only applies to the kuznetsov model")
        if vals.get("e0") is not None:
            raise ConfigError("e0: one-equation models have no effector population")
        has_c = vals.get("c") is not None
        has_ab = vals.get("a") is not None or vals.get("b") is not None
        if has_c and has_ab:
            raise ConfigError("give either the ratio c or explicit a/b, not both")
        if not has_c and not has_ab:
            raise ConfigError("one-equation models need either c or a and b")
        if has_ab and (vals.get("a") is None or vals.get("b") is None):
            raise ConfigError("a and b must be given together")
        vals.setdefault("t0", 1.0)

    spec = RunSpec(**vals)

    if vals.get("policy") == "frozen" and vals.get("method") == "tau":
        raise ConfigError("policy: frozen requires the exact method")
    if not (math.isfinite(spec.dt) and spec.dt > 0):
        raise ConfigError(f"dt: must be > 0, got {spec.dt}")
    if not (math.isfinite(spec.t_end) and spec.t_end >= spec.dt):
        raise ConfigError(f"t_end: must be >= dt, got {spec.t_end}")
    if not (math.isfinite(spec.grid) and 0 < spec.grid <= spec.t_end):
        raise ConfigError(f"grid: must be in (0, t_end], got {spec.grid}")
    if spec.reps < 1:
        raise ConfigError(f"reps: must be >= 1, got {spec.reps}")
    if not (0 < spec.alpha < 1):
        raise ConfigError(f"alpha: must be in (0, 1), got {spec.alpha}")
    if spec.t0 < 0 or (spec.e0 is not None and spec.e0 < 0):
        raise ConfigError("initial populations must be >= 0")
    if spec.paradigm in ("abs", "both"):
        if spec.t0 != int(spec.t0) or (spec.e0 is not None and spec.e0 != int(spec.e0)):
            raise ConfigError("t0/e0: stochastic runs need integer initial populations")

    # building the model surfaces the remaining domain constraints (b < a ...)
    try:
        _build_model(spec)
    except ModelDomainError as exc:
        raise ConfigError(str(exc)) from exc
    return spec


def parse_config(text: str) -> RunSpec:
    """Parse a JSON config document (or a previously written manifest) into a
    fully validated RunSpec with defaults filled in."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if isinstance(raw, dict) and "run_spec" in raw:
        raw = raw["run_spec"]
    return _validate_raw(raw)


def _build_model(spec: RunSpec) -> GrowthLaw | KuznetsovParams:
    if spec.model == "kuznetsov":
        return scenario_preset(spec.scenario)
    if spec.c is not None:
        return experiment_one_law(spec.model, spec.c)
    if spec.model == "logistic":
        return GrowthLaw.logistic(spec.a, spec.b)
    if spec.model == "bertalanffy":
        return GrowthLaw.von_bertalanffy(spec.a, spec.b)
    return GrowthLaw.gompertz(spec.a, spec.b)


def _initial_state(spec: RunSpec) -> PopulationState:
    if spec.model == "kuznetsov":
        return PopulationState(spec.t0, spec.e0)
    return PopulationState(spec.t0)


def _sds_sample_every(spec: RunSpec) -> float:
    return max(spec.dt, min(0.1, spec.grid))


def _run_sds(spec: RunSpec, model) -> Trajectory:
    cfg = IntegratorConfig(dt=spec.dt, t_end=spec.t_end, sample_every=_sds_sample_every(spec))
    return integrate(model, _initial_state(spec), cfg)


def _run_abs(spec: RunSpec, model) -> Ensemble:
    channels = kuznetsov_channels(model) if spec.model == "kuznetsov" else growth_channels(model)
    ens_spec = EnsembleSpec(
        channels=channels,
        initial=_initial_state(spec),
        t_end=spec.t_end,
        policy=RatePolicy.FROZEN_AT_BIRTH if spec.policy == "frozen" else RatePolicy.LIVE,
        floors=Floors.from_fix(spec.fix),
        method=spec.method,
        dt=spec.dt if spec.method == "tau" else None,
    )
    return run_ensemble(ens_spec, reps=spec.reps, base_seed=spec.seed)


def _num(v: float) -> str:
    return repr(float(v))


def _sds_csv(traj: Trajectory) -> str:
    header = "time," + ",".join(traj.species)
    lines = [header]
    for i in range(len(traj.times)):
        cells = [f"{traj.times[i]:.6f}"] + [_num(v) for v in traj.states[i]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _ensemble_csv(ens: Ensemble, grid: np.ndarray) -> str:
    species = ens.replicates[0].species
    header = "replicate,time," + ",".join(species)
    lines = [header]
    for rep in ens.replicates:
        series = stats.sample_on_grid(rep, grid, stats.Interp.STEP)
        for i in range(len(series.times)):
            cells = [str(rep.replicate), f"{series.times[i]:.6f}"]
            cells += [_num(v) for v in series.values[i]]
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _comparison_csv(report: stats.ComparisonReport) -> str:
    names = list(report.populations)
    header = ["time"]
    for name in names:
        header += [f"sds_{name}", f"abs_mean_{name}", f"abs_var_{name}"]
    lines = [",".join(header)]
    for i, t in enumerate(report.grid):
        cells = [f"{t:.6f}"]
        for name in names:
            comp = report.populations[name]
            cells += [_num(comp.sds[i]), _num(comp.abs_mean[i]), _num(comp.abs_variance[i])]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _json_doc(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _manifest(spec: RunSpec, outputs: list[str], results: dict) -> str:
    doc = {
        "format": "dualsim-manifest/1",
        "run_spec": asdict(spec),
        "replicate_seeds": (
            [spec.seed + i for i in range(spec.reps)] if spec.paradigm in ("abs", "both") else []
        ),
        "outputs": sorted(outputs),
        "results": results,
    }
    return _json_doc(doc)


def _plot_curves(series: stats.GridSeries, prefix: str = "") -> list[Curve]:
    curves = []
    for name in series.species:
        curves.append(
            Curve(
                label=f"{prefix}{name}",
                values=list(series.column(name)),
                axis="left" if name == "tumour" else "right",
                dotted=name != "tumour",
            )
        )
    return curves


def _model_label(spec: RunSpec) -> str:
    if spec.model == "kuznetsov":
        return f"kuznetsov scenario {spec.scenario}"
    if spec.c is not None:
        return f"{spec.model} c={spec.c:g}"
    return f"{spec.model} a={spec.a:g} b={spec.b:g}"


def _write_outputs(out_dir: str, outputs: dict[str, str]) -> list[Path]:
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(outputs):
        path = directory / name
        tmp = directory / (name + ".tmp")
        tmp.write_text(outputs[name], encoding="utf-8", newline="\n")
        os.replace(tmp, path)
        written.append(path)
    return written


def cmd_run(spec: RunSpec) -> list[Path]:
    """Execute the requested paradigm(s) and write trajectory CSVs, an
    optional SVG plot, and the manifest.  All outputs are computed before
    anything is written, so failures leave no partial files."""
    model = _build_model(spec)
    grid = stats.make_grid(spec.t_end, spec.grid)
    outputs: dict[str, str] = {}
    results: dict = {}
    plot_curves: list[Curve] = []
    plot_times = None

    if spec.paradigm in ("sds", "both"):
        traj = _run_sds(spec, model)
        outputs["sds.csv"] = _sds_csv(traj)
        results["sds_termination"] = traj.termination.value
        if spec.plot and traj.end_time >= grid[-1]:
            series = stats.sample_on_grid(traj, grid, stats.Interp.LINEAR)
            plot_curves += _plot_curves(series, prefix="sds ")
            plot_times = grid
    if spec.paradigm in ("abs", "both"):
        ens = _run_abs(spec, model)
        outputs["abs_ensemble.csv"] = _ensemble_csv(ens, grid)
        results["abs_terminations"] = sorted(
            {rep.termination.value for rep in ens.replicates}
        )
        if spec.plot:
            mean_series, _ = stats.ensemble_mean(ens, grid)
            plot_curves += _plot_curves(mean_series, prefix="abs mean ")
            plot_times = grid

    if spec.plot and plot_curves:
        outputs["plot.svg"] = emit_svg_plot(plot_times, plot_curves, title=_model_label(spec))

    outputs["manifest.json"] = _manifest(spec, [*outputs, "manifest.json"], results)
    return _write_outputs(spec.out, outputs)


def cmd_compare(spec: RunSpec) -> list[Path]:
    """Run the deterministic trajectory and the stochastic ensemble, test
    their agreement per population, and write report.json, comparison.csv,
    comparison.svg and the manifest."""
    if spec.paradigm != "both":
        raise ConfigError("compare needs paradigm=both")
    model = _build_model(spec)
    grid = stats.make_grid(spec.t_end, spec.grid)
    traj = _run_sds(spec, model)
    if traj.end_time < grid[-1]:
        raise EngineError(
            f"deterministic run terminated early ({traj.termination.value} at t={traj.end_time:g}); "
            "cannot compare on the requested grid"
        )
    ens = _run_abs(spec, model)
    report = stats.compare(
        traj,
        ens,
        grid,
        alpha=spec.alpha,
        metadata={
            "model": _model_label(spec),
            "policy": spec.policy,
            "fix": spec.fix,
            "method": spec.method,
            "t0": spec.t0,
            "e0": spec.e0,
        },
    )

    outputs: dict[str, str] = {}
    outputs["report.json"] = _json_doc(report.to_dict())
    outputs["comparison.csv"] = _comparison_csv(report)
    curves = []
    for name, comp in report.populations.items():
        axis = "left" if name == "tumour" else "right"
        dotted = name != "tumour"
        curves.append(Curve(f"sds {name}", list(comp.sds), axis=axis, dotted=dotted))
        curves.append(Curve(f"abs mean {name}", list(comp.abs_mean), axis=axis, dotted=dotted))
    outputs["comparison.svg"] = emit_svg_plot(grid, curves, title=_model_label(spec))
    results = {
        "sds_termination": traj.termination.value,
        "wilcoxon": {
            name: {"U": comp.wilcoxon.U, "p": comp.wilcoxon.p, "h": comp.wilcoxon.h}
            for name, comp in report.populations.items()
        },
    }
    outputs["manifest.json"] = _manifest(spec, [*outputs, "manifest.json"], results)
    return _write_outputs(spec.out, outputs)


def list_scenarios() -> str:
    rows = ["scenario    b        d        s"]
    for i in (1, 2, 3, 4):
        p = scenario_preset(i)
        note = "  (no treatment)" if p.s == 0 else ""
        rows.append(f"{i}           {p.b:<8g} {p.d:<8g} {p.s:<8g}{note}")
    shared = scenario_preset(1)
    rows.append(
        f"shared across scenarios: a={shared.a:g}, g={shared.g:g}, "
        f"m={shared.m:g}, n={shared.n:g}, p={shared.p:g}"
    )
    return "\n".join(rows)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON config document or a previous manifest")
    p.add_argument("--model", choices=_MODELS)
    p.add_argument("--scenario", type=int, help="kuznetsov parameter scenario (1..4)")
    p.add_argument("--paradigm", choices=_PARADIGMS)
    p.add_argument("--c", type=float, help="ratio a/b for one-equation laws (sets a=1, b=1/c)")
    p.add_argument("--a", type=float, help="proliferation constant (one-equation)")
    p.add_argument("--b", type=float, help="death constant (one-equation)")
    p.add_argument("--t0", type=float, help="initial tumour cells")
    p.add_argument("--e0", type=float, help="initial effector cells (kuznetsov)")
    p.add_argument("--t-end", dest="t_end", type=float, help="horizon in days")
    p.add_argument("--dt", type=float, help="integration / leap step in days")
    p.add_argument("--grid", type=float, help="comparison grid spacing in days")
    p.add_argument("--reps", type=int, help="stochastic replicates")
    p.add_argument("--seed", type=int, help="base seed; replicate i uses seed + i")
    p.add_argument("--method", choices=_METHODS, help="stochastic stepper")
    p.add_argument("--policy", choices=_POLICIES, help="death-rate policy (one-equation)")
    p.add_argument("--fix", choices=_FIXES, help="extinction floors: none, tumour, or both")
    p.add_argument("--alpha", type=float, help="rank-sum significance level")
    p.add_argument("--out", help="output directory")
    p.add_argument("--plot", action="store_true", default=None, help="also write an SVG plot")


def _load_spec(args: argparse.Namespace, force_both: bool = False) -> RunSpec:
    raw: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if isinstance(doc, dict) and "run_spec" in doc:
            doc = doc["run_spec"]
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        raw.update(doc)
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            raw[name] = v
    if force_both:
        raw.setdefault("paradigm", "both")
    return _validate_raw(raw)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dualsim",
        description="Simulate tumour growth / tumour-effector models both as "
        "deterministic ODE systems and as stochastic discrete birth-death "
        "processes, and quantify whether the two paradigms agree.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="simulate and write trajectory CSVs + manifest")
    _add_run_flags(run_p)
    cmp_p = sub.add_parser("compare", help="run both paradigms and write an agreement report")
    _add_run_flags(cmp_p)
    sub.add_parser("list-scenarios", help="print the kuznetsov scenario presets")

    args = parser.parse_args(argv)
    try:
        if args.command == "list-scenarios":
            print(list_scenarios())
            return 0
        if args.command == "run":
            paths = cmd_run(_load_spec(args))
        else:
            paths = cmd_compare(_load_spec(args, force_both=True))
        for path in paths:
            print(path)
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
