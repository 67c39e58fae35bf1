"""Command-line entry point.

Subcommands: ``run`` (one scenario), ``sweep`` (axis x seeds grid),
``observability`` (rank table), ``anees`` (consistency batch), ``metrics``
(recompute metrics from a log), ``validate`` (check a config).

Exit codes are the machine contract: 0 success, 2 invalid configuration or
usage, 3 runtime failure, 4 observability rank mismatch. The environment
variable ``SWA_OUT`` provides the default output root; ``--out`` wins.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, sim
from .config import (
    ConfigError,
    ScenarioConfig,
    load_config,
    serialize_config,
    set_config_key,
)
from .consistency import focal_consistency_batch

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_RANK = 4

OUT_ENV_VAR = "SWA_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_config: bool) -> None:
        p.add_argument("--config", required=needs_config, help="scenario config file")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV_VAR} or cwd)")
        p.add_argument("--seed", type=int, help="override sim.seed")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p_run = sub.add_parser("run", help="run one scenario, write log/metrics/config/schema")
    common(p_run, needs_config=True)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a config axis over several seeds")
    common(p_sweep, needs_config=True)
    p_sweep.add_argument("--axis", required=True, help="key=v1,v2,... over a config key")
    p_sweep.add_argument("--seeds", type=int, required=True, help="number of seeds per value")
    p_sweep.set_defaults(func=cmd_sweep)

    p_obs = sub.add_parser("observability", help="rank table of the combined swarm system")
    p_obs.add_argument("--n-range", default="2..6", help="swarm sizes a..b (within 2..12)")
    p_obs.add_argument("--quiet", action="store_true")
    p_obs.set_defaults(func=cmd_observability)

    p_anees = sub.add_parser("anees", help="model-matched consistency batch of the focal filter")
    common(p_anees, needs_config=False)
    p_anees.add_argument("--runs", type=int, default=12, help="independent runs per batch")
    p_anees.add_argument("--duration", type=float, default=30.0, help="run length (s)")
    p_anees.set_defaults(func=cmd_anees)

    p_metrics = sub.add_parser("metrics", help="recompute metrics.csv from a log")
    common(p_metrics, needs_config=True)
    p_metrics.add_argument("--log", required=True, help="log.csv produced by run")
    p_metrics.set_defaults(func=cmd_metrics)

    p_validate = sub.add_parser("validate", help="validate a config and print it resolved")
    common(p_validate, needs_config=True)
    p_validate.set_defaults(func=cmd_validate)

    return parser


def _out_dir(args) -> Path:
    root = args.out or os.environ.get(OUT_ENV_VAR) or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_config(args) -> ScenarioConfig:
    try:
        config = load_config(args.config)
    except FileNotFoundError as exc:
        raise ConfigError(str(args.config), f"cannot read config: {exc}") from exc
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    config.validate()
    return config


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_metrics(path: Path, metrics: list[tuple[str, float]]) -> None:
    lines = ["metric,value"]
    for name, value in metrics:
        lines.append(f"{name},{sim.format_float(value)}")
    _write_text(path, "\n".join(lines) + "\n")


def _run_into(config: ScenarioConfig, out_dir: Path, quiet: bool) -> sim.SimLog:
    log = sim.run_scenario(config)
    _write_text(out_dir / "log.csv", log.to_csv_text())
    _write_metrics(out_dir / "metrics.csv", sim.summarize_log(log))
    _write_text(out_dir / "config.resolved", serialize_config(config))
    sim.write_schema_file(
        out_dir / "schema.json",
        {"log.csv": sim.log_schema(config.n_uavs), "metrics.csv": sim.metrics_schema()},
    )
    if not quiet:
        print(f"wrote {out_dir / 'log.csv'} ({log.data.shape[0]} rows)")
    return log


def cmd_run(args) -> int:
    config = _load_config(args)
    out_dir = _out_dir(args)
    try:
        _run_into(config, out_dir, args.quiet)
    except sim.SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.seeds < 1:
        print("error: --seeds must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if "=" not in args.axis:
        print("error: --axis must look like key=v1,v2,...", file=sys.stderr)
        return EXIT_CONFIG
    axis_key, _, raw_values = args.axis.partition("=")
    axis_key = axis_key.strip()
    values = [v.strip() for v in raw_values.split(",") if v.strip()]
    if not values:
        print("error: --axis value list is empty", file=sys.stderr)
        return EXIT_CONFIG
    base = _load_config(args)
    out_dir = _out_dir(args)

    summary_rows = []
    for value in values:
        per_run = []
        config_value = set_config_key(base, axis_key, value)
        for run_index in range(args.seeds):
            config_run = replace(config_value, seed=base.seed + run_index)
            config_run.validate()
            run_dir = out_dir / f"{axis_key.replace('.', '_')}_{value}_seed{config_run.seed}"
            run_dir.mkdir(parents=True, exist_ok=True)
            try:
                log = _run_into(config_run, run_dir, args.quiet)
            except sim.SimulationError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_RUNTIME
            per_run.append(dict(sim.summarize_log(log)))
        mean_dnb = float(np.mean([m["dnb_mean_steady"] for m in per_run]))
        mean_vdrift = float(np.mean([m["vdrift_net_post"] for m in per_run]))
        summary_rows.append((value, len(per_run), mean_dnb, mean_vdrift))

    lines = ["axis_value,n_runs,mean_dnb_steady,mean_vdrift_net"]
    for value, n_runs, mean_dnb, mean_vdrift in summary_rows:
        lines.append(
            f"{value},{n_runs},{sim.format_float(mean_dnb)},{sim.format_float(mean_vdrift)}"
        )
    _write_text(out_dir / "summary.csv", "\n".join(lines) + "\n")
    sim.write_schema_file(out_dir / "schema.json", {"summary.csv": _summary_schema(axis_key)})
    if not args.quiet:
        print(f"wrote {out_dir / 'summary.csv'} ({len(summary_rows)} rows)")
    return EXIT_OK


def _summary_schema(axis_key: str) -> list[dict]:
    return [
        {"name": "axis_value", "description": f"value assigned to {axis_key}"},
        {"name": "n_runs", "description": "number of seeds aggregated"},
        {"name": "mean_dnb_steady", "description": "mean over runs of steady-state mean pairwise distance (m)"},
        {"name": "mean_vdrift_net", "description": "mean over runs of net post-dropout centroid drift speed (m/s)"},
    ]


def cmd_observability(args) -> int:
    try:
        low, high = _parse_range(args.n_range)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    all_ok = True
    if not args.quiet:
        print(f"{'n':>4} {'dim':>5} {'rank':>5} {'nullity':>8} {'basis_ok':>9}")
    for n in range(low, high + 1):
        system = analysis.build_combined_system(n, dt=0.1)
        rank = analysis.observability_rank(system)
        nullity = 4 * n - rank
        basis_ok = analysis.unobservable_basis_check(system)
        all_ok = all_ok and (rank == 4 * n - 4)
        if not args.quiet:
            print(f"{n:>4} {4 * n:>5} {rank:>5} {nullity:>8} {'yes' if basis_ok else 'NO':>9}")
    return EXIT_OK if all_ok else EXIT_RANK


def _parse_range(spec: str) -> tuple[int, int]:
    parts = spec.split("..")
    if len(parts) != 2:
        raise ValueError(f"--n-range must look like a..b, got {spec!r}")
    low, high = int(parts[0]), int(parts[1])
    if low < 2 or high > 12 or low > high:
        raise ValueError(f"--n-range must stay within 2..12, got {spec!r}")
    return low, high


def cmd_anees(args) -> int:
    if args.runs < 1:
        print("error: --runs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.config:
        config = _load_config(args)
    else:
        config = ScenarioConfig()
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    out_dir = _out_dir(args)
    batch = focal_consistency_batch(
        config.focal_params(),
        n_runs=args.runs,
        duration=args.duration,
        dt=config.dt_sim,
        f_p=config.f_p,
        f_a=config.f_a,
        seed=config.seed,
    )
    report_pos = analysis.anees_series(batch.position_runs)
    report_vel = analysis.anees_series(batch.velocity_runs)
    columns = ["t", "anees_pos", "anees_vel", "r1", "r2"]
    data = np.column_stack([
        batch.times,
        report_pos.values,
        report_vel.values,
        np.full_like(batch.times, report_pos.r1),
        np.full_like(batch.times, report_pos.r2),
    ])
    _write_text(out_dir / "anees.csv", sim.write_csv(columns, data))
    sim.write_schema_file(out_dir / "schema.json", {"anees.csv": _anees_schema()})
    if not args.quiet:
        print(
            f"anees: pos in-band {report_pos.pass_fraction:.1%}, "
            f"vel in-band {report_vel.pass_fraction:.1%}, "
            f"bounds [{report_pos.r1:.4f}, {report_pos.r2:.4f}]"
        )
    return EXIT_OK


def _anees_schema() -> list[dict]:
    return [
        {"name": "t", "description": "time within each run (s)"},
        {"name": "anees_pos", "description": "average position NEES over the batch"},
        {"name": "anees_vel", "description": "average velocity NEES over the batch"},
        {"name": "r1", "description": "lower chi-square acceptance bound"},
        {"name": "r2", "description": "upper chi-square acceptance bound"},
    ]


def cmd_metrics(args) -> int:
    config = _load_config(args)
    try:
        columns, data = sim.read_csv_columns(args.log)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read log: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log = sim.SimLog(
        columns=columns,
        data=data,
        n_uavs=config.n_uavs,
        dt_log=1.0 / config.log_rate,
        dropout_time=config.dropout_time,
        mode=config.mode,
    )
    out_dir = _out_dir(args)
    _write_metrics(out_dir / "metrics.csv", sim.summarize_log(log))
    sim.write_schema_file(out_dir / "schema.json", {"metrics.csv": sim.metrics_schema()})
    if not args.quiet:
        print(f"wrote {out_dir / 'metrics.csv'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _load_config(args)
    if not args.quiet:
        sys.stdout.write(serialize_config(config))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
