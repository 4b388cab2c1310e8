"""Command-line front end: run experiments, parameter sweeps, closed-form
prediction curves, validation, and the local HTTP service."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import dsl
from .circuit import path_length_report, route
from .constants import CELL_LATENCY_STEPS, DELTA_T
from .engine import GRID_LATENCY, INSTANT, RunConfig, run as engine_run, simulate
from .experiments import experiment_names, experiment_text
from .oracles import dark_count_prob, hom_powers, nominal_efficiency
from .analysis import mz_dark_subtracted, mz_probabilities, mz_quantum
from .pipelines import PIPELINES, RunOutcome
from .recorder import tabulate, write_csv, write_summary

THREADS_ENV = "VQOL_THREADS"


def _worker_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _load_spec(source: str):
    """Parse a path or bundled experiment name; returns (name, ParseResult)."""

    path = Path(source)
    if path.exists():
        return path.stem, dsl.parse_file(path)
    if source in experiment_names():
        return source, dsl.parse(experiment_text(source))
    raise FileNotFoundError(
        f"{source!r} is neither a file nor a bundled experiment "
        f"({', '.join(experiment_names())})"
    )


def _print_diagnostics(diagnostics) -> None:
    for diag in diagnostics:
        print(str(diag), file=sys.stderr)


def _parse_assignments(pairs) -> dict:
    assignments = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep:
            raise ValueError(f"--set expects component.param=value, got {pair!r}")
        assignments[key.strip()] = value.strip()
    return assignments


def _parse_range(text: str) -> tuple:
    """'name=start:stop:step' with an inclusive stop."""

    name, sep, rng = text.partition("=")
    if not sep:
        raise ValueError(f"--sweep expects name=start:stop:step, got {text!r}")
    parts = rng.split(":")
    if len(parts) != 3:
        raise ValueError(f"--sweep range must be start:stop:step, got {rng!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"empty sweep range {rng!r}")
    count = int(round((stop - start) / step)) + 1
    values = [start + k * step for k in range(count) if start + k * step <= stop + 1e-9]
    if not values:
        raise ValueError(f"empty sweep range {rng!r}")
    return name.strip(), values


def _resolve_steps(args, spec) -> int:
    if getattr(args, "steps", None):
        return args.steps
    if getattr(args, "seconds", None):
        return max(1, round(args.seconds / DELTA_T))
    return spec.num_steps


def _cmd_run(args) -> int:
    name, parsed = _load_spec(args.spec)
    _print_diagnostics(parsed.diagnostics)
    if not parsed.ok:
        return 2
    spec = parsed.spec
    try:
        spec = dsl.with_overrides(spec, _parse_assignments(args.set))
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    graph = route(spec.placements, cell_latency_steps=args.cell_latency)
    _print_diagnostics(graph.diagnostics)
    if not graph.ok:
        return 2
    _, warnings = path_length_report(graph)
    _print_diagnostics(warnings)

    config = RunConfig(
        seed=args.seed,
        num_steps=_resolve_steps(args, spec),
        cell_latency_steps=args.cell_latency,
        propagation_mode=INSTANT if args.mode == "instant" else GRID_LATENCY,
    )
    records = engine_run(graph, config)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}_{args.seed}.csv"
    write_csv(records, csv_path)
    metadata = {
        "experiment": name,
        "seed": args.seed,
        "spec_hash": spec.source_hash,
        "mode": config.propagation_mode,
    }
    if records.detector_labels:
        write_summary(tabulate(records), metadata, out_dir / f"{name}_{args.seed}_summary.txt")
    print(csv_path)
    return 0


def _cmd_sweep(args) -> int:
    name, parsed = _load_spec(args.spec)
    _print_diagnostics(parsed.diagnostics)
    if not parsed.ok:
        return 2
    base_spec = parsed.spec
    try:
        base_spec = dsl.with_overrides(base_spec, _parse_assignments(args.set))
        sweeps = [_parse_range(s) for s in args.sweep or ()]
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    pipeline = None
    if args.analyze:
        pipeline = PIPELINES.get(args.analyze)
        if pipeline is None:
            print(
                f"error: unknown pipeline {args.analyze!r}; "
                f"available: {', '.join(sorted(PIPELINES))}",
                file=sys.stderr,
            )
            return 2

    axes_points = [{}]
    for axis_name, values in sweeps:
        axes_points = [
            point | {axis_name: value} for point in axes_points for value in values
        ]
    plan = pipeline.plan(base_spec) if pipeline else [("", {})]
    seeds = [args.seed + k for k in range(args.repeat)]

    jobs = []
    for axes in axes_points:
        for tag, plan_assignments in plan:
            for seed in seeds:
                jobs.append((axes, tag, plan_assignments, seed))

    num_steps = _resolve_steps(args, base_spec)
    mode = INSTANT if args.mode == "instant" else GRID_LATENCY
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def execute(job):
        axes, tag, plan_assignments, seed = job
        spec = dsl.with_overrides(base_spec, {**axes, **plan_assignments})
        result = simulate(
            spec,
            seed=seed,
            num_steps=num_steps,
            mode=mode,
            cell_latency_steps=args.cell_latency,
        )
        return RunOutcome(axes=axes, tag=tag, seed=seed, result=result)

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        outcomes = list(pool.map(execute, jobs))

    if not args.no_run_files:
        for outcome in outcomes:
            parts = [f"{key.replace('.', '_')}={value:g}" for key, value in outcome.axes.items()]
            if outcome.tag:
                parts.append(f"setting={outcome.tag}")
            parts.append(f"seed={outcome.seed}")
            run_dir = out_dir / "_".join(parts)
            run_dir.mkdir(parents=True, exist_ok=True)
            write_csv(outcome.result.records, run_dir / "records.csv")
            if outcome.result.records.detector_labels:
                write_summary(
                    outcome.result.table,
                    {"experiment": name, "seed": outcome.seed},
                    run_dir / "summary.txt",
                )

    if pipeline:
        rows = pipeline.aggregate(base_spec, outcomes)
    else:
        rows = [
            {**o.axes, "seed": o.seed, **({"setting": o.tag} if o.tag else {}),
             **{f"total_{lbl}": int(t) for lbl, t in o.result.records.totals().items()}}
            for o in outcomes
        ]
    aggregate_path = out_dir / "aggregate.csv"
    _write_rows(rows, aggregate_path)
    print(aggregate_path)
    return 0


def _write_rows(rows, path) -> None:
    columns: list = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt_cell(v) for k, v in row.items()})


def _fmt_cell(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    return value


def _cmd_predict(args) -> int:
    rows: list = []
    if args.curve == "efficiency":
        _, gammas = _parse_range(f"gamma={args.gamma}")
        for gamma in gammas:
            rows.append(
                {
                    "gamma": gamma,
                    "dark_count_prob": dark_count_prob(gamma),
                    "nominal_efficiency": nominal_efficiency(gamma),
                }
            )
    elif args.curve == "mz":
        _, phis = _parse_range(f"phi={args.phi}")
        delta = args.dcr * DELTA_T
        for phi in phis:
            q1, q2 = mz_quantum(phi, args.theta)
            p1, p2 = mz_probabilities(phi, args.theta, args.d, args.dcr)
            rows.append(
                {
                    "phi": phi,
                    "q1": q1,
                    "q2": q2,
                    "p1": p1,
                    "p2": p2,
                    "p1_subtracted": mz_dark_subtracted(p1, p2, delta, delta),
                }
            )
    elif args.curve == "hom":
        _, phis = _parse_range(f"phi={args.phi}")
        for phi in phis:
            pm1, pm2 = hom_powers(phi)
            rows.append({"phi": phi, "pm1_W": pm1, "pm2_W": pm2})
    else:
        print(f"error: unknown curve {args.curve!r}", file=sys.stderr)
        return 2

    if args.out:
        _write_rows(rows, args.out)
        print(args.out)
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt_cell(v) for k, v in row.items()})
    return 0


def _cmd_validate(args) -> int:
    _, parsed = _load_spec(args.spec)
    _print_diagnostics(parsed.diagnostics)
    if not parsed.ok:
        return 2
    graph = route(parsed.spec.placements)
    _print_diagnostics(graph.diagnostics)
    if not graph.ok:
        return 2
    report, warnings = path_length_report(graph)
    _print_diagnostics(warnings)
    for det_id, entries in sorted(report.items()):
        det = graph.nodes[det_id]
        for src_id, latency in entries:
            print(f"{graph.nodes[src_id].label} -> {det.label}: {latency} steps")
    print("ok")
    return 0


def _cmd_experiments(_args) -> int:
    for name in experiment_names():
        print(name)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(
        create_app(ui_dir=args.ui_dir), host=args.host, port=args.port, log_level="info"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamlab",
        description="Seeded simulation of tabletop polarization-optics experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--steps", type=int, default=None, help="override step count")
        p.add_argument("--seconds", type=float, default=None, help="override duration")
        p.add_argument("--mode", choices=["grid", "instant"], default="grid")
        p.add_argument("--cell-latency", type=int, default=CELL_LATENCY_STEPS)
        p.add_argument(
            "--set",
            action="append",
            metavar="COMPONENT.PARAM=VALUE",
            help="override a component parameter (repeatable)",
        )
        p.add_argument(
            "--offline",
            action="store_true",
            help="accepted for spec-file parity; the CLI never animates",
        )

    p_run = sub.add_parser("run", help="execute one experiment and write CSV output")
    p_run.add_argument("spec", help="experiment file or bundled experiment name")
    add_common(p_run)
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep with optional analysis")
    p_sweep.add_argument("spec")
    add_common(p_sweep)
    p_sweep.add_argument("--sweep", action="append", metavar="COMPONENT.PARAM=START:STOP:STEP")
    p_sweep.add_argument("--repeat", type=int, default=1, help="seeded repeats per point")
    p_sweep.add_argument("--out", default="sweep_out")
    p_sweep.add_argument("--analyze", default=None, help=f"one of: {', '.join(sorted(PIPELINES))}")
    p_sweep.add_argument("--no-run-files", action="store_true", help="write only the aggregate CSV")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_pred = sub.add_parser("predict", help="emit closed-form prediction curves as CSV")
    p_pred.add_argument("curve", choices=["efficiency", "mz", "hom"])
    p_pred.add_argument("--gamma", default="0:3:0.01", help="threshold range (efficiency)")
    p_pred.add_argument("--phi", default="0:360:5", help="phase range in degrees (mz, hom)")
    p_pred.add_argument("--theta", type=float, default=0.0, help="wave-plate angle (mz)")
    p_pred.add_argument("--d", type=float, default=12.0, help="optical density (mz)")
    p_pred.add_argument("--dcr", type=float, default=1000.0, help="dark count rate (mz)")
    p_pred.add_argument("--out", default=None)
    p_pred.set_defaults(func=_cmd_predict)

    p_val = sub.add_parser("validate", help="parse, route and report path lengths")
    p_val.add_argument("spec")
    p_val.set_defaults(func=_cmd_validate)

    p_exp = sub.add_parser("experiments", help="list bundled experiments")
    p_exp.set_defaults(func=_cmd_experiments)

    p_serve = sub.add_parser("serve", help="start the local HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8077)
    p_serve.add_argument(
        "--ui-dir",
        default=None,
        help="directory holding the built web UI (index.html) to serve at /",
    )
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
