"""Command-line front end.

Subcommands:

* ``formula``  print exact, per-evaluation, and asymptotic decrease values
* ``mc``       run the Monte Carlo estimator for one cell
* ``figure``   emit a named reproduction grid as CSV (plus a JSON manifest)
* ``optimize`` run the optimizer on a named test function, writing its trace
* ``verify``   run the full gate suite; exit code 0 iff every gate passes

The default output directory comes from ``SUBSPACE_DFO_OUTDIR`` when set;
flags override it.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .errors import UnsupportedSubspaceDimensionError
from .experiments import (
    DEFAULT_NSIMS,
    DEFAULT_SEED,
    FIGURE_NAMES,
    OBJECTIVE_NAMES,
    ExperimentSpec,
    ResultRow,
    default_figure_spec,
    rows_to_csv,
    run_named_figure,
    run_optimizer_experiment,
    run_parallel_sweep,
    run_verify,
    trace_to_csv,
    write_manifest,
    write_rows,
)
from .formulas import (
    asymptotic_decrease,
    expected_decrease_ds,
    expected_decrease_mb,
    parallel_per_work,
    per_evaluation_ds,
    per_evaluation_mb,
)
from .montecarlo import estimate, estimate_per_evaluation
from .optimizer import ITERATION_KINDS, DriverConfig
from .rng import RngStream

ENV_OUTDIR = "SUBSPACE_DFO_OUTDIR"


def _default_outdir() -> Path:
    return Path(os.environ.get(ENV_OUTDIR, "."))


def _emit_rows(rows: list[ResultRow], fmt: str, out: str | None) -> None:
    if fmt == "json":
        payload = json.dumps([asdict(r) for r in rows], indent=2) + "\n"
    else:
        payload = rows_to_csv(rows)
    if out:
        Path(out).write_text(payload, encoding="ascii", newline="\n")
    else:
        sys.stdout.write(payload)


def _cmd_formula(args: argparse.Namespace) -> int:
    variant, p, d = args.variant, args.p, args.d
    per_iter = expected_decrease_ds(p, d) if variant == "ds" else expected_decrease_mb(p, d)
    per_eval = per_evaluation_ds(p, d) if variant == "ds" else per_evaluation_mb(p, d)
    rows = [
        ResultRow(variant, d, p, "exact", "per-iteration", per_iter.value),
        ResultRow(variant, d, p, "exact", "per-evaluation", per_eval.value),
    ]
    if p in (1, 2):
        asym = asymptotic_decrease(p, d, variant)
        rows.append(ResultRow(variant, d, p, "asymptotic", "per-iteration", asym.value))
    if args.cores_model is not None:
        c = args.cores_model
        work = parallel_per_work(p, d, c, variant)
        rows.append(ResultRow(variant, d, p, "exact", f"per-work({c})", work.value))
    if args.format in ("csv", "json"):
        _emit_rows(rows, args.format, args.out)
    else:
        for r in rows:
            print(f"{r.metric:>16}  {r.value:.12g}  [{r.method}]")
    return 0


def _cmd_mc(args: argparse.Namespace) -> int:
    rng = RngStream(args.seed)
    fn = estimate_per_evaluation if args.per_evaluation else estimate
    est = fn(args.variant, args.p, args.d, args.nsims, rng, args.mode)
    metric = "per-evaluation" if args.per_evaluation else "per-iteration"
    rows = [
        ResultRow(
            args.variant, args.d, args.p, "mc", metric, est.mean,
            est.std_error, est.n_sims, est.seed,
        )
    ]
    if args.format in ("csv", "json"):
        _emit_rows(rows, args.format, args.out)
    else:
        print(f"{metric}  mean = {est.mean:.12g}  std_error = {est.std_error:.3g}  "
              f"(n = {est.n_sims}, seed = {est.seed})")
    return 0


def _parse_cores(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok)


def _cmd_figure(args: argparse.Namespace) -> int:
    out_dir = Path(args.out) if args.out else _default_outdir()
    out_dir.mkdir(parents=True, exist_ok=True)
    name = args.name
    nsims = args.nsims if args.nsims is not None else DEFAULT_NSIMS
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    if name == "parallel-sweep":
        variant = args.variant or "ds"
        d = args.d or (64 if variant == "ds" else 128)
        cores = _parse_cores(args.cores_model) if args.cores_model else (
            (2, 4, 8) if variant == "ds" else (1, 2, 4, 8)
        )
        rows, summaries = run_parallel_sweep(variant, d, cores, n_sims=nsims, seed=seed)
        manifest_extra = {
            "argmax": {str(s.cores): s.argmax_p for s in summaries},
            "ties": {str(s.cores): list(s.tied_p) for s in summaries},
        }
        spec_payload = {"name": name, "variant": variant, "d": d, "cores": list(cores),
                        "n_sims": nsims, "seed": seed}
    else:
        if args.config:
            spec = ExperimentSpec.from_dict(json.loads(Path(args.config).read_text()))
        else:
            spec = default_figure_spec(name)
        # Flags supplied on the command line win over config-file values.
        spec = spec.merged(
            n_sims=args.nsims,
            seed=args.seed,
            d_values=(args.d,) if args.d else None,
        )
        rows = run_named_figure(spec)
        manifest_extra = {}
        spec_payload = asdict(spec)
    csv_path = out_dir / f"{name}.csv"
    write_rows(csv_path, rows)
    write_manifest(
        out_dir / f"{name}.manifest.json",
        {
            "spec": spec_payload,
            "version": __version__,
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            **manifest_extra,
        },
    )
    print(f"wrote {csv_path}")
    return 0


def _cmd_optimize(args: argparse.Namespace) -> int:
    config = DriverConfig(
        p=args.p,
        max_evaluations=args.budget,
        initial_step=args.delta0,
        iteration_kind=args.iteration,
    )
    trace, objective = run_optimizer_experiment(args.function, args.d, config, args.seed)
    payload = trace_to_csv(trace)
    if args.out:
        Path(args.out).write_text(payload, encoding="ascii", newline="\n")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(payload)
    final = trace.final
    print(
        f"# final best = {final.best_value:.12g} after {final.eval_count} evaluations "
        f"({objective.name})",
        file=sys.stderr,
    )
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    out_dir = Path(args.out) if args.out else None
    results, exit_code = run_verify(seed=args.seed, n_sims=args.nsims, out_dir=out_dir)
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        print(f"[{tag}] criterion {r.criterion} ({r.name}): {r.detail}")
    print("verify:", "all gates passed" if exit_code == 0 else "GATE FAILURE")
    return exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subspace-dfo",
        description="Random-subspace derivative-free optimization and its decrease analysis",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, need_pd: bool = True) -> None:
        if need_pd:
            p.add_argument("--variant", choices=("ds", "mb"), required=True)
            p.add_argument("--d", type=int, required=True)
            p.add_argument("--p", type=int, required=True)
        p.add_argument("--nsims", type=int, default=DEFAULT_NSIMS)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", choices=("text", "csv", "json"), default="text")

    p_formula = sub.add_parser("formula", help="print exact/asymptotic decrease values")
    add_common(p_formula)
    p_formula.add_argument("--cores-model", type=int, default=None,
                           help="also print the per-work value for this core count")
    p_formula.set_defaults(fn=_cmd_formula)

    p_mc = sub.add_parser("mc", help="run the Monte Carlo estimator")
    add_common(p_mc)
    p_mc.add_argument("--mode", choices=("reduced", "full-basis"), default="reduced")
    p_mc.add_argument("--per-evaluation", action="store_true")
    p_mc.set_defaults(fn=_cmd_mc)

    p_fig = sub.add_parser("figure", help="emit a named reproduction grid as CSV")
    p_fig.add_argument("name", choices=FIGURE_NAMES)
    p_fig.add_argument("--variant", choices=("ds", "mb"), default=None)
    p_fig.add_argument("--d", type=int, default=None)
    p_fig.add_argument("--nsims", type=int, default=None)
    p_fig.add_argument("--seed", type=int, default=None)
    p_fig.add_argument("--out", type=str, default=None)
    p_fig.add_argument("--config", type=str, default=None,
                       help="JSON file with ExperimentSpec fields (flags override)")
    p_fig.add_argument("--cores-model", type=str, default=None,
                       help="comma-separated core counts for parallel-sweep")
    p_fig.set_defaults(fn=_cmd_figure)

    p_opt = sub.add_parser("optimize", help="run the optimizer on a named test function")
    p_opt.add_argument("--function", choices=OBJECTIVE_NAMES, required=True)
    p_opt.add_argument("--d", type=int, required=True)
    p_opt.add_argument("--p", type=int, required=True)
    p_opt.add_argument("--iteration", choices=ITERATION_KINDS, default="ds-complete")
    p_opt.add_argument("--budget", type=int, required=True)
    p_opt.add_argument("--delta0", type=float, default=1.0)
    p_opt.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_opt.add_argument("--out", type=str, default=None)
    p_opt.set_defaults(fn=_cmd_optimize)

    p_verify = sub.add_parser("verify", help="run the full gate suite")
    p_verify.add_argument("--nsims", type=int, default=DEFAULT_NSIMS)
    p_verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_verify.add_argument("--out", type=str, default=None)
    p_verify.set_defaults(fn=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, UnsupportedSubspaceDimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
