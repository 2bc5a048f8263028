"""Command-line interface.

Subcommands: xshift, yshift, bound (JSON reports), fig1, validate-bound,
concentration (CSV tables). All randomness flows from --seed; identical
invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bound import datashifts
from .data import load_csv
from .experiments import (
    FIG1_COLUMNS,
    SWEEP_MARGINAL_TOL,
    SWEEP_MAX_ITER,
    plot_fig1,
    run_bound_validation,
    run_concentration_concept,
    run_concentration_xshift,
    run_fig1,
    write_csv,
)
from .lipschitz import LipschitzSpec, LossSpec, loss_lipschitz
from .shifts import EstimatorKind
from .sinkhorn import SinkhornConvergenceError, SolverConfig


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _add_io_args(p: argparse.ArgumentParser, labels: bool):
    p.add_argument("--source", required=True, help="source-domain CSV (header row)")
    p.add_argument("--target", required=True, help="target-domain CSV (header row)")
    p.add_argument(
        "--label-cols",
        default="",
        help="comma-separated label column names" + ("" if labels else " (optional)"),
    )
    p.add_argument("--beta", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-splits", type=int, default=1)
    p.add_argument(
        "--estimator", choices=["debiased", "plugin"], default="debiased",
        help="covariate-shift estimator",
    )
    p.add_argument("--marginal-tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datashifts",
        description="Quantify covariate/concept shift between two samples and "
        "estimate the cross-domain error bound.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("xshift", help="covariate shift between two CSV samples")
    _add_io_args(p, labels=False)

    p = sub.add_parser("yshift", help="concept shift between two labeled CSV samples")
    _add_io_args(p, labels=True)

    p = sub.add_parser("bound", help="full pipeline: shifts plus optional error bound")
    _add_io_args(p, labels=True)
    p.add_argument(
        "--lipschitz",
        default=None,
        help='JSON fragment, e.g. \'{"l_h": 2.0, "loss": {"kind": "absolute_error"}}\'',
    )
    p.add_argument("--source-error", type=float, default=None)

    p = sub.add_parser("fig1", help="estimator-bias sweep over (d, n, offset) cells")
    p.add_argument("--dims", type=_int_list, default=[2, 10, 30, 50, 70])
    p.add_argument("--sizes", type=_int_list, default=[250, 500, 1000, 2000, 4000])
    p.add_argument("--offsets", type=_float_list, default=[0, 2, 4, 6, 8, 10])
    p.add_argument("--beta", type=float, default=1e-3)
    p.add_argument("--seeds", type=int, default=20, help="number of seeds per cell")
    p.add_argument("--num-splits", type=int, default=1)
    p.add_argument("--marginal-tol", type=float, default=SWEEP_MARGINAL_TOL)
    p.add_argument("--max-iter", type=int, default=SWEEP_MAX_ITER)
    p.add_argument("--out", required=True, help="results CSV path")
    p.add_argument("--plot", default=None, help="optional plot image path")

    p = sub.add_parser("validate-bound", help="bound-validity trials on random tasks")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--beta", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("concentration", help="estimator-deviation sweep across n")
    p.add_argument("--mode", choices=["xshift", "concept-det", "concept-noisy"], default="xshift")
    p.add_argument("--sizes", type=_int_list, default=[250, 500, 1000, 2000, 4000])
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--offset", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--out", required=True)

    return parser


def _emit(text: str, out_path: str | None):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _report_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _run_pipeline(args, need_labels: bool, lipschitz=None, source_error=None) -> dict:
    label_cols = [c for c in args.label_cols.split(",") if c.strip()]
    if need_labels and not label_cols:
        raise ValueError("--label-cols is required for this command")
    source = load_csv(args.source, label_cols or None)
    target = load_csv(args.target, label_cols or None)
    config = SolverConfig(
        beta=args.beta,
        max_iterations=args.max_iter,
        marginal_tolerance=args.marginal_tol,
    )
    kind = EstimatorKind.DEBIASED if args.estimator == "debiased" else EstimatorKind.PLUG_IN
    shifts, report = datashifts(
        source,
        target,
        config,
        lipschitz=lipschitz,
        source_error=source_error,
        seed=args.seed,
        num_splits=args.num_splits,
        estimator_kind=kind,
    )
    return report.to_dict() if report is not None else shifts.to_dict()


def _parse_lipschitz(fragment: str) -> LipschitzSpec:
    spec = json.loads(fragment)
    if "loss" in spec:
        l_lab, l_out = loss_lipschitz(LossSpec.from_dict(spec["loss"]))
    else:
        l_lab = float(spec["l_loss_label"])
        l_out = float(spec["l_loss_output"])
    return LipschitzSpec(l_h=float(spec["l_h"]), l_loss_label=l_lab, l_loss_output=l_out)


def run(args) -> int:
    if args.command in ("xshift", "yshift"):
        payload = _run_pipeline(args, need_labels=args.command == "yshift")
        _emit(_report_json(payload), args.out)
    elif args.command == "bound":
        lipschitz = _parse_lipschitz(args.lipschitz) if args.lipschitz else None
        payload = _run_pipeline(
            args, need_labels=True, lipschitz=lipschitz, source_error=args.source_error
        )
        _emit(_report_json(payload), args.out)
    elif args.command == "fig1":
        rows = run_fig1(
            args.dims,
            args.sizes,
            args.offsets,
            beta=args.beta,
            seeds=range(args.seeds),
            marginal_tol=args.marginal_tol,
            max_iter=args.max_iter,
            num_splits=args.num_splits,
        )
        write_csv(rows, args.out, FIG1_COLUMNS)
        if args.plot:
            plot_fig1(rows, args.plot)
    elif args.command == "validate-bound":
        rows = run_bound_validation(args.trials, n_per_domain=args.n, beta=args.beta, seed=args.seed)
        write_csv(rows, args.out)
    elif args.command == "concentration":
        sizes, seeds = args.sizes, range(args.seeds)
        if args.mode == "xshift":
            rows = run_concentration_xshift(
                sizes,
                seeds,
                dimension=args.dim if args.dim is not None else 70,
                offset=args.offset if args.offset is not None else 6.0,
                beta=args.beta if args.beta is not None else 1e-3,
            )
        else:
            rows = run_concentration_concept(
                sizes,
                seeds,
                dimension=args.dim if args.dim is not None else 2,
                concept_offset=args.offset if args.offset is not None else 1.0,
                noise_sigma=0.5 if args.mode == "concept-noisy" else 0.0,
                beta=args.beta if args.beta is not None else 1e-2,
            )
        write_csv(rows, args.out)
    else:  # pragma: no cover - argparse enforces the choices
        raise AssertionError(args.command)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except SinkhornConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
