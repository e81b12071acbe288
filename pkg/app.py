"""
Command-line entry point.

    python app.py generate   --case 4 --n 200 --seed 7 --out d4.csv
    python app.py train      --data d4.csv --loss hinge --aggregate atk --k 10 --C 100 --out m.json
    python app.py sweep-k    --data d4.csv --loss hinge --C 100 --repeats 10 --out sweep.csv
    python app.py gridsearch --data monk.svm --loss logistic --out grid.json
    python app.py svm-dual   --data d1.csv --kernel rbf --gamma 0.5 --C 1 --k 20 --out dual.json
    python app.py eval       --model m.json --data d4.csv
    python app.py replay     --manifest m.json.manifest.json

Every command writes <out>.manifest.json next to its output. Exit codes:
0 success, 2 usage, 3 data, 4 convergence.
"""

import argparse
import logging
import sys
from pathlib import Path

from core.errors import (
    ConvergenceError,
    DataError,
    DomainError,
    InvalidTargetError,
    ParameterError,
    ShapeError,
    UndefinedMetricError,
    UsageError,
)
from core.kernels import KernelSpec
from core.system_builder import TOOL_VERSION, build_run, configure_logging
from evaluation.metrics import PRIMARY_METRIC, SECONDARY_METRIC, score
from evaluation.run_evaluation import (
    DEFAULT_C_GRID,
    DEFAULT_K_POINTS,
    DEFAULT_REPEATS,
    DEFAULT_SWEEP_C,
    compare_objectives,
    grid_search,
    k_grid,
    sweep_k,
    train_size,
)
from generator.report import (
    RunManifest,
    dual_model_record,
    format_summary_table,
    grid_record,
    linear_model_record,
    load_model,
    manifest_path,
    model_scores,
    write_json,
    write_sweep_csv,
    write_trace_csv,
)
from ingestion.loader import load_dataset, write_dataset
from ingestion.synthetic import CASE_IDS, generate_gaussian_case, generate_sinc
from optimization.sgd import DEFAULT_ETA0, DEFAULT_ITERATIONS, DEFAULT_RECORD_EVERY, TrainConfig, train
from optimization.svm_dual import DEFAULT_TOL, dual_solve, nu_property_check

logger = logging.getLogger("app")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4

TRAINABLE_AGGREGATES = ("average", "maximum", "atk")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _finish(args, outputs: list[Path], argv: list[str]) -> None:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = RunManifest(
        command=args.command,
        config=config,
        seed=int(getattr(args, "seed", 0)),
        tool_version=TOOL_VERSION,
        argv=list(argv),
        outputs=[str(p) for p in outputs],
    )
    manifest.write(manifest_path(args.out))


def cmd_generate(args, argv) -> int:
    if args.sinc:
        data = generate_sinc(n=args.n or 1000, seed=args.seed)
    else:
        data = generate_gaussian_case(args.case, n_total=args.n or 200, seed=args.seed)
    out = write_dataset(data, args.out)
    _finish(args, [out], argv)
    print(f"✅ Wrote {data.name}: {data.n} x {data.d} -> {out}")
    return EXIT_OK


def _resolve_k(aggregate: str, k: int | None, n: int) -> int:
    if aggregate not in TRAINABLE_AGGREGATES:
        raise UsageError(
            f"aggregate '{aggregate}' is not convex and cannot be trained; "
            f"use one of {', '.join(TRAINABLE_AGGREGATES)}"
        )
    if aggregate == "average":
        resolved = n
    elif aggregate == "maximum":
        resolved = 1
    else:
        if k is None:
            raise UsageError("--aggregate atk needs --k")
        return k
    if k is not None and k != resolved:
        raise UsageError(f"--aggregate {aggregate} fixes k={resolved}, got --k {k}")
    return resolved


def cmd_train(args, argv) -> int:
    run = build_run(args.data, args.loss, args.task)
    k = _resolve_k(args.aggregate, args.k, run.data.n)
    config = TrainConfig(
        k=k,
        iterations=args.iters,
        eta0=args.eta0,
        seed=args.seed,
        record_every=args.record_every,
    )
    state, trace = train(run.data, run.loss, config, args.C)

    out = write_json(
        linear_model_record(state, run.loss, args.aggregate, config, run.data, trace[-1][1]),
        args.out,
    )
    trace_out = write_trace_csv(trace, Path(args.out).with_suffix(".trace.csv"))
    _finish(args, [out, trace_out], argv)
    print(f"✅ Trained {run.loss.kind}/{args.aggregate} k={k} C={args.C:g}: objective {trace[-1][1]:.6f}")
    print(f"   lambda = {state.lam:.6f}; model -> {out}")
    return EXIT_OK


def _template(args) -> TrainConfig:
    # k and seed are set per grid cell
    return TrainConfig(k=1, iterations=args.iters, eta0=args.eta0, record_every=args.iters)


def cmd_sweep_k(args, argv) -> int:
    run = build_run(args.data, args.loss, args.task)
    k_values = args.k_values or k_grid(train_size(run.data.n), args.k_points)
    rows = sweep_k(
        run.data, run.loss, k_values, args.C, args.repeats, args.seed, _template(args), jobs=args.jobs
    )
    out = write_sweep_csv(rows, args.out)
    _finish(args, [out], argv)

    percent = run.loss.task == "classification"
    print(f"✅ Swept {len(rows)} values of k at C={args.C:g} -> {out}")
    for k, mean, std in rows:
        if percent:
            print(f"   k={k:<6d} {mean * 100:6.2f}% ({std * 100:.2f})")
        else:
            print(f"   k={k:<6d} {mean:.4f} ({std:.4f})")
    return EXIT_OK


def cmd_gridsearch(args, argv) -> int:
    run = build_run(args.data, args.loss, args.task)
    params = {
        "loss": run.loss.kind,
        "C_grid": args.C_grid,
        "k_points": args.k_points,
        "repeats": args.repeats,
        "seed": args.seed,
        "iterations": args.iters,
        "eta0": args.eta0,
    }
    percent = run.loss.task == "classification"

    if args.compare:
        results = compare_objectives(
            run.data, run.loss, args.C_grid, args.repeats, args.seed, _template(args),
            k_points=args.k_points, jobs=args.jobs,
        )
        record = {"version": 1, "params": params, "results": {n: r.to_dict() for n, r in results.items()}}
    else:
        ks = k_grid(train_size(run.data.n), args.k_points)
        result = grid_search(
            run.data, run.loss, ks, args.C_grid, args.repeats, args.seed, _template(args),
            jobs=args.jobs, extend_c_steps=args.extend_c,
        )
        results = {"atk": result}
        record = grid_record(result, params)

    out = write_json(record, args.out)
    _finish(args, [out], argv)
    print(f"✅ Grid search on {run.data.name} -> {out}")
    print(format_summary_table(results, f"{run.loss.kind} ({PRIMARY_METRIC[run.loss.task]})", percent))
    return EXIT_OK


def cmd_svm_dual(args, argv) -> int:
    data = load_dataset(args.data, task="classification")
    kernel = KernelSpec(kind=args.kernel, gamma=args.gamma)
    sol = dual_solve(data, kernel, args.C, args.k, tol=args.tol, max_iters=args.max_iters)
    # the nu-SVM bracket only holds for C = 1 and K(x, x) <= 1
    fractions = None
    if kernel.kind == "rbf" and args.C == 1.0:
        fractions = nu_property_check(sol, data, kernel, args.k, tol=args.tol)

    out = write_json(dual_model_record(sol, fractions), args.out)
    _finish(args, [out], argv)
    print(f"✅ AT_k-SVM: {sol.support_indices.size} support vectors, rho={sol.rho:.4f} -> {out}")
    if fractions is not None:
        support_fraction, margin_error_fraction = fractions
        print(
            f"   margin errors {margin_error_fraction:.3f} <= k/n {args.k / data.n:.3f} "
            f"<= support {support_fraction:.3f}"
        )
    return EXIT_OK


def cmd_eval(args, argv) -> int:
    kind, model, record = load_model(args.model)
    task = record.get("task", "classification")
    data = load_dataset(args.data, task=task)
    predictions = model_scores(model, data)

    metrics = {
        PRIMARY_METRIC[task]: score(PRIMARY_METRIC[task], predictions, data.targets),
        SECONDARY_METRIC[task]: score(SECONDARY_METRIC[task], predictions, data.targets),
    }
    print(f"✅ {kind} model on {data.name} ({data.n} samples)")
    for name, value in metrics.items():
        print(f"   {name}: {value * 100:.2f}%" if task == "classification" else f"   {name}: {value:.6f}")

    if args.out:
        out = write_json({"version": 1, "model_kind": kind, "data": str(args.data), "metrics": metrics}, args.out)
        _finish(args, [out], argv)
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    manifest = RunManifest.load(args.manifest)
    if manifest.command == "replay" or not manifest.argv:
        raise UsageError(f"{args.manifest} does not record a replayable command")
    logger.info("Replaying '%s' from %s", manifest.command, args.manifest)
    return _dispatch(build_parser().parse_args(manifest.argv), manifest.argv)


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS, help="SGD iterations per run")
    p.add_argument("--eta0", type=float, default=DEFAULT_ETA0, help="step size scale, eta_t = eta0/sqrt(t)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--task", choices=("classification", "regression"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matk", description="Minimum average top-k learning")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--case", type=int, choices=CASE_IDS)
    source.add_argument("--sinc", action="store_true")
    p.add_argument("--n", type=int, default=None, help="samples (200 for cases, 1000 for sinc)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help=".csv for dense output, anything else sparse")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a linear MAT_k model")
    p.add_argument("--data", required=True)
    p.add_argument("--loss", required=True)
    p.add_argument("--aggregate", default="atk")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--record-every", type=int, default=DEFAULT_RECORD_EVERY)
    p.add_argument("--out", required=True)
    _add_training_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep-k", help="test score versus k at fixed C")
    p.add_argument("--data", required=True)
    p.add_argument("--loss", required=True)
    p.add_argument("--C", type=float, default=DEFAULT_SWEEP_C)
    p.add_argument("--repeats", type=int, default=DEFAULT_REPEATS)
    p.add_argument("--k-values", type=_int_list, default=None)
    p.add_argument("--k-points", type=int, default=DEFAULT_K_POINTS)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_training_flags(p)
    p.set_defaults(func=cmd_sweep_k)

    p = sub.add_parser("gridsearch", help="select (k, C) on validation splits")
    p.add_argument("--data", required=True)
    p.add_argument("--loss", required=True)
    p.add_argument("--C-grid", type=_float_list, default=list(DEFAULT_C_GRID))
    p.add_argument("--k-points", type=int, default=DEFAULT_K_POINTS)
    p.add_argument("--repeats", type=int, default=DEFAULT_REPEATS)
    p.add_argument("--extend-c", type=int, default=0, help="max one-decade extensions of the C grid")
    p.add_argument("--compare", action="store_true", help="also run the maximum and average objectives")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_training_flags(p)
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("svm-dual", help="solve the AT_k-SVM dual")
    p.add_argument("--data", required=True)
    p.add_argument("--kernel", choices=("linear", "rbf"), default="linear")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_svm_dual)

    p = sub.add_parser("eval", help="score a saved model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_replay)

    return parser


def _dispatch(args, argv) -> int:
    return args.func(args, argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        return _dispatch(args, argv)
    except ConvergenceError as e:
        logger.error("Solver did not converge: %s", e)
        return EXIT_CONVERGENCE
    except (InvalidTargetError, UndefinedMetricError, DataError, FileNotFoundError) as e:
        logger.error("%s", e)
        return EXIT_DATA
    except (UsageError, ParameterError, DomainError, ShapeError) as e:
        logger.error("%s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
