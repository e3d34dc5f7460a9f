"""Command-line driver for synthetic-data experiments.

Verbs:
  synth    generate a regulatory-network dataset (X.csv, y.csv, graph.tsv,
           w_true.csv)
  solve    fit constrained classification/regression; sweep eta grids and
           random train/test folds, emitting traces, metrics and figures
  project  run the level-set projection routine on a vector from a file
  eval     compute MSE/PMSE or AUC for stored weights on a dataset
  rerun    re-execute the command recorded in a manifest.json

Every command writes a manifest.json holding the exact argument vector it
ran with (minus the output directory), so `levelproj rerun` reproduces the
CSV/JSON outputs bit for bit.  Exit codes: 0 success, 2 usage error,
3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .constraints import ConstraintKind, ConstraintSpec, FeatureGraph
from .data import (Dataset, DatasetKind, NetworkExample, NetworkParams,
                   generate_network, generate_response, load_csv, load_graph,
                   load_matrix, load_vector, mean_squared_error, roc_auc,
                   save_graph, save_matrix, signed_graph_for_example,
                   split_folds, true_regressor)
from .errors import (DataFormatError, InfeasibleConstraintError,
                     LevelprojError, NumericalError)
from .projection import ProjectionOptions, project_level_set
from .risk import LossKind, RiskModel, Task, posterior
from .solver import (ConstantOverBeta, FixedStep, SolverConfig, solve,
                     solve_path)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

OUTDIR_ENV = "LEVELPROJ_OUTDIR"
_DEFAULT_OUTDIR = "levelproj-out"


class _UsageError(LevelprojError):
    pass


# ---------------------------------------------------------------------------
# Output helpers

def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_json(path: Path, obj) -> None:
    _atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
            for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _save_vector(path: Path, v) -> None:
    save_matrix(path, np.asarray(v, dtype=float).reshape(-1, 1))


def _strip_outdir(argv: list[str]) -> list[str]:
    kept = []
    skip = False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--outdir":
            skip = True
            continue
        if tok.startswith("--outdir="):
            continue
        kept.append(tok)
    return kept


def _write_manifest(outdir: Path, command: str, argv: list[str],
                    outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "argv": _strip_outdir(argv),
        "package_version": __version__,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "outputs": sorted(outputs),
    }
    _write_json(outdir / "manifest.json", manifest)


def _resolve_outdir(args) -> Path:
    outdir = args.outdir or os.environ.get(OUTDIR_ENV) or _DEFAULT_OUTDIR
    path = Path(outdir)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Argument plumbing

def _add_output_flags(p) -> None:
    p.add_argument("--outdir", help="output directory (default: "
                   f"${OUTDIR_ENV} or ./{_DEFAULT_OUTDIR})")
    p.add_argument("--no-figures", action="store_true",
                   help="skip PNG rendering, write delimited outputs only")


def _add_solver_flags(p) -> None:
    p.add_argument("--step-scale", type=float, default=1.0,
                   help="step size as a multiple of 1/beta (default 1.0)")
    p.add_argument("--gamma", type=float,
                   help="explicit fixed step size (overrides --step-scale)")
    p.add_argument("--max-outer", type=int, default=10_000)
    p.add_argument("--rel-tol", type=float, default=1e-8,
                   help="relative iterate-change stopping tolerance")
    p.add_argument("--target-l0", type=int,
                   help="stop once the iterate has at most this many nonzeros")
    p.add_argument("--zero-threshold", type=float, default=1e-10)
    p.add_argument("--max-inner", type=int, default=50,
                   help="projection budget per outer iteration")
    p.add_argument("--feas-tol", type=float, default=0.0,
                   help="accepted residual constraint violation")
    p.add_argument("--dist-tol", type=float,
                   help="inner-loop stop on step norm below this value")
    p.add_argument("--strict-schedule", action="store_true",
                   help="tighten projections on a summable-error schedule")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levelproj",
        description="Constrained sparse regression/classification "
                    "experiments with level-set projections.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic network dataset")
    p.add_argument("--example", type=int, choices=(1, 2, 3), required=True,
                   help="activated/inhibited split of the true regressor")
    p.add_argument("--m", type=int, required=True, help="sample count")
    p.add_argument("--n-reg", type=int, default=10)
    p.add_argument("--n-g", type=int, default=10)
    p.add_argument("--correlation", type=float, default=0.7)
    p.add_argument("--sigma", type=float, default=2.0, help="response noise")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--signed-graph", action="store_true",
                   help="write graph.tsv with activation/inhibition signs")
    _add_output_flags(p)

    p = sub.add_parser("solve", help="solve a constrained fit or sweep")
    p.add_argument("--task", choices=("regression", "classification"),
                   help="default: inferred from the labels")
    p.add_argument("--loss", choices=("logistic", "matsusita"),
                   default="logistic")
    p.add_argument("--data", help="combined CSV, label/response column last")
    p.add_argument("--x", help="feature matrix CSV")
    p.add_argument("--y", help="response/label vector CSV")
    p.add_argument("--graph", help="graph TSV for the pairwise constraints")
    p.add_argument("--constraint", required=True,
                   help="one of l1, pairwise-max, pairwise-diff, "
                        "signed-pairwise-diff; comma-separate to compare")
    p.add_argument("--eta", type=float, help="single constraint bound")
    p.add_argument("--eta-grid",
                   help="LO:HI:N geometric grid; semicolon-separate to give "
                        "one grid per constraint")
    p.add_argument("--eta-list", help="explicit comma-separated eta values")
    p.add_argument("--folds", type=int,
                   help="number of random train/test folds")
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--fold-seed", type=int, default=0)
    p.add_argument("--w-true", help="true coefficients CSV (figures only)")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker threads across folds")
    _add_solver_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("project", help="project a vector onto a level set")
    p.add_argument("--constraint", required=True,
                   help="l1, pairwise-max, pairwise-diff or "
                        "signed-pairwise-diff")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--input", required=True, help="vector CSV to project")
    p.add_argument("--graph", help="graph TSV for the pairwise constraints")
    p.add_argument("--max-inner", type=int, default=50)
    p.add_argument("--feas-tol", type=float, default=0.0)
    p.add_argument("--dist-tol", type=float)
    p.add_argument("--trace", action="store_true",
                   help="emit per-iteration convergence records")
    _add_output_flags(p)

    p = sub.add_parser("eval", help="evaluate stored weights on data")
    p.add_argument("--w", required=True, help="weights CSV")
    p.add_argument("--data", help="combined CSV, label/response column last")
    p.add_argument("--x", help="feature matrix CSV")
    p.add_argument("--y", help="response/label vector CSV")
    p.add_argument("--test-data", help="held-out combined CSV")
    p.add_argument("--test-x", help="held-out feature matrix CSV")
    p.add_argument("--test-y", help="held-out response vector CSV")
    p.add_argument("--task", choices=("regression", "classification"))
    p.add_argument("--loss", choices=("logistic", "matsusita"),
                   default="logistic")
    _add_output_flags(p)

    p = sub.add_parser("rerun", help="re-execute a recorded manifest")
    p.add_argument("manifest", help="path to a manifest.json")
    p.add_argument("--outdir", required=True,
                   help="directory for the reproduced outputs")

    return parser


def _parse_constraints(text: str) -> list[ConstraintKind]:
    kinds = []
    for name in text.split(","):
        name = name.strip()
        try:
            kinds.append(ConstraintKind(name))
        except ValueError:
            raise _UsageError(
                f"unknown constraint {name!r}; choose from "
                f"{', '.join(k.value for k in ConstraintKind)}")
    return kinds


def _parse_eta_grids(args, n_constraints: int) -> list[np.ndarray]:
    given = [x is not None for x in (args.eta, args.eta_grid, args.eta_list)]
    if sum(given) != 1:
        raise _UsageError("give exactly one of --eta, --eta-grid, --eta-list")
    if args.eta is not None:
        grids = [np.array([args.eta])]
    elif args.eta_list is not None:
        grids = [np.array([float(v) for v in args.eta_list.split(",")])]
    else:
        grids = []
        for part in args.eta_grid.split(";"):
            fields = part.split(":")
            if len(fields) != 3:
                raise _UsageError(f"--eta-grid part {part!r} is not LO:HI:N")
            lo, hi, n = float(fields[0]), float(fields[1]), int(fields[2])
            if lo <= 0 or hi < lo or n < 1:
                raise _UsageError(f"--eta-grid part {part!r} is not a valid "
                                  "geometric range")
            grids.append(np.geomspace(lo, hi, n))
    if len(grids) == 1:
        grids = grids * n_constraints
    if len(grids) != n_constraints:
        raise _UsageError("need one eta grid per constraint")
    return grids


def _load_dataset(args) -> Dataset:
    if args.data is not None:
        if args.x is not None or args.y is not None:
            raise _UsageError("--data conflicts with --x/--y")
        return load_csv(args.data)
    if args.x is None or args.y is None:
        raise _UsageError("give --data or both --x and --y")
    X = load_matrix(args.x)
    y = load_vector(args.y)
    kind = (DatasetKind.LABELS if np.all(np.abs(y) == 1.0)
            else DatasetKind.RESPONSES)
    return Dataset(X, y, kind)


def _resolve_task(args, dataset: Dataset) -> Task:
    if args.task == "regression":
        return Task.REGRESSION
    if args.task == "classification":
        return Task.CLASSIFICATION
    return (Task.CLASSIFICATION if dataset.kind is DatasetKind.LABELS
            else Task.REGRESSION)


def _make_model(task: Task, loss_name: str, X, y) -> RiskModel:
    if task is Task.CLASSIFICATION:
        return RiskModel.classification(X, y, LossKind(loss_name))
    return RiskModel.regression(X, y)


def _make_spec(kind: ConstraintKind, eta: float,
               graph: FeatureGraph | None) -> ConstraintSpec:
    if kind is not ConstraintKind.L1 and graph is None:
        raise _UsageError(f"constraint {kind.value} requires --graph")
    return ConstraintSpec(kind, eta, graph if kind is not ConstraintKind.L1
                          else None)


def _solver_config(args) -> SolverConfig:
    policy = (FixedStep(args.gamma) if args.gamma is not None
              else ConstantOverBeta(args.step_scale))
    proj = ProjectionOptions(max_inner_iters=args.max_inner,
                             feasibility_tolerance=args.feas_tol,
                             distance_tolerance=args.dist_tol)
    return SolverConfig(step_policy=policy, projection=proj,
                        max_outer_iters=args.max_outer,
                        rel_change_tolerance=args.rel_tol,
                        target_l0=args.target_l0,
                        zero_threshold=args.zero_threshold,
                        strict_projection_schedule=args.strict_schedule)


def _train_metric(task: Task, loss_name: str, model: RiskModel, w) -> tuple[str, float]:
    if task is Task.CLASSIFICATION:
        scores = posterior(LossKind(loss_name), model.X @ w)
        return "train_auc", roc_auc(model.y, scores)
    return "train_mse", mean_squared_error(model.y, model.X @ w)


# ---------------------------------------------------------------------------
# Commands

def cmd_synth(args, argv: list[str]) -> int:
    outdir = _resolve_outdir(args)
    if args.n_g != 10:
        raise _UsageError("the example regressors assume --n-g 10")
    params = NetworkParams(m=args.m, n_reg=args.n_reg, n_g=args.n_g,
                           correlation=args.correlation,
                           noise_sigma=args.sigma, seed=args.seed)
    example = NetworkExample(args.example)
    X, graph = generate_network(params)
    w = true_regressor(example, params.d)
    y = generate_response(X, w, params.noise_sigma, seed=params.seed + 1)
    if args.signed_graph:
        graph = signed_graph_for_example(example, params.d, params.n_reg,
                                         params.n_g)
    save_matrix(outdir / "X.csv", X)
    _save_vector(outdir / "y.csv", y)
    _save_vector(outdir / "w_true.csv", w)
    save_graph(outdir / "graph.tsv", graph)
    outputs = ["X.csv", "y.csv", "w_true.csv", "graph.tsv"]
    if not args.no_figures:
        from .figures import save_weights_figure
        save_weights_figure(w, outdir / "w_true.png",
                            title="true coefficients")
        outputs.append("w_true.png")
    _write_manifest(outdir, "synth", argv, outputs)
    print(f"wrote m={params.m} d={params.d} dataset to {outdir}")
    return EXIT_OK


def _solve_single(args, argv, outdir, dataset, task, kinds, grids,
                  graph) -> int:
    cfg = _solver_config(args)
    if len(kinds) != 1:
        raise _UsageError("multiple constraints need --folds to compare")
    kind = kinds[0]
    grid = grids[0]
    model = _make_model(task, args.loss, dataset.X, dataset.y)
    outputs = []
    if len(grid) == 1:
        spec = _make_spec(kind, float(grid[0]), graph)
        result = solve(model, spec, cfg)
        results = [result]
    else:
        spec = _make_spec(kind, float(grid[0]), graph)
        results = solve_path(model, spec, grid, cfg)
        result = results[-1]
    _save_vector(outdir / "w.csv", result.w_final)
    trace = result.trace
    _write_csv(outdir / "trace.csv",
               ["iteration", "risk", "constraint", "nonzeros",
                "inner_iterations"],
               [(n, trace.risk[n], trace.constraint[n], trace.nonzeros[n],
                 trace.inner_iterations[n]) for n in range(len(trace))])
    outputs += ["w.csv", "trace.csv"]
    metric_name, metric = _train_metric(task, args.loss, model, result.w_final)
    metrics = {
        "task": task.value,
        "constraint": kind.value,
        "eta": float(result.eta),
        "risk": float(trace.risk[-1]),
        "constraint_value": float(trace.constraint[-1]),
        "nonzeros": int(trace.nonzeros[-1]),
        "stop_reason": result.stop_reason.value,
        "outer_iterations": len(trace) - 1,
        metric_name: float(metric),
    }
    if len(grid) > 1:
        rows = []
        for res in results:
            _, m_val = _train_metric(task, args.loss, model, res.w_final)
            rows.append((res.eta, res.trace.risk[-1], res.trace.constraint[-1],
                         res.trace.nonzeros[-1], m_val))
        _write_csv(outdir / "sweep.csv",
                   ["eta", "risk", "constraint", "nonzeros", metric_name],
                   rows)
        outputs.append("sweep.csv")
    _write_json(outdir / "metrics.json", metrics)
    outputs.append("metrics.json")
    if not args.no_figures:
        from .figures import (save_sweep_figure, save_trace_figure,
                              save_weights_figure)
        save_trace_figure(trace, outdir / "trace.png",
                          title=f"{kind.value}, eta={result.eta:g}")
        w_true = load_vector(args.w_true) if args.w_true else None
        save_weights_figure(result.w_final, outdir / "weights.png",
                            w_true=w_true, title="estimated coefficients")
        outputs += ["trace.png", "weights.png"]
        if len(grid) > 1:
            save_sweep_figure([r.eta for r in results],
                              {kind.value: [row[4] for row in rows]},
                              outdir / "sweep.png", ylabel=metric_name)
            outputs.append("sweep.png")
    _write_manifest(outdir, "solve", argv, outputs)
    print(f"{kind.value}: eta={result.eta:g} {metric_name}={metric:.6g} "
          f"nonzeros={trace.nonzeros[-1]} -> {outdir}")
    return EXIT_OK


def _solve_folds(args, argv, outdir, dataset, task, kinds, grids,
                 graph) -> int:
    cfg = _solver_config(args)
    folds = split_folds(dataset, n_folds=args.folds,
                        train_fraction=args.train_fraction,
                        seed=args.fold_seed)

    def run_fold(fold) -> dict:
        train, test = fold
        model = _make_model(task, args.loss, train.X, train.y)
        out = {}
        for kind, grid in zip(kinds, grids):
            spec = _make_spec(kind, float(grid[0]), graph)
            results = solve_path(model, spec, grid, cfg)
            mses, pmses = [], []
            for res in results:
                mses.append(mean_squared_error(train.y, train.X @ res.w_final))
                pmses.append(mean_squared_error(test.y, test.X @ res.w_final))
            out[kind.value] = (mses, pmses)
        return out

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            fold_results = list(pool.map(run_fold, folds))
    else:
        fold_results = [run_fold(f) for f in folds]

    detail_rows = []
    per_constraint = {}
    best_pmse_by_fold = {}
    for kind, grid in zip(kinds, grids):
        name = kind.value
        mse = np.array([fr[name][0] for fr in fold_results])
        pmse = np.array([fr[name][1] for fr in fold_results])
        for f in range(args.folds):
            for gi, eta in enumerate(grid):
                detail_rows.append((name, f, eta, mse[f, gi], pmse[f, gi]))
        mean_pmse = pmse.mean(axis=0)
        best = int(np.argmin(mean_pmse))
        per_constraint[name] = {
            "etas": [float(e) for e in grid],
            "mean_mse": [float(v) for v in mse.mean(axis=0)],
            "mean_pmse": [float(v) for v in mean_pmse],
            "best_eta": float(grid[best]),
            "best_mean_mse": float(mse.mean(axis=0)[best]),
            "best_mean_pmse": float(mean_pmse[best]),
        }
        best_pmse_by_fold[name] = pmse[:, best]

    fold_wins = {}
    for a in per_constraint:
        for b in per_constraint:
            if a != b:
                wins = int(np.sum(best_pmse_by_fold[a] < best_pmse_by_fold[b]))
                fold_wins[f"{a}<{b}"] = wins

    _write_csv(outdir / "folds.csv",
               ["constraint", "fold", "eta", "mse", "pmse"], detail_rows)
    sweep_rows = []
    for name, rec in per_constraint.items():
        for eta, mm, mp in zip(rec["etas"], rec["mean_mse"],
                               rec["mean_pmse"]):
            sweep_rows.append((name, eta, mm, mp))
    _write_csv(outdir / "sweep.csv",
               ["constraint", "eta", "mean_mse", "mean_pmse"], sweep_rows)
    metrics = {
        "task": task.value,
        "folds": args.folds,
        "train_fraction": args.train_fraction,
        "fold_seed": args.fold_seed,
        "per_constraint": per_constraint,
        "fold_wins": fold_wins,
    }
    _write_json(outdir / "metrics.json", metrics)
    outputs = ["folds.csv", "sweep.csv", "metrics.json"]
    if not args.no_figures:
        from .figures import save_sweep_figure
        for which, ylab in (("mean_pmse", "mean PMSE"),
                            ("mean_mse", "mean MSE")):
            series = {n: per_constraint[n][which] for n in per_constraint}
            etas_ref = per_constraint[kinds[0].value]["etas"]
            if all(per_constraint[n]["etas"] == etas_ref
                   for n in per_constraint):
                save_sweep_figure(etas_ref, series,
                                  outdir / f"{which}.png", ylabel=ylab)
            else:
                for n in per_constraint:
                    save_sweep_figure(
                        per_constraint[n]["etas"], {n: per_constraint[n][which]},
                        outdir / f"{which}_{n}.png", ylabel=ylab)
        for f in sorted(outdir.glob("mean_*.png")):
            outputs.append(f.name)
    _write_manifest(outdir, "solve", argv, outputs)
    for name, rec in per_constraint.items():
        print(f"{name}: best eta={rec['best_eta']:g} "
              f"mean PMSE={rec['best_mean_pmse']:.4f}")
    return EXIT_OK


def cmd_solve(args, argv: list[str]) -> int:
    outdir = _resolve_outdir(args)
    dataset = _load_dataset(args)
    task = _resolve_task(args, dataset)
    kinds = _parse_constraints(args.constraint)
    grids = _parse_eta_grids(args, len(kinds))
    graph = load_graph(args.graph, d=dataset.d) if args.graph else None
    if args.folds is not None:
        if task is not Task.REGRESSION:
            raise _UsageError("fold sweeps are regression-only")
        return _solve_folds(args, argv, outdir, dataset, task, kinds, grids,
                            graph)
    return _solve_single(args, argv, outdir, dataset, task, kinds, grids,
                         graph)


def cmd_project(args, argv: list[str]) -> int:
    outdir = _resolve_outdir(args)
    p0 = load_vector(args.input)
    kind = _parse_constraints(args.constraint)
    if len(kind) != 1:
        raise _UsageError("project takes a single constraint")
    graph = load_graph(args.graph, d=len(p0)) if args.graph else None
    spec = _make_spec(kind[0], args.eta, graph)
    opts = ProjectionOptions(max_inner_iters=args.max_inner,
                             feasibility_tolerance=args.feas_tol,
                             distance_tolerance=args.dist_tol)
    p, status = project_level_set(spec, p0, opts, collect_path=args.trace)
    _save_vector(outdir / "projected.csv", p)
    info = {
        "constraint": kind[0].value,
        "eta": args.eta,
        "outcome": status.outcome.value,
        "iterations_used": status.iterations_used,
        "final_violation": float(status.final_violation),
    }
    _write_json(outdir / "projection.json", info)
    outputs = ["projected.csv", "projection.json"]
    if args.trace:
        path = status.path
        step_norms = [float(np.linalg.norm(path[k] - path[k - 1]))
                      for k in range(1, len(path))]
        violations = [max(spec.value(path[k]) - spec.eta, 0.0)
                      for k in range(1, len(path))]
        dist_exact = None
        if kind[0] is ConstraintKind.L1:
            from .oracles import l1_ball_projection
            exact = l1_ball_projection(p0, args.eta)
            dist_exact = [float(np.linalg.norm(path[k] - exact))
                          for k in range(1, len(path))]
        rows = []
        for k in range(len(step_norms)):
            row = [k + 1, step_norms[k], violations[k]]
            if dist_exact is not None:
                row.append(dist_exact[k])
            rows.append(row)
        header = ["iteration", "step_norm", "violation"]
        if dist_exact is not None:
            header.append("distance_to_exact")
        _write_csv(outdir / "projection_trace.csv", header, rows)
        outputs.append("projection_trace.csv")
        if not args.no_figures and step_norms:
            from .figures import save_projection_figure
            save_projection_figure(step_norms, violations,
                                   outdir / "projection.png",
                                   dist_to_exact=dist_exact)
            outputs.append("projection.png")
    _write_manifest(outdir, "project", argv, outputs)
    print(f"{status.outcome.value} after {status.iterations_used} iterations,"
          f" final violation {status.final_violation:.3g}")
    return EXIT_OK


def cmd_eval(args, argv: list[str]) -> int:
    outdir = _resolve_outdir(args)
    w = load_vector(args.w)
    dataset = _load_dataset(args)
    task = _resolve_task(args, dataset)
    metrics = {"task": task.value}
    if task is Task.CLASSIFICATION:
        scores = posterior(LossKind(args.loss), dataset.X @ w)
        metrics["auc"] = float(roc_auc(dataset.y, scores))
    else:
        metrics["mse"] = float(mean_squared_error(dataset.y, dataset.X @ w))
    test = None
    if args.test_data is not None:
        test = load_csv(args.test_data)
    elif args.test_x is not None and args.test_y is not None:
        test = Dataset(load_matrix(args.test_x), load_vector(args.test_y),
                       dataset.kind)
    if test is not None:
        if task is Task.CLASSIFICATION:
            scores = posterior(LossKind(args.loss), test.X @ w)
            metrics["test_auc"] = float(roc_auc(test.y, scores))
        else:
            metrics["pmse"] = float(mean_squared_error(test.y, test.X @ w))
    _write_json(outdir / "metrics.json", metrics)
    _write_manifest(outdir, "eval", argv, ["metrics.json"])
    print(json.dumps(metrics, sort_keys=True))
    return EXIT_OK


def cmd_rerun(args) -> int:
    path = Path(args.manifest)
    try:
        manifest = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if "argv" not in manifest:
        raise DataFormatError(f"{path}: manifest has no argv record")
    return main(list(manifest["argv"]) + ["--outdir", args.outdir])


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "synth":
            return cmd_synth(args, argv)
        if args.command == "solve":
            return cmd_solve(args, argv)
        if args.command == "project":
            return cmd_project(args, argv)
        if args.command == "eval":
            return cmd_eval(args, argv)
        if args.command == "rerun":
            return cmd_rerun(args)
        parser.error(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, FileNotFoundError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InfeasibleConstraintError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
