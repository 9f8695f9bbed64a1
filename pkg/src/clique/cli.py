"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 an
``experiment`` ran but failed one of its acceptance checks.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments, svg
from .cv import CvError, assign_folds, cv_errors, fit_cv
from .data import SIM_KINDS, TASKS, DataError, SimSpec, load_csv, simulate, write_csv
from .importance import (
    ImportanceError, ImportanceMatrix, clip, clique, global_permutation_importance,
    meta_path, partial_dependence, read_importance_csv, write_keyvalue,
)
from .losses import LOSS_KINDS, LossError, LossSpec, default_loss
from .models import Hyperparams, ModelError, fit_forest
from .regions import RegionError, dataset_columns, evaluate

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_CHECK_FAILED = 0, 1, 2, 3

_VALIDATION_ERRORS = (DataError, LossError, ModelError, CvError, ImportanceError, RegionError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.cause = exc


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # re-raised with the pipeline stage attached
        raise StageError(name, exc) from exc


def _add_model_args(p):
    p.add_argument("--n-trees", type=int, default=500)
    p.add_argument("--mtry", type=int)
    p.add_argument("--min-node-size", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--no-bootstrap", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker threads")


def _add_data_args(p, flag="--in"):
    p.add_argument(flag, dest="data", required=True, help="dataset CSV")
    p.add_argument("--label", required=True, help="label column name")
    p.add_argument("--task", choices=TASKS, required=True)
    p.add_argument("--id-column")


def _hp(args) -> Hyperparams:
    return Hyperparams(n_trees=args.n_trees, mtry=args.mtry, min_node_size=args.min_node_size,
                       max_depth=args.max_depth, bootstrap=not args.no_bootstrap, seed=args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clique", description="CLIQUE / CLIP local variable importance")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write a simulated dataset")
    p.add_argument("--kind", choices=SIM_KINDS, required=True)
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit the full-data forest and report CV error")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--loss", choices=LOSS_KINDS)
    p.add_argument("--out", required=True, help="model file (.npz)")
    p.add_argument("--folds-out", help="optional CSV of row id -> fold")

    p = sub.add_parser("importance", help="compute local or global importances")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--method", choices=("clique", "clip", "global", "pdp"), default="clique")
    p.add_argument("--M", type=int, default=25)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--loss", choices=LOSS_KINDS)
    p.add_argument("--feature", help="pdp: feature name (default all)")
    p.add_argument("--target-class", help="pdp: class whose probability is averaged")
    p.add_argument("--out", required=True)

    p = sub.add_parser("summarize", help="region statistics of one importance column")
    p.add_argument("--importance", required=True)
    _add_data_args(p, "--data")
    p.add_argument("--feature", required=True)
    p.add_argument("--region", required=True, help="e.g. 'v2 > -0.333333'")
    p.add_argument("--out", help="key=value statistics file")

    p = sub.add_parser("plot", help="SVG scatter or box plot of importances")
    p.add_argument("--importance", required=True)
    _add_data_args(p, "--data")
    p.add_argument("--feature", required=True, help="importance column")
    p.add_argument("--style", choices=("scatter", "box"), default="scatter")
    p.add_argument("--x", help="scatter: x-axis column (default --feature)")
    p.add_argument("--region", help="colour / group by this region")
    p.add_argument("--group-by", help="box: group by the values of this column")
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True)

    p = sub.add_parser("experiment", help="run a simulation study with acceptance checks")
    p.add_argument("--kind", choices=sorted(experiments.RECIPES), required=True)
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--M", type=int, default=25)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--n-trees", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="directory for data, matrices and report")
    return parser


def _load(args):
    return _stage("load", load_csv, args.data, args.label, args.task, args.id_column)


def _loss(args, dataset) -> LossSpec:
    loss = LossSpec(args.loss) if args.loss else default_loss(dataset.task)
    loss.check(dataset.task)
    return loss


def _k(args, dataset) -> int:
    if dataset.n < args.k:
        print(f"note: n={dataset.n} < k={args.k}; using leave-one-out (k={dataset.n})", file=sys.stderr)
        return dataset.n
    return args.k


def cmd_simulate(args) -> int:
    data = simulate(SimSpec(args.kind, args.n, args.seed))
    _stage("export", write_csv, data, args.out)
    print(f"wrote {args.out}: n={data.n} p={data.p}")
    if data.is_classification:
        counts = np.bincount(data.y, minlength=data.n_classes)
        print("label balance: " + ", ".join(f"{c}={k}" for c, k in zip(data.classes, counts)))
    else:
        print(f"label mean={np.mean(data.y):.6g} sd={np.std(data.y, ddof=1) if data.n > 1 else 0.0:.6g}")
    return EXIT_OK


def cmd_fit(args) -> int:
    data = _load(args)
    loss = _loss(args, data)
    hp = _hp(args)
    full = _stage("fit", fit_forest, data, hp, n_jobs=args.jobs)
    _stage("export", full.save, args.out)
    print(f"wrote {args.out}: {full.n_trees} trees, mtry={full.hp.mtry}, min_node_size={full.hp.min_node_size}")
    if data.n >= 2:
        folds = _stage("folds", assign_folds, data, _k(args, data), seed=args.seed)
        ens = _stage("fit_cv", fit_cv, data, hp, folds, n_jobs=args.jobs)
        err = cv_errors(ens, data, loss)
        print(f"cv_error ({loss.kind}, k={folds.k}) = {float(np.mean(err)):.6g}")
        if args.folds_out:
            _stage("export", folds.to_csv, args.folds_out, data.ids)
    return EXIT_OK


def _degenerate_matrix(data, method, M, loss, seed, hp):
    # a single row: every grid value and every permutation reproduces the
    # row itself, so the importances are zero for any model
    return ImportanceMatrix(
        np.zeros((1, data.p)), method, M, loss, seed if method == "clip" else None,
        np.full(1, np.nan), data.ids, tuple(data.feature_names),
        {"k": "NA", "note": "n=1, no CV model; importances are identically zero",
         **{f"hp.{k}": v for k, v in hp.as_dict().items()}},
    )


def cmd_importance(args) -> int:
    data = _load(args)
    loss = _loss(args, data)
    hp = _hp(args)
    _stage("validate", hp.resolve, data.p, data.task)
    if args.M < 1:
        raise ImportanceError("M must be >= 1")
    out = Path(args.out)

    if args.method == "pdp":
        full = _stage("fit", fit_forest, data, hp, n_jobs=args.jobs)
        features = [data.feature_index(args.feature)] if args.feature else range(data.p)
        target = args.target_class
        rows = []
        for j in features:
            curve = _stage("pdp", partial_dependence, full, data, j, args.M, target)
            rows.extend((data.feature_names[j], v, m) for v, m in curve)
        with out.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", "value", "mean_prediction"])
            w.writerows((f, repr(v), repr(m)) for f, v, m in rows)
        write_keyvalue({"method": "pdp", "M": args.M, "target_class": target or "last",
                        **{f"hp.{k}": v for k, v in full.hp.as_dict().items()}}, meta_path(out))
        print(f"wrote {out}")
        return EXIT_OK

    if data.n == 1 and args.method in ("clique", "clip"):
        im = _degenerate_matrix(data, args.method, args.M, loss, args.seed, hp.resolve(data.p, data.task))
        _stage("export", im.to_csv, out)
        print(f"wrote {out}: 1x{data.p} {args.method} matrix (all zero: single observation)")
        return EXIT_OK

    folds = _stage("folds", assign_folds, data, _k(args, data), seed=args.seed)
    ens = _stage("fit_cv", fit_cv, data, hp, folds, n_jobs=args.jobs)
    baseline = cv_errors(ens, data, loss)
    print(f"cv_error ({loss.kind}, k={folds.k}) = {float(np.mean(baseline)):.6g}")

    if args.method == "global":
        imp = _stage("importance", global_permutation_importance, ens, data, loss, args.M, args.seed)
        with out.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", "importance"])
            w.writerows((name, repr(float(v))) for name, v in zip(data.feature_names, imp))
        write_keyvalue({"method": "global", "reps": args.M, "loss": loss.kind, "seed": args.seed,
                        "k": folds.k, **{f"hp.{k}": v for k, v in ens.hp.as_dict().items()}},
                       meta_path(out))
        print(f"wrote {out}")
        return EXIT_OK

    if args.method == "clique":
        im = _stage("importance", clique, ens, data, loss, args.M, n_jobs=args.jobs)
    else:
        im = _stage("importance", clip, ens, data, loss, args.M, args.seed, n_jobs=args.jobs)
    im.meta["seed"] = args.seed
    im.meta["cv_error"] = repr(float(np.mean(baseline)))
    _stage("export", im.to_csv, out)
    print(f"wrote {out}: {data.n}x{data.p} {args.method} matrix, M={args.M}")
    return EXIT_OK


def _aligned(args):
    V, ids, names, meta = read_importance_csv(args.importance)
    data = _load(args)
    if tuple(ids) != tuple(data.ids):
        raise DataError("row ids of the importance matrix and the dataset do not match")
    if args.feature not in names:
        raise DataError(f"importance matrix has no column {args.feature!r}")
    return V[:, names.index(args.feature)], data


def _na(v) -> str:
    if isinstance(v, float) and not math.isfinite(v):
        return "NA"
    return f"{v:.9g}" if isinstance(v, float) else str(v)


def summarize(values: np.ndarray, mask: np.ndarray) -> dict:
    """Per-region statistics plus the ratio of region means (NA when undefined)."""
    stats = {}
    for name, sel in (("in", mask), ("out", ~mask)):
        v = values[sel]
        stats[f"{name}.count"] = int(v.size)
        if v.size:
            q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
            stats.update({
                f"{name}.mean": float(np.mean(v)), f"{name}.median": float(med),
                f"{name}.variance": float(np.var(v, ddof=1)) if v.size > 1 else 0.0,
                f"{name}.q1": float(q1), f"{name}.q3": float(q3),
                f"{name}.min": float(v.min()), f"{name}.max": float(v.max()),
                f"{name}.mean_abs": float(np.mean(np.abs(v))),
            })
        else:
            for s in ("mean", "median", "variance", "q1", "q3", "min", "max", "mean_abs"):
                stats[f"{name}.{s}"] = math.nan
    den = stats["out.mean"]
    stats["ratio_mean_in_out"] = stats["in.mean"] / den if den and math.isfinite(den) else math.nan
    den = stats["out.mean_abs"]
    stats["ratio_mean_abs_in_out"] = stats["in.mean_abs"] / den if den and math.isfinite(den) else math.nan
    return stats


def cmd_summarize(args) -> int:
    values, data = _aligned(args)
    mask = evaluate(args.region, dataset_columns(data))
    stats = {"feature": args.feature, "region": args.region, **summarize(values, mask)}
    for key, value in stats.items():
        print(f"{key}={_na(value)}")
    if args.out:
        _stage("export", write_keyvalue, {k: _na(v) for k, v in stats.items()}, args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    values, data = _aligned(args)
    cols = dataset_columns(data)
    if args.style == "scatter":
        xname = args.x or args.feature
        if xname not in cols or cols[xname].dtype == object:
            raise DataError(f"scatter x-axis needs a numeric column, got {xname!r}")
        if args.region:
            mask = evaluate(args.region, cols)
            groups = [(args.region, mask), (f"not ({args.region})", ~mask)]
        else:
            groups = [("all", np.ones(data.n, dtype=bool))]
        text = svg.scatter(cols[xname], values, groups, args.title,
                           xlabel=xname, ylabel=f"importance of {args.feature}")
    else:
        if args.group_by:
            if args.group_by not in cols:
                raise DataError(f"unknown column {args.group_by!r}")
            key = cols[args.group_by]
            levels = list(dict.fromkeys(key.tolist()))
            if key.dtype != object:
                levels.sort()
            groups = [(str(lv), values[key == lv]) for lv in levels]
        elif args.region:
            mask = evaluate(args.region, cols)
            groups = [(args.region, values[mask]), (f"not ({args.region})", values[~mask])]
        else:
            groups = [("all", values)]
        text = svg.boxplot(groups, args.title, ylabel=f"importance of {args.feature}",
                           xlabel=args.group_by or "")
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    report = experiments.run(args.kind, n=args.n, M=args.M, seed=args.seed, k=args.k,
                             n_trees=args.n_trees, n_jobs=args.jobs)
    print(report.to_text())
    if args.out:
        _stage("export", report.write, args.out)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "importance": cmd_importance,
    "summarize": cmd_summarize,
    "plot": cmd_plot,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        code = EXIT_VALIDATION if isinstance(exc.cause, _VALIDATION_ERRORS) else EXIT_RUNTIME
        print(f"error [{exc.stage}]: {exc.cause}", file=sys.stderr)
        return code
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
