"""Command-line entry point.

Subcommands delegate to the library modules; every run ends with a JSON
document (stdout or ``--out``) that echoes the configuration needed to
reproduce it.  Error exit codes: 2 invalid input, 3 degenerate input
(duplicate points), 4 ill-conditioned factorization.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench
from .active import DEFAULT_BATCH, DEFAULT_GAMMA, DEFAULT_LAMBDA, stratified_seed
from .classify import fit, save_classifier
from .core import magnitude_function, weighting
from .datasets import (
    drop_class_duplicates,
    gen_outlier_mixture,
    load_csv,
    load_points_csv,
    standardize,
)
from .errors import DegenerateInput, IllConditioned, InvalidInput, MagweightError
from .outlier import detect_outliers

EXIT_CODES = {InvalidInput: 2, DegenerateInput: 3, IllConditioned: 4}


def _emit(doc: dict, out_path):
    text = json.dumps(doc, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_weights(args) -> dict:
    cloud = load_points_csv(args.input, metric=args.metric, scale=args.t)
    config = {
        "command": "weights",
        "input": args.input,
        "metric": args.metric,
        "t": args.t,
        "jitter": args.jitter,
    }
    if args.t_sweep:
        scales = _parse_floats(args.t_sweep)
        sweep = magnitude_function(cloud.with_scale(1.0), scales)
        return {
            "config": dict(config, t_sweep=scales),
            "magnitude_function": [
                {"t": float(t), "magnitude": None if np.isnan(m) else float(m)}
                for t, m in sweep
            ],
            "failures": [{"t": t, "error": msg} for t, msg in sweep.failures],
        }
    state = weighting(cloud, jitter=args.jitter)
    return {
        "config": config,
        "magnitude": state.magnitude,
        "weights": state.weights.tolist(),
    }


def cmd_classify(args) -> dict:
    train = load_csv(args.train, args.label_col)
    scales = _parse_floats(args.t) if "," in args.t else float(args.t)
    model = fit(
        train,
        scales=scales,
        scale_mode=args.scale_mode,
        null_threshold=args.null_threshold,
    )
    if args.save_model:
        save_classifier(model, args.save_model)
    config = {
        "command": "classify",
        "train": args.train,
        "test": args.test,
        "label_col": args.label_col,
        "t": scales if isinstance(scales, float) else list(scales),
        "scale_mode": args.scale_mode,
        "null_threshold": args.null_threshold,
    }
    names = train.label_names or tuple(str(i) for i in range(model.n_classes))
    out = {"config": config, "label_names": list(names)}
    if args.test:
        test = load_csv(args.test, args.label_col)
        predicted = model.predict_batch(test.cloud.points)
        # compare by label name: the two files may map names to different ids
        true_names = [test.label_names[l] for l in test.labels]
        pred_names = [None if p is None else names[p] for p in predicted]
        out["predictions"] = [
            {"row": i, "label": p} for i, p in enumerate(pred_names)
        ]
        out["accuracy"] = float(
            np.mean([p == t for p, t in zip(pred_names, true_names)])
        )
        out["null_count"] = sum(p is None for p in pred_names)
    return out


def cmd_al(args) -> dict:
    data = load_csv(args.pool, args.label_col)
    data, _ = drop_class_duplicates(data)
    report = bench.run_al_bench(
        data,
        strategies=tuple(args.strategy.split(",")),
        budget=args.budget,
        runs=args.runs,
        seed=args.seed,
        gamma=args.gamma,
        lam=args.lam,
        train_fraction=args.train_fraction,
        batch_size=args.batch,
    )
    report.dataset = args.pool
    return report.to_dict()


def cmd_outliers(args) -> dict:
    truth = None
    if args.truth_col is not None:
        data = load_csv(args.input, args.truth_col)
        cloud = data.cloud.with_scale(args.t)
        truth = data.labels
    else:
        cloud = load_points_csv(args.input, scale=args.t)
    report = detect_outliers(cloud, tau=args.tau, freeze_inliers=args.freeze_inliers)
    out = {
        "config": {
            "command": "outliers",
            "input": args.input,
            "tau": args.tau,
            "t": args.t,
            "truth_col": args.truth_col,
            "freeze_inliers": args.freeze_inliers,
        },
        "threshold": report.threshold,
        "inliers": report.inlier_indices.tolist(),
        "outliers": report.outlier_indices.tolist(),
        "points": [
            {
                "index": i,
                "weight": float(report.weights[i]),
                "gamma": report.gammas.get(i),
                "verdict": "outlier" if i in set(report.outlier_indices.tolist()) else "inlier",
            }
            for i in range(len(report.weights))
        ],
    }
    if truth is not None:
        flagged = np.zeros(len(cloud), dtype=bool)
        flagged[report.outlier_indices] = True
        actual = truth == 1
        tp = int((flagged & actual).sum())
        out["precision"] = tp / max(int(flagged.sum()), 1)
        out["recall"] = tp / max(int(actual.sum()), 1)
    return out


def cmd_bench(args) -> dict:
    datasets = {}
    for spec in args.dataset:
        if "=" not in spec:
            raise InvalidInput(f"--dataset expects name=path, got {spec!r}")
        name, path = spec.split("=", 1)
        datasets[name] = load_csv(path, args.label_col)
    baselines = []
    for path in args.baseline or []:
        baselines.extend(bench.load_baseline_accuracies(path))
    report = bench.run_classification_bench(
        datasets,
        {"weighting": bench.weighting_classifier(scales=args.t, scale_mode=args.scale_mode)},
        runs=args.runs,
        seed=args.seed,
        train_fraction=args.train_fraction,
        standardize_features=args.standardize,
        baselines=baselines,
    )
    return report.to_dict()


def cmd_null_bench(args) -> dict:
    data = load_csv(args.input, args.label_col)
    names = list(data.label_names or [])
    def resolve(value):
        if value in names:
            return names.index(value)
        return int(value)
    a, b = (resolve(v) for v in args.train_labels.split(","))
    held = resolve(args.held_out)
    confusion, report = bench.run_null_class_bench(
        data,
        train_labels=(a, b),
        held_out_label=held,
        threshold=args.threshold,
        train_fraction=args.train_fraction,
        seed=args.seed,
    )
    doc = report.to_dict()
    doc["confusion"] = confusion.tolist()
    return doc


def cmd_gen_mixture(args) -> dict:
    specs = []
    for spec in args.cluster:
        parts = _parse_floats(spec)
        if len(parts) < 3:
            raise InvalidInput(f"--cluster expects x,y,...,std,count, got {spec!r}")
        *mean, std, count = parts
        specs.append((tuple(mean), std, int(count)))
    data = gen_outlier_mixture(specs, args.background, (args.low, args.high), seed=args.seed)
    from .datasets import save_csv

    save_csv(data, args.out_csv)
    return {
        "config": {
            "command": "gen-mixture",
            "cluster": args.cluster,
            "background": args.background,
            "bounds": [args.low, args.high],
            "seed": args.seed,
        },
        "rows": len(data),
        "out_csv": args.out_csv,
    }


def cmd_serve(args) -> dict:
    from .active import ALSession
    from .server import make_server, serve_forever

    if args.resume:
        with open(args.resume) as fh:
            session = ALSession.from_checkpoint(json.load(fh))
    else:
        pool = load_csv(args.pool, args.label_col)
        test = load_csv(args.test, args.label_col)
        session = ALSession(
            pool.cloud.points,
            np.arange(pool.n_classes),
            test.cloud.points,
            test.labels,
            strategy=args.strategy,
            gamma=args.gamma,
            lam=args.lam,
            budget=args.budget,
            batch_size=args.batch,
            seed=args.seed,
        )
        session.seed_labels(stratified_seed(pool.labels, session.rng))
    server = make_server(
        session,
        host=args.host,
        port=args.port,
        checkpoint_path=args.checkpoint,
        static_dir=args.static,
    )
    serve_forever(server)
    return {"config": {"command": "serve"}, "stopped": True}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magweight",
        description="Metric-space magnitude and weighting-vector toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="weighting vector and magnitude of a CSV point cloud")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", choices=("L2", "L1"), default="L2")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--t-sweep", help="comma-separated ascending scales for a magnitude table")
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(run=cmd_weights)

    p = sub.add_parser("classify", help="fit the weighting classifier, predict a test CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--test")
    p.add_argument("--label-col", default="label")
    p.add_argument("--t", default="1.0", help="shared t, or comma-separated per-class t_i")
    p.add_argument("--scale-mode", choices=("abs", "percentile"), default="abs")
    p.add_argument("--null-threshold", type=float)
    p.add_argument("--save-model")
    p.add_argument("--out")
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("al", help="averaged active-learning curves over seeded splits")
    p.add_argument("--pool", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--strategy", default="weighting,uncertainty,random")
    p.add_argument("--budget", type=int, default=40)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p.add_argument("--lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--train-fraction", type=float, default=0.67)
    p.add_argument("--batch", type=int, default=DEFAULT_BATCH)
    p.add_argument("--out")
    p.set_defaults(run=cmd_al)

    p = sub.add_parser("outliers", help="magnitude-based outlier report for a CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--truth-col", help="optional ground-truth column for precision/recall")
    p.add_argument("--freeze-inliers", action="store_true")
    p.add_argument("--out")
    p.set_defaults(run=cmd_outliers)

    p = sub.add_parser("bench", help="stratified-split accuracy benchmark")
    p.add_argument("--dataset", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--label-col", default="label")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--scale-mode", choices=("abs", "percentile"), default="abs")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--baseline", action="append", help="external baseline accuracy JSON")
    p.add_argument("--out")
    p.set_defaults(run=cmd_bench)

    p = sub.add_parser("null-bench", help="NULL-class confusion matrix on a held-out class")
    p.add_argument("--input", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--train-labels", required=True, metavar="A,B")
    p.add_argument("--held-out", required=True)
    p.add_argument("--threshold", type=float, default=1 - 1e-11)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(run=cmd_null_bench)

    p = sub.add_parser("gen-mixture", help="write a seeded Gaussian+uniform mixture CSV")
    p.add_argument("--cluster", action="append", required=True, metavar="X,Y,...,STD,COUNT")
    p.add_argument("--background", type=int, default=0)
    p.add_argument("--low", type=float, default=-10.0)
    p.add_argument("--high", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out")
    p.set_defaults(run=cmd_gen_mixture)

    p = sub.add_parser("serve", help="HTTP server for one interactive labeling session")
    p.add_argument("--pool")
    p.add_argument("--test")
    p.add_argument("--label-col", default="label")
    p.add_argument("--strategy", default="weighting")
    p.add_argument("--budget", type=int, default=40)
    p.add_argument("--batch", type=int, default=DEFAULT_BATCH)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p.add_argument("--lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--checkpoint", help="path written by POST /control checkpoint")
    p.add_argument("--resume", help="resume from a checkpoint file")
    p.add_argument("--static", help="directory of frontend assets to serve at /")
    p.set_defaults(run=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve" and not args.resume and not (args.pool and args.test):
        parser.error("serve requires --pool and --test (or --resume)")
    try:
        doc = args.run(args)
    except MagweightError as err:
        code = next(
            (c for cls, c in EXIT_CODES.items() if isinstance(err, cls)), 2
        )
        extra = f" (pivot {err.pivot})" if isinstance(err, IllConditioned) and err.pivot is not None else ""
        print(f"error: {err}{extra}", file=sys.stderr)
        return code
    _emit(doc, getattr(args, "out", None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
