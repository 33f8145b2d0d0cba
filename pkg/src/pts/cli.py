"""Command-line front end: ``pts <subcommand>`` and ``pd dist``."""
import argparse
import csv
import json
import os
import sys
import warnings

import numpy as np

from . import io
from .datasets import CLASSES, ShapeSpec, noise_ladder, sample_series, sample_shape, write_corpus
from .errors import PtsError
from .experiments import (environment_stamp, format_noise_table, format_timing_table,
                          report_json, run_noise_experiment, run_timing_benchmark)
from .grassmann import GrassmannPoint, grassmann_kernel, grassmann_metric
from .learn import LabeledSet, export_gram, knn_classify
from .matching import diagram_distance, parse_pd_metric
from .persistence import (PersistenceDiagram, ScalarGraph, delay_embed, dedup_points,
                          scalar_field_h0, vr_persistence)
from .signature import PtsConfig, Scaling, pts_embed

PD_METRICS_HELP = "bottleneck, w1, w2 or wp:<p>"
GRASS_HELP = "geo, ngeo, chordal, kp or krbf:<beta>"


def _common(p):
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--config", default=None, help="JSON configuration file")
    p.add_argument("--threads", type=int, default=1, help="worker threads")


def _load_json(path):
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _write_text(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_feature(path):
    """A .pts file gives a GrassmannPoint, a PD CSV a tuple of diagrams."""
    if path.endswith(".pts"):
        return io.read_pts(path)
    return tuple(io.read_diagrams(path).values())


def _align(a, b):
    """Pair diagrams of two PD files by dimension; a missing one is empty."""
    da = {pd.dim: pd for pd in a}
    db = {pd.dim: pd for pd in b}
    pairs = []
    for dim in sorted(set(da) | set(db)):
        x, y = da.get(dim), db.get(dim)
        x = x if x is not None else PersistenceDiagram.empty(dim, y.cap)
        y = y if y is not None else PersistenceDiagram.empty(dim, x.cap)
        pairs.append((x, y))
    return pairs


def _pd_distance(a, b, metric, include_essential):
    return sum(diagram_distance(x, y, metric, include_essential) for x, y in _align(a, b))


def cmd_compute_pd(args):
    if args.kind == "graph":
        if not args.values:
            raise PtsError("--values is required for a scalar graph")
        graph = io.read_scalar_graph(args.input, args.values)
        diagrams = [scalar_field_h0(graph, args.direction)]
    else:
        if args.kind == "series":
            series = np.loadtxt(args.input, delimiter=",", ndmin=1, dtype=float).ravel()
            cloud = delay_embed(series, args.embed_dim, args.lag)
        else:
            cloud = io.read_cloud(args.input)
        diagrams = vr_persistence(dedup_points(cloud), args.max_dim, args.max_eps)
    io.write_diagrams(diagrams, args.output)


def _pts_config(args):
    cfg = PtsConfig.from_dict(_load_json(args.config))
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def cmd_embed(args):
    cfg = _pts_config(args)
    diagrams = io.read_diagrams(args.input)
    if args.dim not in diagrams:
        raise PtsError(f"{args.input} has no diagram of dimension {args.dim}")
    pd = diagrams[args.dim]
    if not args.include_essential:
        pd = pd.finite()
    scaling = None
    if args.scaling:
        box = _load_json(args.scaling)
        scaling = Scaling(box["lo"], box["hi"])
    io.write_pts(pts_embed(pd, cfg, scaling), args.output)


def cmd_dist(args):
    a, b = _load_feature(args.a), _load_feature(args.b)
    if isinstance(a, GrassmannPoint) != isinstance(b, GrassmannPoint):
        raise PtsError("cannot compare a diagram file with an embedding file")
    if isinstance(a, GrassmannPoint):
        name = args.metric
        if name == "kp" or name.startswith("krbf"):
            value = grassmann_kernel(name, args.conventional)(a, b)
        else:
            value = grassmann_metric(name)(a, b)
    else:
        parse_pd_metric(args.metric)
        value = _pd_distance(a, b, args.metric, args.include_essential)
    print(repr(float(value)))


def _read_labels(path):
    labels = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["name", "label"]:
            raise PtsError(f"{path}: expected header name,label")
        for row in reader:
            if row:
                labels[row[0]] = int(row[1])
    return labels


def _feature_dir(path):
    names = sorted(f for f in os.listdir(path) if f.endswith((".pts", ".csv")))
    if not names:
        raise PtsError(f"{path}: no .pts or .csv files")
    return names, [_load_feature(os.path.join(path, n)) for n in names]


def cmd_knn(args):
    labels = _read_labels(args.labels)
    names, feats = _feature_dir(args.train)
    missing = [n for n in names if n not in labels]
    if missing:
        raise PtsError(f"no label for {missing[0]}")
    train = LabeledSet(feats, [labels[n] for n in names], names)
    test_names, test = _feature_dir(args.test)
    metric = args.metric
    if train.kind == "diagram":
        parse_pd_metric(metric)
        metric = lambda a, b: _pd_distance(a, b, args.metric, args.include_essential)
        # diagrams of one file are compared as a unit
        train = LabeledSet([(f,) for f in feats], train.labels, names)
        test = [(f,) for f in test]
    preds = knn_classify(train, test, metric, args.k)
    lines = ["name,label"] + [f"{n},{p}" for n, p in zip(test_names, preds.tolist())]
    _write_text("\n".join(lines) + "\n", args.output)


def cmd_gram(args):
    names, feats = _feature_dir(args.directory)
    labels = _read_labels(args.labels) if args.labels else {}
    labeled = LabeledSet(feats, [labels.get(n, 0) for n in names], names)
    export_gram(labeled, args.output, args.kernel,
                labels_path=args.labels_out if args.labels else None,
                conventional=args.conventional)


def cmd_gen(args):
    seed = args.seed if args.seed is not None else 0
    if args.series:
        params = _load_json(args.config)
        x = sample_series(args.series, args.length, params, seed)
        np.savetxt(args.output, x, fmt="%.17g")
    elif args.levels:
        levels = [float(v) for v in args.levels.split(",")]
        classes = args.classes.split(",") if args.classes else list(CLASSES)
        specs = [ShapeSpec(c, args.n) for c in classes]
        write_corpus(noise_ladder(specs, levels, args.trials, seed), args.output)
    else:
        if not args.cls:
            raise PtsError("--class is required")
        cloud = sample_shape(ShapeSpec(args.cls, args.n, args.noise, seed))
        io.write_cloud(cloud, args.output)


def _experiment_config(args):
    cfg = _load_json(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def cmd_experiment(args):
    report = run_noise_experiment(_experiment_config(args), threads=args.threads)
    _write_text(report_json(report), args.output)
    if args.table:
        _write_text(format_noise_table(report) + "\n", args.table)
    if args.env:
        _write_text(json.dumps(environment_stamp(), indent=2, sort_keys=True) + "\n", args.env)


def cmd_bench(args):
    if args.threads not in (None, 1):
        warnings.warn("the timing benchmark runs single-threaded; --threads ignored")
    report = run_timing_benchmark(_experiment_config(args))
    _write_text(report_json(report), args.output)
    if args.table:
        _write_text(format_timing_table(report) + "\n", args.table)
    if args.env:
        _write_text(json.dumps(environment_stamp(), indent=2, sort_keys=True) + "\n", args.env)


def build_parser():
    parser = argparse.ArgumentParser(prog="pts", description="Perturbed topological signatures")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute-pd", help="persistence diagrams of a cloud, graph or series")
    p.add_argument("input")
    p.add_argument("--kind", choices=("cloud", "graph", "series"), default="cloud")
    p.add_argument("--values", help="vertex values CSV (graph input is the edge CSV)")
    p.add_argument("--direction", choices=("sublevel", "superlevel"), default="sublevel")
    p.add_argument("--max-dim", type=int, default=1)
    p.add_argument("--max-eps", type=float, default=np.inf)
    p.add_argument("--embed-dim", type=int, default=2)
    p.add_argument("--lag", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compute_pd)

    p = sub.add_parser("embed", help="PTS embedding of one diagram")
    p.add_argument("input")
    p.add_argument("--dim", type=int, default=1, help="homology dimension to embed")
    p.add_argument("--scaling", help="JSON file with lo/hi of the scaling box")
    p.add_argument("--include-essential", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("dist", help="distance or kernel between two files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", required=True, help=f"{PD_METRICS_HELP}; or {GRASS_HELP}")
    p.add_argument("--conventional", action="store_true", help="krbf with exp(-beta d^2)")
    p.add_argument("--include-essential", action="store_true")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("knn", help="k-nearest-neighbour classification")
    p.add_argument("--train", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--include-essential", action="store_true")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_knn)

    p = sub.add_parser("gram", help="kernel Gram matrix of a directory of embeddings")
    p.add_argument("directory")
    p.add_argument("--kernel", default="kp")
    p.add_argument("--conventional", action="store_true")
    p.add_argument("--labels")
    p.add_argument("--labels-out", default="labels_out.csv")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("gen", help="synthetic clouds, corpora and series")
    p.add_argument("--class", dest="cls", choices=CLASSES)
    p.add_argument("-n", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--levels", help="comma-separated noise ladder; writes a corpus directory")
    p.add_argument("--classes", help="comma-separated classes for a corpus")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--series", choices=("sine", "sum_of_sines", "lorenz_x"))
    p.add_argument("--length", type=int, default=200)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    for name, fn, text in (("experiment", cmd_experiment, "noise-robustness experiment"),
                           ("bench", cmd_bench, "distance timing benchmark")):
        p = sub.add_parser(name, help=text)
        p.add_argument("-o", "--output", default="-")
        p.add_argument("--table", help="also write the aligned text table here")
        p.add_argument("--env", help="write the environment stamp here")
        p.set_defaults(func=fn)

    for p in sub.choices.values():
        _common(p)
    return parser


def _fail(exc):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return 2


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (PtsError, OSError, ValueError, KeyError) as exc:
        return _fail(exc)
    return 0


def pd_main(argv=None):
    parser = argparse.ArgumentParser(prog="pd", description="Persistence diagram distances")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("dist")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", default="w1", help=PD_METRICS_HELP)
    p.add_argument("--include-essential", action="store_true")
    args = parser.parse_args(argv)
    try:
        parse_pd_metric(args.metric)
        a, b = _load_feature(args.a), _load_feature(args.b)
        if isinstance(a, GrassmannPoint) or isinstance(b, GrassmannPoint):
            raise PtsError("pd dist takes diagram CSV files")
        print(repr(float(_pd_distance(a, b, args.metric, args.include_essential))))
    except (PtsError, OSError, ValueError, KeyError) as exc:
        return _fail(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
