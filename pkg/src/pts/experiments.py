"""Noise-robustness classification experiment and distance timing benchmark."""
import json
import platform
import statistics
import time
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _accel
from .datasets import CLASSES, ShapeSpec, noise_ladder
from .errors import PtsError
from .grassmann import chordal_distance, geodesic_distance
from .learn import LabeledSet, knn_classify
from .matching import bottleneck, wasserstein
from .persistence import PersistenceDiagram, dedup_points, vr_persistence
from .signature import PtsConfig, fit_scaling, pts_embed

__all__ = [
    "NOISE_DEFAULTS",
    "TIMING_DEFAULTS",
    "METHODS",
    "run_noise_experiment",
    "run_timing_benchmark",
    "environment_stamp",
    "report_json",
    "format_noise_table",
    "format_timing_table",
]

NOISE_DEFAULTS = {
    "classes": ["circle", "two_circles", "figure_eight", "torus", "blob"],
    "n_points": 100,
    "levels": [round(0.05 * i, 2) for i in range(1, 11)],
    "trials": 20,
    "seed": 0,
    "dims": [0, 1],
    "max_eps": 3.0,
    "include_essential": True,
    "min_lifetime": 0.1,
    "methods": ["w1", "bottleneck", "pts_geo", "pts_chordal"],
    "k": 1,
    "pts": {"sigma": 0.1, "grid_k": 50, "perturb_m": 40, "perturb_r": 0.02,
            "subspace_p": 3, "margin": 0.05},
}

TIMING_DEFAULTS = {
    "n_points": 60,
    "pairs": 20,
    "repetitions": 100,
    "batches": 6,
    "seed": 0,
    "metrics": ["w1", "w2", "bottleneck", "geo", "chordal"],
    "grid_k": 50,
    "grid_sizes": [5, 50, 500],
    # a 5 x 5 grid cannot carry 10 independent smooth surfaces
    "sweep_p": 5,
    "pts": {"sigma": 0.05, "perturb_m": 20, "perturb_r": 0.02, "subspace_p": 10},
}

METHODS = ("w1", "bottleneck", "pts_geo", "pts_chordal")


def _merge(defaults, config):
    cfg = json.loads(json.dumps(defaults))
    for key, val in (config or {}).items():
        if key not in cfg and key != "threads":
            raise PtsError(f"unknown experiment key {key!r}")
        if isinstance(val, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(val)
        else:
            cfg[key] = val
    return cfg


def environment_stamp():
    import numba
    import scipy
    return {
        "python": platform.python_version(),
        "platform": platform.platform(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "backend": _accel.backend(),
    }


def report_json(report):
    """Canonical JSON text of a report (sorted keys, fixed float repr)."""
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _diagrams(cloud, dims, max_eps, min_lifetime=0.0):
    """Diagrams of the requested homology dimensions, short bars removed."""
    out = []
    full = vr_persistence(dedup_points(cloud), max(dims), max_eps)
    for pd in (full[d] for d in dims):
        keep = pd.essential | (pd.lifetimes >= min_lifetime)
        out.append(PersistenceDiagram(pd.births[keep], pd.deaths[keep], pd.essential[keep],
                                      pd.dim, pd.cap))
    return out


def _pd_metric(method, include_essential):
    # composite features are summed over dimensions by knn_classify
    if method == "w1":
        return lambda a, b: wasserstein(a, b, 1.0, include_essential)
    return lambda a, b: bottleneck(a, b, include_essential)


def run_noise_experiment(config=None, threads=1):
    """1-NN classification of jittered shapes against clean galleries.

    For every trial the clean (noise 0) sample of each class forms the
    gallery; each noisy copy at each level is a query. Diagrams of all
    homology dimensions up to ``max_dim`` are compared and their distances
    summed. Returns a JSON-ready report; the result does not depend on
    ``threads``.
    """
    cfg = _merge(NOISE_DEFAULTS, config)
    cfg.pop("threads", None)
    classes = list(cfg["classes"])
    for c in classes:
        if c not in CLASSES:
            raise PtsError(f"unknown class {c!r}")
    methods = list(cfg["methods"])
    for m in methods:
        if m not in METHODS:
            raise PtsError(f"unknown method {m!r}; choose from {METHODS}")
    levels = [float(x) for x in cfg["levels"]]
    if cfg["trials"] < 1 or not levels:
        raise PtsError("need at least one trial and one level")
    dims = sorted(set(int(d) for d in cfg["dims"]))
    if not dims or dims[0] < 0 or dims[-1] > 1:
        raise PtsError("dims must be a nonempty subset of {0, 1}")
    pcfg = PtsConfig(**dict(cfg["pts"], seed=int(cfg["seed"])))

    specs = [ShapeSpec(c, int(cfg["n_points"])) for c in classes]
    corpus = noise_ladder(specs, [0.0] + levels, int(cfg["trials"]), int(cfg["seed"]))
    diagrams = _map(lambda item: _diagrams(item.points, dims, cfg["max_eps"],
                                                cfg["min_lifetime"]),
                    corpus, threads)
    n_dims = len(dims)
    labels = np.array([classes.index(item.cls) for item in corpus])
    trials = np.array([item.trial for item in corpus])
    # noise_ladder emits the levels in order for every (trial, class) block
    level_idx = np.arange(len(corpus)) % (len(levels) + 1) - 1
    is_gallery = level_idx < 0

    if any(m.startswith("pts") for m in methods):
        # the box is fitted on the clean galleries only, queries never shape it
        scalings = []
        for dim in range(n_dims):
            pds = [d[dim] if cfg["include_essential"] else d[dim].finite()
                   for d, g in zip(diagrams, is_gallery) if g]
            scalings.append(fit_scaling(pds, pcfg.margin))

        def embed(dgms):
            out = []
            for dim in range(n_dims):
                pd = dgms[dim] if cfg["include_essential"] else dgms[dim].finite()
                if len(pd) == 0:
                    # sentinel point for a class with no features in this dimension
                    pd = np.array([[scalings[dim].lo[0], 0.0]])
                out.append(pts_embed(pd, pcfg, scalings[dim]))
            return tuple(out)

        embeddings = _map(embed, diagrams, threads)


    results = {}
    for method in methods:
        if method in ("w1", "bottleneck"):
            feats, metric = diagrams, _pd_metric(method, cfg["include_essential"])
        else:
            feats = embeddings
            metric = geodesic_distance if method == "pts_geo" else chordal_distance
        preds = np.full(len(corpus), -1)

        def classify(trial):
            g = np.flatnonzero(is_gallery & (trials == trial))
            q = np.flatnonzero(~is_gallery & (trials == trial))
            gallery = LabeledSet([tuple(feats[i]) for i in g], labels[g])
            return q, knn_classify(gallery, [tuple(feats[i]) for i in q], metric, cfg["k"])

        for q, pr in _map(classify, range(int(cfg["trials"])), threads):
            preds[q] = pr
        query = ~is_gallery
        per_level = [float(np.mean(preds[query & (level_idx == li)] == labels[query & (level_idx == li)]))
                     for li in range(len(levels))]
        conf = np.zeros((len(classes), len(classes)), dtype=int)
        np.add.at(conf, (labels[query], preds[query]), 1)
        per_class = (np.diag(conf) / conf.sum(axis=1)).tolist()
        results[method] = {
            "per_level": per_level,
            "mean": float(np.mean(preds[query] == labels[query])),
            "per_class": per_class,
            "confusion": conf.tolist(),
        }
    return {
        "kind": "noise_experiment",
        "config": cfg,
        "seed": int(cfg["seed"]),
        "classes": classes,
        "levels": levels,
        "results": results,
    }


def _time_calls(fn, pairs, repetitions, batches):
    """Seconds per call: median over batches of the batch mean, first batch
    discarded as warm-up."""
    if batches < 2:
        raise PtsError("need at least two batches (one is warm-up)")
    means = []
    n = len(pairs)
    for b in range(batches):
        t = time.perf_counter()
        for r in range(repetitions):
            x, y = pairs[r % n]
            fn(x, y)
        means.append((time.perf_counter() - t) / repetitions)
    means = means[1:]
    return {
        "median_of_means": statistics.median(means),
        "mean": statistics.fmean(means),
        "std": statistics.stdev(means) if len(means) > 1 else 0.0,
        "repetitions": repetitions * (batches - 1),
    }


_TIMED = {
    "w1": lambda a, b: wasserstein(a, b, 1.0),
    "w2": lambda a, b: wasserstein(a, b, 2.0),
    "bottleneck": bottleneck,
    "geo": geodesic_distance,
    "chordal": chordal_distance,
}


def _bench_corpus(cfg):
    """Finite H0 diagrams of jittered shapes, each with n_points - 1 points."""
    n = int(cfg["n_points"])
    count = 2 * int(cfg["pairs"])
    rng = np.random.default_rng(int(cfg["seed"]))
    pds = []
    for i in range(count):
        cls = ("circle", "torus", "blob")[i % 3]
        spec = ShapeSpec(cls, n, float(rng.uniform(0.05, 0.3)), int(cfg["seed"]) * 1000 + i)
        cloud = dedup_points(noise_ladder(spec, [spec.noise_sigma], 1, spec.seed)[0].points)
        pds.append(vr_persistence(cloud, 0, np.inf)[0].finite())
    return pds


def run_timing_benchmark(config=None, threads=None):
    """Per-call wall-clock time of diagram and subspace distances.

    Always single-threaded; a ``threads`` request is ignored with a warning.
    """
    if threads not in (None, 1):
        warnings.warn("the timing benchmark runs single-threaded; --threads ignored")
    cfg = _merge(TIMING_DEFAULTS, config)
    cfg.pop("threads", None)
    if cfg["repetitions"] < 1 or cfg["pairs"] < 1:
        raise PtsError("repetitions and pairs must be positive")
    for m in cfg["metrics"]:
        if m not in _TIMED:
            raise PtsError(f"unknown metric {m!r}")
    pds = _bench_corpus(cfg)
    if not pds:
        raise PtsError("empty benchmark corpus")
    scaling = fit_scaling(pds)

    def embeddings(k, p=None):
        opts = dict(cfg["pts"], grid_k=int(k), seed=int(cfg["seed"]))
        if p is not None:
            opts["subspace_p"] = int(p)
        pcfg = PtsConfig(**opts)
        return [pts_embed(pd, pcfg, scaling) for pd in pds]

    pd_pairs = list(zip(pds[0::2], pds[1::2]))
    emb = embeddings(cfg["grid_k"])
    emb_pairs = list(zip(emb[0::2], emb[1::2]))
    timings = {}
    for m in cfg["metrics"]:
        pairs = emb_pairs if m in ("geo", "chordal") else pd_pairs
        timings[m] = _time_calls(_TIMED[m], pairs, int(cfg["repetitions"]), int(cfg["batches"]))
    base = timings.get("chordal", {}).get("median_of_means")
    if base:
        for m in timings:
            timings[m]["ratio_to_chordal"] = timings[m]["median_of_means"] / base

    sweep = {}
    for k in cfg["grid_sizes"]:
        e = embeddings(k, cfg["sweep_p"])
        pairs = list(zip(e[0::2], e[1::2]))
        sweep[str(k)] = {
            m: _time_calls(_TIMED[m], pairs, int(cfg["repetitions"]), int(cfg["batches"]))
            for m in ("geo", "chordal")
        }
    return {
        "kind": "timing_benchmark",
        "config": cfg,
        "seed": int(cfg["seed"]),
        "diagram_sizes": sorted({len(pd) for pd in pds}),
        "timings": timings,
        "grid_sweep": sweep,
    }


def format_noise_table(report):
    levels = report["levels"]
    head = "method".ljust(12) + "".join(f"{lv:>7.2f}" for lv in levels) + "   mean"
    lines = [head, "-" * len(head)]
    for m, r in report["results"].items():
        lines.append(m.ljust(12) + "".join(f"{100 * a:7.1f}" for a in r["per_level"])
                     + f"{100 * r['mean']:7.1f}")
    return "\n".join(lines)


def format_timing_table(report):
    lines = [f"{'metric':<12}{'time (1e-4 s)':>15}{'std':>10}{'ratio':>9}"]
    for m, t in report["timings"].items():
        lines.append(f"{m:<12}{1e4 * t['median_of_means']:15.3f}{1e4 * t['std']:10.3f}"
                     f"{t.get('ratio_to_chordal', float('nan')):9.1f}")
    lines.append("")
    lines.append("grid size (k)" + "".join(f"{k:>10}" for k in report["grid_sweep"]))
    for m in ("geo", "chordal"):
        lines.append(f"{m:<13}" + "".join(f"{1e4 * v[m]['median_of_means']:10.3f}"
                                          for v in report["grid_sweep"].values()))
    return "\n".join(lines)
