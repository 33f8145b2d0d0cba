"""Synthetic shapes with controlled jitter, and time series generators.

Every generator is a pure function of its arguments and seed. Seeds for
corpus members are derived from the master seed and the member's
(class, trial, level) position, so any subset can be regenerated alone.
"""
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import PtsError

__all__ = [
    "CLASSES",
    "ShapeSpec",
    "LabeledCloud",
    "sample_shape",
    "noise_ladder",
    "write_corpus",
    "sample_series",
]

CLASSES = ("circle", "two_circles", "figure_eight", "sphere", "torus", "blob")


@dataclass(frozen=True)
class ShapeSpec:
    cls: str
    n: int = 100
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise PtsError(f"unknown shape class {self.cls!r}; choose from {CLASSES}")
        if self.n < 3:
            raise PtsError("a shape needs at least 3 samples")
        if self.noise_sigma < 0:
            raise PtsError("noise_sigma must be nonnegative")


@dataclass(frozen=True, eq=False)
class LabeledCloud:
    points: np.ndarray
    cls: str
    level: float
    trial: int

    @property
    def label(self):
        return CLASSES.index(self.cls)


def _circle(n, rng):
    t = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack([np.cos(t), np.sin(t)])


def _two_circles(n, rng):
    half = n // 2
    a, b = _circle(half, rng), _circle(n - half, rng)
    a[:, 0] -= 2.0
    b[:, 0] += 2.0
    return np.concatenate([a, b])


def _figure_eight(n, rng):
    # two unit circles touching at the origin
    pts = _circle(n, rng)
    side = np.where(np.arange(n) < n // 2, -1.0, 1.0)
    pts[:, 0] += side
    return pts


def _sphere(n, rng):
    x = rng.standard_normal((n, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _torus(n, rng, major=1.0, minor=0.4):
    u = rng.uniform(0.0, 2.0 * np.pi, n)
    v = rng.uniform(0.0, 2.0 * np.pi, n)
    ring = major + minor * np.cos(v)
    return np.column_stack([ring * np.cos(u), ring * np.sin(u), minor * np.sin(v)])


def _blob(n, rng):
    return 0.5 * rng.standard_normal((n, 3))


_GENERATORS = {
    "circle": _circle,
    "two_circles": _two_circles,
    "figure_eight": _figure_eight,
    "sphere": _sphere,
    "torus": _torus,
    "blob": _blob,
}


def _base_cloud(cls, n, seed):
    return _GENERATORS[cls](n, np.random.default_rng(seed))


def _jitter(points, sigma, seed):
    if sigma == 0:
        return points.copy()
    rng = np.random.default_rng(seed)
    return points + sigma * rng.standard_normal(points.shape)


def sample_shape(spec):
    """Sample ``spec.n`` points of a shape, plus i.i.d. Gaussian jitter."""
    base = _base_cloud(spec.cls, spec.n, [int(spec.seed)])
    return _jitter(base, spec.noise_sigma, [int(spec.seed), 1])


def noise_ladder(specs, levels, trials, seed=0):
    """Jittered copies of shapes at increasing noise levels.

    For every class in ``specs``, every trial and every level, one cloud is
    produced; all levels of one (class, trial) jitter the same clean sample.
    Returns a flat list ordered by trial, then class, then level.
    """
    if isinstance(specs, ShapeSpec):
        specs = [specs]
    levels = [float(x) for x in levels]
    if not levels:
        raise PtsError("levels must be nonempty")
    if any(b < a for a, b in zip(levels, levels[1:])):
        raise PtsError("levels must be ascending")
    if any(x < 0 for x in levels):
        raise PtsError("noise levels must be nonnegative")
    out = []
    for trial in range(trials):
        for spec in specs:
            c = CLASSES.index(spec.cls)
            base = _base_cloud(spec.cls, spec.n, [int(seed), c, trial])
            for li, level in enumerate(levels):
                pts = _jitter(base, level, [int(seed), c, trial, li + 1])
                out.append(LabeledCloud(pts, spec.cls, level, trial))
    return out


def write_corpus(corpus, outdir):
    """Write each cloud as CSV plus a ``manifest.json`` describing them."""
    os.makedirs(outdir, exist_ok=True)
    entries = []
    for i, item in enumerate(corpus):
        name = f"{i:05d}_{item.cls}_t{item.trial}_l{item.level:g}.csv"
        np.savetxt(os.path.join(outdir, name), item.points, delimiter=",", fmt="%.17g")
        entries.append({"file": name, "class": item.cls, "level": item.level,
                        "trial": item.trial})
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(entries, fh, indent=2)
    return entries


def _positive(params, key, default):
    val = float(params.get(key, default))
    if not val > 0:
        raise PtsError(f"{key} must be positive, got {val}")
    return val


def sample_series(kind, length, params=None, seed=0):
    """Deterministic scalar series.

    kind ``sine``: amplitude * sin(2 pi t / period + phase).
    kind ``sum_of_sines``: sum over ``periods`` and ``amplitudes``.
    kind ``lorenz_x``: x coordinate of the Lorenz system, fixed-step RK4 with
    step ``dt``, after discarding ``transient`` steps. The seed nudges the
    initial condition by ``ic_jitter``.

    Any kind accepts ``noise`` for additive Gaussian noise drawn from ``seed``.
    """
    params = dict(params or {})
    if length < 10:
        raise PtsError("series length must be at least 10")
    t = np.arange(length, dtype=float)
    if kind == "sine":
        period = _positive(params, "period", 50.0)
        x = params.get("amplitude", 1.0) * np.sin(2 * np.pi * t / period + params.get("phase", 0.0))
    elif kind == "sum_of_sines":
        periods = params.get("periods", (50.0, 50.0 * np.sqrt(2.0)))
        amps = params.get("amplitudes", (1.0,) * len(periods))
        if len(amps) != len(periods) or any(p <= 0 for p in periods):
            raise PtsError("sum_of_sines needs positive periods and one amplitude each")
        x = sum(a * np.sin(2 * np.pi * t / p) for a, p in zip(amps, periods))
    elif kind == "lorenz_x":
        x = _lorenz_x(length, params, seed)
    else:
        raise PtsError(f"unknown series kind {kind!r}")
    noise = float(params.get("noise", 0.0))
    if noise < 0:
        raise PtsError("noise must be nonnegative")
    if noise:
        x = x + noise * np.random.default_rng([int(seed), 7]).standard_normal(length)
    return np.asarray(x, dtype=float)


def _lorenz_x(length, params, seed):
    s = float(params.get("sigma", 10.0))
    r = float(params.get("rho", 28.0))
    b = float(params.get("beta", 8.0 / 3.0))
    dt = _positive(params, "dt", 0.01)
    transient = int(params.get("transient", 1000))
    if transient < 0:
        raise PtsError("transient must be nonnegative")
    state = np.array(params.get("x0", (1.0, 1.0, 1.0)), dtype=float)
    jit = float(params.get("ic_jitter", 1e-3))
    state = state + jit * np.random.default_rng([int(seed), 3]).standard_normal(3)

    def f(u):
        return np.array([s * (u[1] - u[0]), u[0] * (r - u[2]) - u[1], u[0] * u[1] - b * u[2]])

    out = np.empty(length)
    for i in range(transient + length):
        k1 = f(state)
        k2 = f(state + 0.5 * dt * k1)
        k3 = f(state + 0.5 * dt * k2)
        k4 = f(state + dt * k3)
        state = state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if i >= transient:
            out[i - transient] = state[0]
    return out
