"""Perturbed topological signatures: persistence diagrams as subspaces.

The pipeline maps each diagram point (b, d) to (mean, lifetime), rescales a
dataset-wide bounding box onto the unit square, draws ``m`` randomly
displaced copies of the diagram, turns the original and every copy into a
normalised Gaussian surface on a k x k grid, and keeps the ``p`` leading
left singular vectors of the stacked, vectorised surfaces.
"""
import json
from dataclasses import asdict, dataclass, field
import warnings

import numpy as np

from . import _kde
from .errors import PtsError, RankDeficientError
from .grassmann import GrassmannPoint, leading_left_vectors, numerical_rank, _fix_signs
from .persistence import PersistenceDiagram

__all__ = [
    "PtsConfig",
    "Scaling",
    "PersistenceSurface",
    "transform_axes",
    "fit_scaling",
    "perturb",
    "kde_surface",
    "surface_stack",
    "pts_embed",
    "perturbation_subspace",
    "surface_gradient",
    "analytic_tangent_subspace",
    "aggregate_embeddings",
    "structure_tensor_min_eig",
    "calibrate_g_value",
    "stability_bound",
]


@dataclass(frozen=True)
class PtsConfig:
    """Hyperparameters of the signature pipeline.

    ``sigma`` and ``perturb_r`` are in normalised units, where the scaling
    box is mapped onto [0, 1]^2. When ``sigma_list`` is given, surfaces for
    every bandwidth in it are stacked together and ``sigma`` is ignored.
    """

    sigma: float = 0.0004
    grid_k: int = 50
    perturb_m: int = 40
    perturb_r: float = 0.02
    subspace_p: int = 10
    seed: int = 0
    margin: float = 0.05
    sigma_list: tuple = None

    def __post_init__(self):
        if self.sigma_list is not None:
            object.__setattr__(self, "sigma_list", tuple(float(s) for s in self.sigma_list))
        self.validate()

    @property
    def sigmas(self):
        return self.sigma_list if self.sigma_list else (self.sigma,)

    def validate(self):
        if not all(s > 0 for s in self.sigmas) or not self.sigma > 0:
            raise PtsError("sigma must be positive")
        if self.grid_k < 2:
            raise PtsError("grid_k must be at least 2")
        if self.perturb_m < 1:
            raise PtsError("perturb_m must be at least 1")
        if not 0 <= self.perturb_r < 1:
            raise PtsError("perturb_r must lie in [0, 1)")
        if not 1 <= self.subspace_p <= min(self.perturb_m + 1, self.grid_k ** 2):
            raise PtsError(
                f"subspace_p must lie in [1, {min(self.perturb_m + 1, self.grid_k ** 2)}]"
            )
        if not 0 <= self.margin < 0.5:
            raise PtsError("margin must lie in [0, 0.5)")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise PtsError("seed must fit in an unsigned 64-bit integer")

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return PtsConfig(**d)

    def to_dict(self):
        d = asdict(self)
        d["sigma_list"] = list(self.sigma_list) if self.sigma_list else None
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise PtsError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


@dataclass(frozen=True)
class Scaling:
    """Axis-aligned box in (mean, lifetime) coordinates mapped onto [0, 1]^2."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 2 or len(hi) != 2 or not all(h > l for l, h in zip(lo, hi)):
            raise PtsError(f"invalid scaling box lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self):
        return np.subtract(self.hi, self.lo)

    def normalize(self, pts):
        return (np.asarray(pts, dtype=float) - np.asarray(self.lo)) / self.width

    def denormalize(self, pts):
        return np.asarray(pts, dtype=float) * self.width + np.asarray(self.lo)

    def to_dict(self):
        return {"lo": list(self.lo), "hi": list(self.hi)}


UNIT_BOX = Scaling((0.0, 0.0), (1.0, 1.0))


@dataclass(frozen=True, eq=False)
class PersistenceSurface:
    """Nonnegative k x k grid summing to one; cell (i, j) is centred at
    ((i + 0.5) / k, (j + 0.5) / k) with i along the mean axis."""

    values: np.ndarray

    @property
    def grid_k(self):
        return self.values.shape[0]

    @property
    def vector(self):
        return self.values.ravel()

    @staticmethod
    def centers(k):
        return (np.arange(k) + 0.5) / k


def transform_axes(pd):
    """(birth, death) -> (mean, lifetime) for every point, essential included."""
    if isinstance(pd, PersistenceDiagram):
        b, d = pd.births, pd.deaths
    else:
        pts = np.asarray(pd, dtype=float).reshape(-1, 2)
        b, d = pts[:, 0], pts[:, 1]
    return np.column_stack([(b + d) / 2.0, d - b])


def _as_transformed(pd):
    if isinstance(pd, PersistenceDiagram):
        return transform_axes(pd)
    return np.asarray(pd, dtype=float).reshape(-1, 2)


def fit_scaling(pds, margin=0.05):
    """Dataset-wide bounding box of transformed diagrams, grown by ``margin``.

    Accepts transformed (n, 2) arrays or PersistenceDiagrams (transformed on
    the fly). An axis with zero extent falls back to a unit-width interval
    centred on the data.
    """
    if not 0 <= margin < 0.5:
        raise PtsError("margin must lie in [0, 0.5)")
    pts = [_as_transformed(pd) for pd in pds]
    pts = [p for p in pts if p.shape[0]]
    if not pts:
        raise PtsError("cannot fit a scaling to empty diagrams only")
    allp = np.concatenate(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    width = hi - lo
    flat = width <= 0
    mid = (lo + hi) / 2.0
    lo = np.where(flat, mid - 0.5, lo - margin * width)
    hi = np.where(flat, mid + 0.5, hi + margin * width)
    return Scaling(tuple(lo), tuple(hi))


def perturb(pd, cfg, scaling=None):
    """``cfg.perturb_m`` randomly displaced copies of a transformed diagram.

    Copy ``j`` moves every point by an independent uniform draw from
    [-r, r]^2 in normalised units, taken from a generator seeded with
    ``(cfg.seed, j)``. Lifetimes are clamped at zero.
    """
    pts = _as_transformed(pd)
    if pts.shape[0] == 0:
        raise PtsError("cannot perturb an empty diagram")
    width = UNIT_BOX.width if scaling is None else scaling.width
    r = cfg.perturb_r
    copies = []
    for j in range(cfg.perturb_m):
        rng = np.random.default_rng([int(cfg.seed), j])
        step = rng.uniform(-r, r, size=pts.shape) * width
        moved = pts + step
        moved[:, 1] = np.maximum(moved[:, 1], 0.0)
        copies.append(moved)
    return copies


def kde_surface(pd, sigma, grid_k, scaling=None):
    """Normalised Gaussian surface of a transformed diagram.

    Every point carries the same weight. Values at the cell centres are
    divided by their total, so the grid sums to one.
    """
    pts = _as_transformed(pd)
    if pts.shape[0] == 0:
        raise PtsError("cannot build a surface from an empty diagram")
    if not sigma > 0:
        raise PtsError("sigma must be positive")
    if scaling is not None:
        pts = scaling.normalize(pts)
    grid = _kde.gaussian_grid(np.ascontiguousarray(pts[:, 0]),
                              np.ascontiguousarray(pts[:, 1]), int(grid_k), float(sigma))
    total = grid.sum()
    if not total > 0 or not np.isfinite(total):
        raise PtsError("surface has no mass on the grid")
    return PersistenceSurface(grid / total)


def surface_stack(pd, cfg, scaling=None):
    """N x (m+1)*S matrix of vectorised surfaces: the original diagram first,
    then each perturbed copy, for each of the S bandwidths."""
    pts = _as_transformed(pd)
    copies = [pts] + perturb(pts, cfg, scaling)
    cols = [kde_surface(c, s, cfg.grid_k, scaling).vector
            for s in cfg.sigmas for c in copies]
    return np.column_stack(cols)


_warned_sigma = set()


def _check_bandwidth(cfg):
    cell = 1.0 / cfg.grid_k
    small = min(cfg.sigmas)
    if small < 0.5 * cell and (small, cfg.grid_k) not in _warned_sigma:
        _warned_sigma.add((small, cfg.grid_k))
        warnings.warn(
            f"sigma={small} is below half a grid cell ({cell:.4g}); surfaces "
            "will be close to nearest-cell histograms", stacklevel=3)


def pts_embed(pd, cfg, scaling=None):
    """Perturbed topological signature of one diagram.

    Parameters
    ----------
    pd : PersistenceDiagram or (n, 2) array of transformed points
    cfg : PtsConfig
    scaling : Scaling, optional
        Dataset-wide box from :func:`fit_scaling`. Defaults to the box of
        this diagram alone.

    Returns
    -------
    GrassmannPoint
        ``cfg.subspace_p`` leading left singular vectors of the surface stack.
    """
    pts = _as_transformed(pd)
    if pts.shape[0] == 0:
        raise PtsError("cannot embed an empty diagram")
    if scaling is None:
        scaling = fit_scaling([pts], cfg.margin)
    _check_bandwidth(cfg)
    stack = surface_stack(pts, cfg, scaling)
    return GrassmannPoint(leading_left_vectors(stack, cfg.subspace_p), cfg.grid_k)


def perturbation_subspace(pd, cfg, scaling=None, p=2):
    """Span of the surface changes ``rho(copy) - rho(original)``.

    This is the finite-perturbation counterpart of the translation tangent
    subspace: for small displacements of a one-point diagram the two agree.
    """
    pts = _as_transformed(pd)
    if scaling is None:
        scaling = fit_scaling([pts], cfg.margin)
    stack = surface_stack(pts, cfg.replace(sigma_list=None), scaling)
    diffs = stack[:, 1:] - stack[:, :1]
    return GrassmannPoint(leading_left_vectors(diffs, p, "difference stack"), cfg.grid_k)


def _stencil_matrix(n, width=7):
    """Rows of finite-difference weights for d/dx on n unit-spaced nodes.

    Every node uses the ``width`` nearest nodes (centred where possible,
    shifted inward at the rim), so interior and rim share one order.
    """
    w = min(width, n)
    D = np.zeros((n, n))
    powers = np.arange(w)[:, None]
    rhs = np.zeros(w)
    rhs[1] = 1.0
    for i in range(n):
        start = min(max(i - w // 2, 0), n - w)
        offsets = np.arange(start, start + w) - i
        D[i, start:start + w] = np.linalg.solve(offsets[None, :] ** powers.astype(float), rhs)
    return D


def _derivative(f, h, axis):
    f = np.moveaxis(np.asarray(f, dtype=float), axis, 0)
    out = np.tensordot(_stencil_matrix(f.shape[0]), f, axes=1) / h
    return np.moveaxis(out, 0, axis)


def surface_gradient(surface):
    """Partial derivatives (d/dx, d/dy) of a surface, per normalised unit.

    Seven-point stencils throughout: central in the interior, shifted
    inward near the border.
    """
    v = surface.values if isinstance(surface, PersistenceSurface) else np.asarray(surface, float)
    h = 1.0 / v.shape[0]
    return _derivative(v, h, 0), _derivative(v, h, 1)


def _tangent_columns(surface, model):
    rx, ry = surface_gradient(surface)
    if model == "translation":
        return np.column_stack([rx.ravel(), ry.ravel()])
    if model == "affine":
        k = rx.shape[0]
        c = PersistenceSurface.centers(k)
        x, y = np.meshgrid(c, c, indexing="ij")
        return np.column_stack([rx.ravel(), ry.ravel(), (x * rx).ravel(),
                                (x * ry).ravel(), (y * rx).ravel(), (y * ry).ravel()])
    raise PtsError(f"unknown perturbation model {model!r}")


def analytic_tangent_subspace(surface, model="translation"):
    """Orthonormal span of the first-order change of a surface under small
    translations (2 columns) or affine maps (6 columns) of the plane."""
    X = _tangent_columns(surface, model)
    k = int(round(np.sqrt(X.shape[0])))
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    rank = numerical_rank(s, X.shape)
    # derivative columns of a flat surface are pure rounding noise
    rank = min(rank, int(np.count_nonzero(s > _gradient_floor(surface))))
    if rank < X.shape[1]:
        raise RankDeficientError(X.shape[1], rank, f"{model} tangent matrix")
    return GrassmannPoint(_fix_signs(U), k)


def aggregate_embeddings(points, leading, out_p):
    """Summarise several signatures as one subspace.

    Stacks the first ``leading`` basis vectors of every point side by side and
    keeps the ``out_p`` leading left singular vectors.
    """
    points = list(points)
    if not points:
        raise PtsError("nothing to aggregate")
    N = points[0].N
    if any(pt.N != N for pt in points):
        raise PtsError("all signatures must share the same ambient dimension")
    if any(leading > pt.p for pt in points) or leading < 1:
        raise PtsError("leading must be between 1 and every point's p")
    if not 1 <= out_p <= leading * len(points):
        raise PtsError("out_p must be between 1 and leading * len(points)")
    stack = np.column_stack([pt.basis[:, :leading] for pt in points])
    return GrassmannPoint(leading_left_vectors(stack, out_p, "aggregate stack"),
                          points[0].grid_k)


def _gradient_floor(surface):
    v = surface.values if isinstance(surface, PersistenceSurface) else np.asarray(surface, float)
    return 1e-10 * np.linalg.norm(v) * v.shape[0]


def structure_tensor_min_eig(surface):
    """Smallest eigenvalue of X^T X with X = [d/dx, d/dy] of the surface."""
    X = _tangent_columns(surface, "translation")
    return float(np.linalg.eigvalsh(X.T @ X)[0])


def calibrate_g_value(surfaces, k_max):
    """Corpus-level constant for the stability bound: the minimum over
    ``surfaces`` of the structure tensor's smallest eigenvalue, over k_max^2."""
    surfaces = list(surfaces)
    lams = [structure_tensor_min_eig(s) for s in surfaces]
    if any(not lam > _gradient_floor(s) ** 2 for lam, s in zip(lams, surfaces)):
        raise PtsError("a structure tensor in the corpus is singular")
    return min(lams) / k_max ** 2


def stability_bound(d1, sigma, k_max, N, g_value):
    """Upper bound on the normalised geodesic distance between translation
    subspaces of two diagrams whose 1-Wasserstein distance is ``d1``."""
    if not sigma > 0 or not g_value > 0:
        raise PtsError("sigma and g_value must be positive")
    if d1 < 0 or k_max <= 0 or N <= 0:
        raise PtsError("d1 must be nonnegative and k_max, N positive")
    K = 1.0 / (2.0 * np.pi * sigma ** 2)
    inner = (10.0 / np.pi) * (2.0 / sigma ** 6) * d1 ** 2 + 2.0 * K ** 2 / sigma ** 4 * k_max ** 2 * N
    return float(k_max / np.sqrt(g_value) * np.sqrt(inner))
