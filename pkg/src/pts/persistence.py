"""Persistence diagrams from point clouds, vertex-weighted graphs and series.

Rips filtrations put an edge in at exactly the pairwise distance. Classes that
are still alive at the scale cap are kept, truncated at the cap and flagged
``essential``. Homology is taken over Z/2.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from . import _reduction
from .errors import PtsError, SeriesTooShortError, UnsupportedDimensionError

__all__ = [
    "PersistenceDiagram",
    "FilteredComplex",
    "ScalarGraph",
    "rips_complex",
    "vr_persistence",
    "scalar_field_h0",
    "delay_embed",
    "dedup_points",
    "series_persistence",
]


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs for one homology dimension.

    Essential points are classes that never die inside the filtration range;
    their death equals ``cap``.
    """

    births: np.ndarray
    deaths: np.ndarray
    essential: np.ndarray = None
    dim: int = 0
    cap: float = np.inf

    def __post_init__(self):
        births = np.asarray(self.births, dtype=float).reshape(-1)
        deaths = np.asarray(self.deaths, dtype=float).reshape(-1)
        if births.shape != deaths.shape:
            raise PtsError("births and deaths must have the same length")
        if self.essential is None:
            essential = np.zeros(births.shape, dtype=bool)
        else:
            essential = np.asarray(self.essential, dtype=bool).reshape(-1)
            if essential.shape != births.shape:
                raise PtsError("essential flags must match the number of points")
        if self.dim < 0:
            raise PtsError("homology dimension must be nonnegative")
        if not np.all(np.isfinite(births)):
            raise PtsError("births must be finite")
        if np.any(births > deaths):
            raise PtsError("every point must satisfy birth <= death")
        if np.any(essential) and not np.all(deaths[essential] == self.cap):
            raise PtsError("essential points must die at the cap")
        if not np.all(np.isfinite(deaths[~essential])):
            raise PtsError("non-essential deaths must be finite")
        for name, arr in (("births", births), ("deaths", deaths), ("essential", essential)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "cap", float(self.cap))

    @classmethod
    def from_pairs(cls, pairs, dim=0, essential=None, cap=np.inf):
        pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(pairs[:, 0], pairs[:, 1], essential, dim, cap)

    @classmethod
    def empty(cls, dim=0, cap=np.inf):
        return cls(np.empty(0), np.empty(0), None, dim, cap)

    def __len__(self):
        return self.births.shape[0]

    def __repr__(self):
        return (f"PersistenceDiagram(dim={self.dim}, n={len(self)}, "
                f"essential={int(self.essential.sum())}, cap={self.cap})")

    @property
    def points(self):
        return np.column_stack([self.births, self.deaths])

    @property
    def lifetimes(self):
        return np.abs(self.deaths - self.births)

    def finite(self):
        """Diagram with the essential points dropped."""
        keep = ~self.essential
        return PersistenceDiagram(self.births[keep], self.deaths[keep], None,
                                  self.dim, self.cap)

    def sorted(self):
        order = np.lexsort((self.essential, self.deaths, self.births))
        return PersistenceDiagram(self.births[order], self.deaths[order],
                                  self.essential[order], self.dim, self.cap)

    def scaled(self, c):
        """All births, deaths and the cap multiplied by ``c > 0``."""
        if c <= 0:
            raise PtsError("scale factor must be positive")
        return PersistenceDiagram(self.births * c, self.deaths * c,
                                  self.essential, self.dim, self.cap * c)

    def allclose(self, other, atol=1e-9):
        if len(self) != len(other) or self.dim != other.dim:
            return False
        a, b = self.sorted(), other.sorted()
        return (np.array_equal(a.essential, b.essential)
                and np.allclose(a.births, b.births, rtol=0, atol=atol)
                and np.allclose(a.deaths, b.deaths, rtol=0, atol=atol))


@dataclass(frozen=True)
class FilteredComplex:
    """Rips complex up to triangles, with every simplex in filtration order.

    Edges are stored as vertex pairs; triangles as sorted triples of edge
    positions, which is exactly the column support of the boundary matrix.
    """

    n_vertices: int
    edges: np.ndarray
    edge_values: np.ndarray
    triangle_edges: np.ndarray = field(default_factory=lambda: np.empty((0, 3), dtype=np.int64))
    max_dim: int = 1

    @property
    def triangle_values(self):
        if self.triangle_edges.shape[0] == 0:
            return np.empty(0)
        return self.edge_values[self.triangle_edges[:, 2]]

    def check_monotone(self):
        """True when every face enters no later than its coface."""
        if np.any(np.diff(self.edge_values) < 0):
            return False
        if self.triangle_edges.shape[0] == 0:
            return True
        tv = self.triangle_values
        faces = self.edge_values[self.triangle_edges]
        return bool(np.all(faces <= tv[:, None]) and np.all(np.diff(tv) >= 0))


def _as_cloud(cloud):
    pts = np.asarray(cloud, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise PtsError("point cloud must be a nonempty (n, D) array")
    if pts.shape[1] < 1:
        raise PtsError("points need at least one coordinate")
    if not np.all(np.isfinite(pts)):
        raise PtsError("point coordinates must be finite")
    return pts


def _edge_filtration(pts, max_eps):
    n = pts.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    lengths = pdist(pts) if n > 1 else np.empty(0)
    keep = lengths <= max_eps
    iu, ju, lengths = iu[keep], ju[keep], lengths[keep]
    order = np.lexsort((ju, iu, lengths))
    edges = np.column_stack([iu[order], ju[order]]).astype(np.int64)
    return edges, lengths[order]


def _edge_rank(n, edges):
    rank = np.full((n, n), -1, dtype=np.int64)
    r = np.arange(edges.shape[0])
    rank[edges[:, 0], edges[:, 1]] = r
    rank[edges[:, 1], edges[:, 0]] = r
    return rank


def _check_rips_args(max_dim, max_eps):
    if max_dim not in (0, 1):
        raise UnsupportedDimensionError(f"max_dim must be 0 or 1, got {max_dim}")
    if not max_eps > 0:
        raise PtsError("max_eps must be positive")


def rips_complex(cloud, max_dim, max_eps):
    """Build the Rips filtration of ``cloud`` up to ``max_dim + 1`` simplices."""
    pts = _as_cloud(cloud)
    _check_rips_args(max_dim, max_eps)
    n = pts.shape[0]
    edges, values = _edge_filtration(pts, max_eps)
    tris = np.empty((0, 3), dtype=np.int64)
    if max_dim >= 1 and edges.shape[0] >= 3:
        tris = _reduction.rips_triangles(_edge_rank(n, edges))
        if tris.shape[0]:
            tris = tris[np.lexsort((tris[:, 0], tris[:, 1], tris[:, 2]))]
    return FilteredComplex(n, edges, values, tris, max_dim)


def vr_persistence(cloud, max_dim, max_eps, algorithm="dual"):
    """Rips persistence diagrams for dimensions ``0..max_dim``.

    Parameters
    ----------
    cloud : array_like, shape (n, D)
    max_dim : {0, 1}
    max_eps : float
        Largest scale considered. Classes alive at this scale are reported as
        essential points ``(birth, max_eps)``.
    algorithm : {"dual", "standard"}
        H1 engine. ``"standard"`` reduces the edge-triangle boundary matrix
        column by column; ``"dual"`` reduces its anti-transpose with H0
        clearing, which gives the same pairs and is much faster once most
        triangles are present.

    Returns
    -------
    list of PersistenceDiagram
        One diagram per dimension. H0 always holds exactly ``n`` points, with
        zero-length bars from coincident points kept; H1 drops zero-length bars.
    """
    pts = _as_cloud(cloud)
    _check_rips_args(max_dim, max_eps)
    if algorithm not in ("dual", "standard"):
        raise PtsError(f"unknown algorithm {algorithm!r}")
    n = pts.shape[0]
    cap = float(max_eps)
    edges, values = _edge_filtration(pts, max_eps)
    merges = _reduction.edge_merges(n, edges[:, 0].copy(), edges[:, 1].copy())
    h0_deaths = values[merges]
    n_ess = n - h0_deaths.shape[0]
    deaths0 = np.concatenate([h0_deaths, np.full(n_ess, cap)])
    ess0 = np.concatenate([np.zeros(h0_deaths.shape[0], bool), np.ones(n_ess, bool)])
    diagrams = [PersistenceDiagram(np.zeros(n), deaths0, ess0, 0, cap)]
    if max_dim == 0:
        return diagrams

    positive = np.flatnonzero(~merges)
    n_edges = edges.shape[0]
    if algorithm == "dual":
        rank = _edge_rank(n, edges)
        keys = _reduction.reduce_coboundary(edges, rank, positive)
        # key // E^2 is the rank of the triangle's longest edge
        death_edge = np.where(keys >= 0, keys // max(n_edges, 1) ** 2, -1)
    else:
        cx = rips_complex(pts, max_dim, max_eps)
        killer = _reduction.reduce_triangles(cx.triangle_edges, n_edges, positive.shape[0])
        longest = cx.triangle_edges[:, 2]
        death_edge = np.full(n_edges, -1, dtype=np.int64)
        death_edge[killer >= 0] = longest[killer[killer >= 0]]

    de = death_edge[positive]
    birth = values[positive]
    dead = de >= 0
    death = np.where(dead, values[np.maximum(de, 0)], cap)
    keep = np.where(dead, death > birth, birth < cap)
    diagrams.append(PersistenceDiagram(birth[keep], death[keep], ~dead[keep], 1, cap))
    return diagrams


@dataclass(frozen=True, eq=False)
class ScalarGraph:
    """Graph with a real value on every vertex."""

    n_vertices: int
    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        n = int(self.n_vertices)
        if values.shape[0] != n:
            raise PtsError(f"expected {n} vertex values, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise PtsError("vertex values must be finite")
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise PtsError("edge references a vertex that does not exist")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise PtsError("self-loops are not allowed")
        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)

    @classmethod
    def path(cls, values):
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        edges = np.column_stack([np.arange(n - 1), np.arange(1, n)])
        return cls(n, edges, values)

    def adjacency(self):
        u = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        v = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((v, u))
        u, v = u[order], v[order]
        ptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.add.at(ptr, u + 1, 1)
        return np.cumsum(ptr), v.astype(np.int64)


def scalar_field_h0(graph, direction="sublevel"):
    """H0 persistence of the sub- or superlevel sets of a vertex function.

    Superlevel diagrams are reported in the coordinate ``-g`` so that every
    point still has ``birth <= death``; negate both columns to get raw values.
    Ties in the sweep are broken by vertex index, and on a merge between
    equally old components the one holding the lower-ranked vertex survives.
    Zero-length bars are dropped; each connected component contributes one
    essential point dying at the largest swept value.
    """
    if direction not in ("sublevel", "superlevel"):
        raise PtsError(f"unknown direction {direction!r}")
    f = graph.values if direction == "sublevel" else -graph.values
    n = graph.n_vertices
    if n == 0:
        raise PtsError("graph has no vertices")
    order = np.lexsort((np.arange(n), f))
    ptr, idx = graph.adjacency()
    bv, dv, roots = _reduction.level_set_h0(order, f, ptr, idx)
    births, deaths = f[bv], f[dv]
    keep = deaths > births
    cap = float(f.max())
    roots = np.sort(roots)
    b = np.concatenate([births[keep], f[roots]])
    d = np.concatenate([deaths[keep], np.full(roots.shape[0], cap)])
    ess = np.concatenate([np.zeros(int(keep.sum()), bool), np.ones(roots.shape[0], bool)])
    return PersistenceDiagram(b, d, ess, 0, cap)


def delay_embed(series, embed_dim, lag):
    """Delay-coordinate embedding ``(x_i, x_{i+lag}, ..., x_{i+(m-1)lag})``."""
    x = np.asarray(series, dtype=float).reshape(-1)
    if embed_dim < 1 or lag < 1:
        raise PtsError("embed_dim and lag must both be at least 1")
    span = (embed_dim - 1) * lag
    if x.shape[0] < span + 1:
        raise SeriesTooShortError(x.shape[0], span + 1)
    windows = np.lib.stride_tricks.sliding_window_view(x, span + 1)
    return np.ascontiguousarray(windows[:, ::lag])


def dedup_points(cloud, tol=1e-12):
    """Drop points lying within ``tol`` (Euclidean) of an earlier point."""
    pts = _as_cloud(cloud)
    if pts.shape[0] < 2:
        return pts
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    if pairs.size == 0:
        return pts
    drop = np.zeros(pts.shape[0], dtype=bool)
    # pairs come as (i, j) with i < j; keep the earliest representative
    for i, j in pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))].tolist():
        if not drop[i]:
            drop[j] = True
    return pts[~drop]


def series_persistence(series, embed_dim, lag, max_dim, max_eps, dedup_tol=1e-12):
    """Delay-embed a series, merge near-duplicate points, then run Rips."""
    cloud = delay_embed(series, embed_dim, lag)
    if dedup_tol is not None:
        cloud = dedup_points(cloud, dedup_tol)
    return vr_persistence(cloud, max_dim, max_eps)
