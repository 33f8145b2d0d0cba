"""Reference implementations that share no code with the package."""
import itertools

import numpy as np
from scipy.linalg import subspace_angles
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform


def mst_h0_deaths(cloud):
    """Finite H0 deaths of a Rips filtration are the MST edge lengths."""
    D = squareform(pdist(np.asarray(cloud, dtype=float)))
    # every spanning tree has n - 1 edges, so a constant offset keeps the MST
    # and stops csgraph from reading zero distances as missing edges
    T = minimum_spanning_tree(D + 1.0 - np.eye(len(D))).toarray()
    return np.sort(T[T > 0] - 1.0)


def _rank_gf2(M):
    M = (np.asarray(M) % 2).astype(np.uint8)
    rows, cols = M.shape
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if M[r, c]), None)
        if pivot is None:
            continue
        M[[rank, pivot]] = M[[pivot, rank]]
        for r in range(rows):
            if r != rank and M[r, c]:
                M[r] ^= M[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def rips_betti1(cloud, eps):
    """First Betti number of the Rips complex at scale ``eps`` (Z/2)."""
    D = squareform(pdist(np.asarray(cloud, dtype=float)))
    n = D.shape[0]
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if D[i, j] <= eps]
    tris = [t for t in itertools.combinations(range(n), 3)
            if D[t[0], t[1]] <= eps and D[t[0], t[2]] <= eps and D[t[1], t[2]] <= eps]
    eidx = {e: k for k, e in enumerate(edges)}
    d1 = np.zeros((n, len(edges)), dtype=np.uint8)
    for k, (i, j) in enumerate(edges):
        d1[i, k] = d1[j, k] = 1
    d2 = np.zeros((len(edges), len(tris)), dtype=np.uint8)
    for k, (a, b, c) in enumerate(tris):
        for e in ((a, b), (a, c), (b, c)):
            d2[eidx[e], k] = 1
    r1 = _rank_gf2(d1) if edges else 0
    r2 = _rank_gf2(d2) if tris else 0
    return len(edges) - r1 - r2


def bars_alive(births, deaths, eps):
    """Bars [b, d) alive at eps."""
    births, deaths = np.asarray(births), np.asarray(deaths)
    return int(np.count_nonzero((births <= eps) & (eps < deaths)))


def sublevel_components(n, edges, values, t):
    """Connected components of the subgraph induced by vertices with value <= t."""
    values = np.asarray(values, dtype=float)
    keep = np.flatnonzero(values <= t)
    if keep.size == 0:
        return 0
    pos = {v: i for i, v in enumerate(keep)}
    A = np.zeros((keep.size, keep.size))
    for u, v in edges:
        if u in pos and v in pos:
            A[pos[u], pos[v]] = A[pos[v], pos[u]] = 1
    return connected_components(A, directed=False)[0]


def _aug(X, Y):
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    n, m = len(X), len(Y)
    C = np.zeros((n + m, n + m))
    if n and m:
        C[:n, :m] = np.max(np.abs(X[:, None, :] - Y[None, :, :]), axis=2)
    big = 1e18
    C[:n, m:] = big
    C[n:, :m] = big
    for i in range(n):
        C[i, m + i] = (X[i, 1] - X[i, 0]) / 2
    for j in range(m):
        C[n + j, j] = (Y[j, 1] - Y[j, 0]) / 2
    return C


def wasserstein_lsa(X, Y, p=1.0):
    C = _aug(X, Y)
    if C.size == 0:
        return 0.0
    Cp = np.where(C >= 1e18, 1e18, C ** p)
    r, c = linear_sum_assignment(Cp)
    return float(Cp[r, c].sum() ** (1.0 / p))


def bottleneck_enum(X, Y):
    """Bottleneck by trying every threshold with an assignment feasibility test."""
    C = _aug(X, Y)
    if C.size == 0:
        return 0.0
    for t in np.unique(C[C < 1e18]):
        r, c = linear_sum_assignment((C > t).astype(float))
        if not (C[r, c] > t).any():
            return float(t)
    raise AssertionError("no feasible threshold")


def principal_angles_scipy(A, B):
    return np.sort(subspace_angles(A, B))


def kde_direct(points, sigma, k):
    """Unshifted direct evaluation at cell centres, normalised."""
    c = (np.arange(k) + 0.5) / k
    X, Y = np.meshgrid(c, c, indexing="ij")
    out = np.zeros((k, k))
    for x, y in np.asarray(points, dtype=float).reshape(-1, 2):
        out += np.exp(-((X - x) ** 2 + (Y - y) ** 2) / (2 * sigma ** 2))
    return out / out.sum()


def gaussian_dx(points, sigma, k):
    """Closed-form x-derivative of the normalised single-Gaussian surface."""
    c = (np.arange(k) + 0.5) / k
    X, Y = np.meshgrid(c, c, indexing="ij")
    (x, y), = np.asarray(points, dtype=float).reshape(-1, 2)
    g = np.exp(-((X - x) ** 2 + (Y - y) ** 2) / (2 * sigma ** 2))
    return -(X - x) / sigma ** 2 * g / g.sum()


def random_orthonormal(rng, N, p):
    Q, _ = np.linalg.qr(rng.standard_normal((N, p)))
    return Q
