"""Union-find and boundary-matrix reduction kernels.

Every kernel exists twice: ``*_nb`` is compiled with numba, ``*_py`` is the
plain numpy/python path used when ``PTS_DISABLE_NUMBA`` is set.
"""
import numpy as np

from ._accel import njit, select


# -- union-find ------------------------------------------------------------

@njit
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit
def edge_merges_nb(n_vertices, edge_u, edge_v):
    """Mark edges that merge two components (H0-negative edges).

    Edges must already be in filtration order. Components are identified by
    their smallest vertex index, which is the elder under equal births.
    """
    parent = np.arange(n_vertices)
    merges = np.zeros(edge_u.shape[0], dtype=np.bool_)
    for e in range(edge_u.shape[0]):
        ru = _find(parent, edge_u[e])
        rv = _find(parent, edge_v[e])
        if ru == rv:
            continue
        merges[e] = True
        if ru < rv:
            parent[rv] = ru
        else:
            parent[ru] = rv
    return merges


def edge_merges_py(n_vertices, edge_u, edge_v):
    parent = list(range(n_vertices))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    merges = np.zeros(len(edge_u), dtype=bool)
    for e, (u, v) in enumerate(zip(edge_u.tolist(), edge_v.tolist())):
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        merges[e] = True
        if ru < rv:
            parent[rv] = ru
        else:
            parent[ru] = rv
    return merges


@njit
def level_set_h0_nb(order, values, adj_ptr, adj_idx):
    """Elder-rule H0 pairing for a vertex filtration.

    ``order`` lists vertices in processing order; ``values`` holds the
    filtration value of each vertex (already sign-adjusted so the sweep is
    ascending). Returns (birth_vertex, death_vertex) pairs for every merge,
    including zero-length ones, plus the root vertex of each final component.
    """
    n = order.shape[0]
    rank = np.empty(n, dtype=np.int64)
    for r in range(n):
        rank[order[r]] = r
    parent = np.arange(n)
    # oldest vertex (lowest rank) of each component, stored at its root
    eldest = np.arange(n)
    active = np.zeros(n, dtype=np.bool_)
    births = np.empty(n, dtype=np.int64)
    deaths = np.empty(n, dtype=np.int64)
    count = 0
    for r in range(n):
        v = order[r]
        active[v] = True
        for a in range(adj_ptr[v], adj_ptr[v + 1]):
            u = adj_idx[a]
            if not active[u]:
                continue
            ru = _find(parent, u)
            rv = _find(parent, v)
            if ru == rv:
                continue
            eu = eldest[ru]
            ev = eldest[rv]
            if rank[eu] < rank[ev]:
                old_root, young_root, old_e, young_e = ru, rv, eu, ev
            else:
                old_root, young_root, old_e, young_e = rv, ru, ev, eu
            births[count] = young_e
            deaths[count] = v
            count += 1
            parent[young_root] = old_root
            eldest[old_root] = old_e
    roots = np.empty(n, dtype=np.int64)
    n_roots = 0
    for v in range(n):
        if _find(parent, v) == v:
            roots[n_roots] = eldest[v]
            n_roots += 1
    return births[:count], deaths[:count], roots[:n_roots]


def level_set_h0_py(order, values, adj_ptr, adj_idx):
    n = len(order)
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    parent = list(range(n))
    eldest = list(range(n))
    active = [False] * n

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    births, deaths = [], []
    for v in order.tolist():
        active[v] = True
        for u in adj_idx[adj_ptr[v]:adj_ptr[v + 1]].tolist():
            if not active[u]:
                continue
            ru, rv = find(u), find(v)
            if ru == rv:
                continue
            eu, ev = eldest[ru], eldest[rv]
            if rank[eu] < rank[ev]:
                old_root, young_root, old_e, young_e = ru, rv, eu, ev
            else:
                old_root, young_root, old_e, young_e = rv, ru, ev, eu
            births.append(young_e)
            deaths.append(v)
            parent[young_root] = old_root
            eldest[old_root] = old_e
    roots = [eldest[v] for v in range(n) if find(v) == v]
    as_arr = lambda xs: np.asarray(xs, dtype=np.int64)
    return as_arr(births), as_arr(deaths), as_arr(roots)


# -- Rips triangles and H1 reduction ---------------------------------------

@njit
def rips_triangles_nb(edge_rank):
    """All triangles whose three edges exist, as sorted edge-rank triples.

    ``edge_rank[i, j]`` is the filtration position of edge ij, or -1 when the
    edge is above the scale cap.
    """
    n = edge_rank.shape[0]
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            if edge_rank[i, j] < 0:
                continue
            for k in range(j + 1, n):
                if edge_rank[i, k] >= 0 and edge_rank[j, k] >= 0:
                    count += 1
    out = np.empty((count, 3), dtype=np.int64)
    t = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = edge_rank[i, j]
            if a < 0:
                continue
            for k in range(j + 1, n):
                b = edge_rank[i, k]
                c = edge_rank[j, k]
                if b < 0 or c < 0:
                    continue
                lo = min(a, min(b, c))
                hi = max(a, max(b, c))
                out[t, 0] = lo
                out[t, 1] = a + b + c - lo - hi
                out[t, 2] = hi
                t += 1
    return out


def rips_triangles_py(edge_rank):
    n = edge_rank.shape[0]
    rows = []
    for i in range(n):
        js = np.nonzero(edge_rank[i, i + 1:] >= 0)[0] + i + 1
        for j in js.tolist():
            ks = np.arange(j + 1, n)
            ok = (edge_rank[i, ks] >= 0) & (edge_rank[j, ks] >= 0)
            ks = ks[ok]
            if ks.size == 0:
                continue
            tri = np.column_stack([
                np.full(ks.size, edge_rank[i, j]), edge_rank[i, ks], edge_rank[j, ks]
            ])
            rows.append(np.sort(tri, axis=1))
    if not rows:
        return np.empty((0, 3), dtype=np.int64)
    return np.concatenate(rows).astype(np.int64)


@njit
def _xor_sorted(a, b):
    out = np.empty(a.shape[0] + b.shape[0], dtype=np.int64)
    i = 0
    j = 0
    n = 0
    while i < a.shape[0] and j < b.shape[0]:
        if a[i] < b[j]:
            out[n] = a[i]
            i += 1
            n += 1
        elif a[i] > b[j]:
            out[n] = b[j]
            j += 1
            n += 1
        else:
            i += 1
            j += 1
    while i < a.shape[0]:
        out[n] = a[i]
        i += 1
        n += 1
    while j < b.shape[0]:
        out[n] = b[j]
        j += 1
        n += 1
    return out[:n]


@njit
def reduce_triangles_nb(triangles, n_edges, n_positive):
    """Z/2 column reduction of the edge-triangle boundary matrix.

    ``triangles`` rows are sorted edge ranks, given in filtration order.
    Returns, per edge, the index of the triangle that kills it (or -1).
    Stops once ``n_positive`` cycle-creating edges have all been killed,
    since every later column must reduce to zero.
    """
    owner = np.full(n_edges, -1, dtype=np.int64)
    killer = np.full(n_edges, -1, dtype=np.int64)
    store = [np.empty(0, dtype=np.int64)]
    store.pop()
    killed = 0
    for t in range(triangles.shape[0]):
        if killed >= n_positive:
            break
        col = triangles[t].copy()
        while col.shape[0] > 0:
            o = owner[col[col.shape[0] - 1]]
            if o < 0:
                break
            col = _xor_sorted(col, store[o])
        if col.shape[0] > 0:
            low = col[col.shape[0] - 1]
            owner[low] = len(store)
            store.append(col)
            killer[low] = t
            killed += 1
    return killer


def reduce_triangles_py(triangles, n_edges, n_positive):
    owner = {}
    store = []
    killer = np.full(n_edges, -1, dtype=np.int64)
    killed = 0
    for t, row in enumerate(triangles.tolist()):
        if killed >= n_positive:
            break
        col = set(row)
        while col:
            low = max(col)
            o = owner.get(low)
            if o is None:
                break
            col ^= store[o]
        if col:
            low = max(col)
            owner[low] = len(store)
            store.append(col)
            killer[low] = t
            killed += 1
    return killer


edge_merges = select(edge_merges_nb, edge_merges_py)
level_set_h0 = select(level_set_h0_nb, level_set_h0_py)
rips_triangles = select(rips_triangles_nb, rips_triangles_py)
reduce_triangles = select(reduce_triangles_nb, reduce_triangles_py)


# -- dual (coboundary) reduction for H1 ------------------------------------
#
# Reducing the anti-transposed boundary matrix yields the same persistence
# pairs. Edges that merge components are paired in H0 and are cleared up
# front, so only cycle-creating edges get a column. A triangle is identified
# by the key (max_rank * E + mid_rank) * E + min_rank, which orders triangles
# exactly as the filtration does.

@njit
def _coboundary(i, j, rank, n_edges):
    n = rank.shape[0]
    a = rank[i, j]
    keys = np.empty(n, dtype=np.int64)
    m = 0
    for k in range(n):
        if k == i or k == j:
            continue
        b = rank[i, k]
        c = rank[j, k]
        if b < 0 or c < 0:
            continue
        lo = min(a, min(b, c))
        hi = max(a, max(b, c))
        mid = a + b + c - lo - hi
        keys[m] = (hi * n_edges + mid) * n_edges + lo
        m += 1
    return np.sort(keys[:m])


@njit
def reduce_coboundary_nb(edges, rank, positive):
    """Return the killing-triangle key for every edge (-1 when none).

    ``positive`` holds the ranks of cycle-creating edges, in any order; they
    are processed from the last-entering edge backwards.
    """
    n_edges = edges.shape[0]
    killer = np.full(n_edges, -1, dtype=np.int64)
    order = np.sort(positive)[::-1]
    owner = dict()
    owner[np.int64(-1)] = np.int64(-1)
    store = [np.empty(0, dtype=np.int64)]
    for e in order:
        col = _coboundary(edges[e, 0], edges[e, 1], rank, n_edges)
        while col.shape[0] > 0:
            o = owner.get(col[0], -1)
            if o < 0:
                break
            col = _xor_sorted(col, store[o])
        if col.shape[0] > 0:
            owner[col[0]] = len(store)
            store.append(col)
            killer[e] = col[0]
    return killer


def reduce_coboundary_py(edges, rank, positive):
    n_edges = edges.shape[0]
    n = rank.shape[0]
    killer = np.full(n_edges, -1, dtype=np.int64)
    owner = {}
    store = []
    everyone = np.arange(n)
    for e in sorted(positive.tolist(), reverse=True):
        i, j = edges[e]
        a = rank[i, j]
        ks = everyone[(everyone != i) & (everyone != j)]
        b, c = rank[i, ks], rank[j, ks]
        ok = (b >= 0) & (c >= 0)
        tri = np.sort(np.column_stack([np.full(ok.sum(), a), b[ok], c[ok]]), axis=1)
        col = set(((tri[:, 2] * n_edges + tri[:, 1]) * n_edges + tri[:, 0]).tolist())
        while col:
            low = min(col)
            o = owner.get(low)
            if o is None:
                break
            col ^= store[o]
        if col:
            low = min(col)
            owner[low] = len(store)
            store.append(col)
            killer[e] = low
    return killer


reduce_coboundary = select(reduce_coboundary_nb, reduce_coboundary_py)
