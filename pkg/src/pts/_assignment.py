"""Assignment kernels: Hungarian algorithm and Hopcroft-Karp matching."""
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from ._accel import njit, select


@njit
def hungarian_nb(cost):
    """Minimum-cost perfect assignment on a square matrix.

    Shortest augmenting paths with row/column potentials, O(n^3). Returns the
    column assigned to each row.
    """
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1)
    used = np.empty(n + 1, dtype=np.bool_)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = np.inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    col_of_row = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        col_of_row[p[j] - 1] = j - 1
    return col_of_row


def hungarian_np(cost):
    cost = np.asarray(cost, dtype=float)
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    padded = np.zeros((n + 1, n + 1))
    padded[1:, 1:] = cost
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = padded[i0] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            masked = np.where(free, minv, np.inf)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.int64)
    col_of_row[p[1:] - 1] = np.arange(n)
    return col_of_row


@njit
def hopcroft_karp_nb(adj):
    """Size of a maximum matching in the bipartite graph ``adj`` (rows x cols)."""
    n_left, n_right = adj.shape
    match_l = np.full(n_left, -1, dtype=np.int64)
    match_r = np.full(n_right, -1, dtype=np.int64)
    far = n_left + n_right + 1
    dist = np.empty(n_left, dtype=np.int64)
    queue = np.empty(n_left, dtype=np.int64)
    stack = np.empty(n_left + 1, dtype=np.int64)
    via = np.empty(n_left + 1, dtype=np.int64)
    nxt = np.empty(n_left, dtype=np.int64)
    size = 0
    while True:
        head = 0
        tail = 0
        for a in range(n_left):
            if match_l[a] < 0:
                dist[a] = 0
                queue[tail] = a
                tail += 1
            else:
                dist[a] = far
        found = False
        while head < tail:
            a = queue[head]
            head += 1
            for b in range(n_right):
                if not adj[a, b]:
                    continue
                w = match_r[b]
                if w < 0:
                    found = True
                elif dist[w] == far:
                    dist[w] = dist[a] + 1
                    queue[tail] = w
                    tail += 1
        if not found:
            break
        nxt[:] = 0
        for a0 in range(n_left):
            if match_l[a0] >= 0:
                continue
            sp = 1
            stack[0] = a0
            while sp > 0:
                a = stack[sp - 1]
                pushed = False
                done = False
                while nxt[a] < n_right:
                    b = nxt[a]
                    nxt[a] += 1
                    if not adj[a, b]:
                        continue
                    w = match_r[b]
                    if w < 0:
                        via[sp - 1] = b
                        for lvl in range(sp):
                            match_l[stack[lvl]] = via[lvl]
                            match_r[via[lvl]] = stack[lvl]
                        size += 1
                        done = True
                        break
                    if dist[w] == dist[a] + 1:
                        via[sp - 1] = b
                        stack[sp] = w
                        sp += 1
                        pushed = True
                        break
                if done:
                    break
                if not pushed:
                    dist[a] = far
                    sp -= 1
    return size


def hopcroft_karp_np(adj):
    graph = csr_matrix(np.asarray(adj, dtype=bool))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return int(np.count_nonzero(match >= 0))


hungarian = select(hungarian_nb, hungarian_np)
hopcroft_karp = select(hopcroft_karp_nb, hopcroft_karp_np)
