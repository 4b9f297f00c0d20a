"""Transportation simplex on the bipartite supply/demand graph.

The basis is a spanning tree over ``n`` row nodes and ``m`` column nodes
(``n + m - 1`` basic cells). Row node ``i`` is vertex ``i`` and column node
``j`` is vertex ``n + j``.
"""

from collections import deque

import numpy as np

from .exceptions import NumericalError


def northwest_corner(p, q):
    """Initial basic feasible solution as ``{(i, j): flow}``."""
    n, m = len(p), len(q)
    a, b = p.astype(np.float64).copy(), q.astype(np.float64).copy()
    basis = {}
    i = j = 0
    while True:
        x = min(a[i], b[j])
        basis[i, j] = x
        a[i] -= x
        b[j] -= x
        if i == n - 1 and j == m - 1:
            break
        if j == m - 1 or (i < n - 1 and a[i] <= b[j]):
            i += 1
        else:
            j += 1
    return basis


def _adjacency(basis, n, m):
    adj = [[] for _ in range(n + m)]
    for i, j in basis:
        adj[i].append(n + j)
        adj[n + j].append(i)
    return adj


def _potentials(basis, C, n, m, adj):
    u = np.zeros(n)
    v = np.zeros(m)
    seen = [False] * (n + m)
    seen[0] = True
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nxt in adj[node]:
            if seen[nxt]:
                continue
            seen[nxt] = True
            if node < n:
                v[nxt - n] = C[node, nxt - n] - u[node]
            else:
                u[nxt] = C[nxt, node - n] - v[node - n]
            queue.append(nxt)
    return u, v


def _tree_path(adj, start, goal):
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt in adj[node]:
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return path


def transportation_simplex(p, q, C, max_pivots=None):
    """Minimize ``<C, X>`` over couplings of ``p`` and ``q``.

    Returns ``(X, pivots)`` where ``X`` is a vertex of the transportation
    polytope. Dantzig's entering rule is used until a run of degenerate
    pivots is seen, after which Bland's rule takes over to rule out cycling.
    """
    n, m = C.shape
    basis = northwest_corner(p, q)
    scale = max(1.0, float(np.abs(C).max()))
    tol = 1e-12 * scale
    if max_pivots is None:
        max_pivots = 100 * (n + m) * max(n, m) + 1000
    degenerate_run = 0
    pivots = 0
    while True:
        adj = _adjacency(basis, n, m)
        u, v = _potentials(basis, C, n, m, adj)
        reduced = C - u[:, None] - v[None, :]
        bland = degenerate_run > n + m
        if bland:
            negative = np.flatnonzero(reduced.ravel() < -tol)
            if negative.size == 0:
                break
            flat = int(negative[0])
        else:
            flat = int(np.argmin(reduced))
            if reduced.flat[flat] >= -tol:
                break
        if pivots >= max_pivots:
            raise NumericalError(f"transportation simplex did not terminate in {max_pivots} pivots")
        ie, je = divmod(flat, m)
        # path runs from column je back to row ie; cells alternate -, +, -, ...
        path = _tree_path(adj, ie, n + je)
        cells = []
        for a, b in zip(path, path[1:]):
            cells.append((b, a - n) if a >= n else (a, b - n))
        minus = cells[0::2]
        plus = cells[1::2]
        theta = min(basis[c] for c in minus)
        blocking = [c for c in minus if basis[c] == theta]
        leaving = min(blocking, key=lambda c: c[0] * m + c[1]) if bland else blocking[0]
        for c in minus:
            basis[c] -= theta
        for c in plus:
            basis[c] += theta
        del basis[leaving]
        basis[ie, je] = theta
        degenerate_run = degenerate_run + 1 if theta == 0 else 0
        pivots += 1
    X = np.zeros((n, m))
    for (i, j), x in basis.items():
        X[i, j] = max(x, 0.0)
    return X, pivots
