"""Exact and entropy-regularized optimal transport between word histograms.

The ground cost between two supports is the (non-squared) Euclidean
distance between their embedding vectors. The regularized problem solved
here is::

    min_{P in U(p, q)}  <A, P> - epsilon * H(P),   H(P) = -sum P log P

so a larger ``epsilon`` spreads mass more uniformly.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.distance import cdist

from ._simplex import transportation_simplex
from ._validation import check_cost_matrix, check_marginals, check_vectors, prune_support
from .embeddings import embed_distribution
from .exceptions import DataError, NumericalError

# scalings beyond this factor are absorbed into the log-domain potentials
ABSORB_THRESHOLD = 1e3
SCALING_FACTOR = 0.5
SCALING_STAGE_TOL = 1e-3


@dataclass
class TransportResult:
    plan: np.ndarray
    transport_cost: float
    entropy: float
    objective: float
    iterations: int
    converged: bool
    marginal_violation: float
    epsilon: float = None

    @property
    def shape(self):
        return self.plan.shape


@dataclass(frozen=True)
class SinkhornConfig:
    """Settings of the Sinkhorn-Knopp solver.

    ``tolerance`` bounds the largest absolute row/column marginal error at
    which iterations stop. With ``round_plan`` the final scaled kernel is
    projected onto the transport polytope so returned plans are exactly
    feasible. ``epsilon_scaling`` (stabilized solver only) warm-starts from
    a sequence of larger epsilons, which shortens the long transient of
    small-epsilon problems; ``max_iter`` then caps each stage.
    """

    epsilon: float = 0.1
    max_iter: int = 50
    tolerance: float = 1e-9
    stabilized: bool = True
    round_plan: bool = True
    epsilon_scaling: bool = False

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon!r}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter!r}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance!r}")


def cost_matrix(src_vectors, tgt_vectors):
    """Pairwise Euclidean distances, shape ``(n, m)``."""
    X = check_vectors(src_vectors, "source vectors")
    Y = check_vectors(tgt_vectors, "target vectors")
    if X.shape[1] != Y.shape[1]:
        raise DataError(f"dimension mismatch: {X.shape[1]} != {Y.shape[1]}")
    return cdist(X, Y, metric="euclidean")


def entropy(plan):
    """``-sum P log P`` with ``0 log 0 = 0``."""
    P = plan[plan > 0]
    return float(-(P * np.log(P)).sum())


def marginal_violation(plan, p, q):
    return float(max(np.abs(plan.sum(axis=1) - p).max(), np.abs(plan.sum(axis=0) - q).max()))


def _pruned(p, q, A):
    rows, cols = prune_support(p), prune_support(q)
    if rows.size == p.size and cols.size == q.size:
        return rows, cols, p, q, A
    p2, q2 = p[rows], q[cols]
    return rows, cols, p2 / p2.sum(), q2 / q2.sum(), A[np.ix_(rows, cols)]


def _expand(plan, rows, cols, shape):
    if plan.shape == shape:
        return plan
    full = np.zeros(shape)
    full[np.ix_(rows, cols)] = plan
    return full


def solve_exact(p, q, A):
    """Exact optimal transport by the transportation simplex method."""
    p, q = check_marginals(p, q)
    A = check_cost_matrix(A, (p.size, q.size))
    rows, cols, p2, q2, A2 = _pruned(p, q, A)
    plan, pivots = transportation_simplex(p2, q2, A2)
    plan = _expand(plan, rows, cols, A.shape)
    cost = float((A * plan).sum())
    return TransportResult(
        plan=plan,
        transport_cost=cost,
        entropy=entropy(plan),
        objective=cost,
        iterations=pivots,
        converged=True,
        marginal_violation=marginal_violation(plan, p, q),
    )


def round_to_polytope(plan, p, q):
    """Project a nearly feasible plan onto the couplings of ``p`` and ``q``.

    Rows and columns carrying excess mass are scaled down, then the missing
    mass is added back as a rank-one correction.
    """
    row = plan.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(row > 0, np.minimum(p / row, 1.0), 1.0)
    plan = plan * x[:, None]
    col = plan.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(col > 0, np.minimum(q / col, 1.0), 1.0)
    plan = plan * y[None, :]
    err_r = np.maximum(p - plan.sum(axis=1), 0.0)
    err_c = np.maximum(q - plan.sum(axis=0), 0.0)
    total = err_r.sum()
    if total > 0:
        plan = plan + np.outer(err_r, err_c) / total
    return plan


def _logsumexp(M, axis):
    mx = M.max(axis=axis, keepdims=True)
    return (np.log(np.exp(M - mx).sum(axis=axis, keepdims=True)) + mx).squeeze(axis)


def _sinkhorn_log_stabilized(p, q, A, eps, max_iter, tol, f=None, g=None):
    """Scaling iterations with potentials absorbed in the log domain.

    The plan is ``diag(u) K diag(v)`` with ``K = exp((f + g - A) / eps)``.
    Whenever a scaling leaves ``[1/ABSORB_THRESHOLD, ABSORB_THRESHOLD]`` it
    is folded into ``f, g`` and ``K`` is rebuilt; a scaling that overflows
    or divides by an underflowed kernel row is replaced by an exact
    log-domain update.
    """
    n, m = A.shape
    log_p, log_q = np.log(p), np.log(q)

    def log_update(f, g):
        f = eps * (log_p - _logsumexp((g[None, :] - A) / eps, 1))
        g = eps * (log_q - _logsumexp((f[:, None] - A) / eps, 0))
        return f, g

    def kernel(f, g):
        K = np.exp((f[:, None] + g[None, :] - A) / eps)
        return K, np.ascontiguousarray(K.T)

    f, g = log_update(np.zeros(n) if f is None else f, np.zeros(m) if g is None else g)
    K, KT = kernel(f, g)
    u, v = np.ones(n), np.ones(m)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            u_new = p / (K @ v)
            v_new = q / (KT @ u_new)
            both = np.concatenate((u_new, v_new))
            hi, lo = both.max(), both.min()
        if not (math.isfinite(hi) and lo > 0):
            f, g = log_update(f + eps * np.log(u), g + eps * np.log(v))
            K, KT = kernel(f, g)
            u, v = np.ones(n), np.ones(m)
        else:
            u, v = u_new, v_new
            if hi > ABSORB_THRESHOLD or lo < 1.0 / ABSORB_THRESHOLD:
                f, g = f + eps * np.log(u), g + eps * np.log(v)
                K, KT = kernel(f, g)
                u, v = np.ones(n), np.ones(m)
        # columns are exact after the v-update; only rows can be off
        err = np.abs(u * (K @ v) - p).max()
        if err < tol:
            converged = True
            break
    plan = u[:, None] * K * v[None, :]
    with np.errstate(divide="ignore"):
        f, g = f + eps * np.log(u), g + eps * np.log(v)
    return plan, it, converged, f, g


def _sinkhorn_scaled(p, q, A, eps, max_iter, tol):
    """Warm-started stages at geometrically decreasing epsilon.

    Intermediate stages stop at a loose tolerance; only the final stage at
    the requested ``eps`` uses ``tol``. Iterations are summed over stages.
    """
    stages = []
    e = float(A.max())
    while e * SCALING_FACTOR > eps:
        e *= SCALING_FACTOR
        stages.append(e)
    f = g = None
    total = 0
    for e in stages:
        _, it, _, f, g = _sinkhorn_log_stabilized(p, q, A, e, max_iter, max(tol, SCALING_STAGE_TOL), f, g)
        total += it
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            f = g = None
    plan, it, converged, _, _ = _sinkhorn_log_stabilized(p, q, A, eps, max_iter, tol, f, g)
    return plan, total + it, converged


def _sinkhorn_plain(p, q, A, eps, max_iter, tol):
    with np.errstate(under="ignore"):
        K = np.exp(-A / eps)
    if not np.all(np.isfinite(K)) or np.any(K.sum(axis=1) == 0) or np.any(K.sum(axis=0) == 0):
        raise NumericalError(
            f"kernel exp(-A/epsilon) underflows at epsilon={eps:g}; use the stabilized solver"
        )
    KT = np.ascontiguousarray(K.T)
    u, v = np.ones(A.shape[0]), np.ones(A.shape[1])
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            u = p / (K @ v)
            v = q / (KT @ u)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise NumericalError(
                f"non-finite scaling at iteration {it} with epsilon={eps:g}; use the stabilized solver"
            )
        err = np.abs(u * (K @ v) - p).max()
        if err < tol:
            converged = True
            break
    return u[:, None] * K * v[None, :], it, converged


def solve_sinkhorn(p, q, A, cfg=SinkhornConfig()):
    """Entropy-regularized optimal transport by Sinkhorn-Knopp scaling."""
    p, q = check_marginals(p, q)
    A = check_cost_matrix(A, (p.size, q.size))
    rows, cols, p2, q2, A2 = _pruned(p, q, A)
    if not cfg.stabilized:
        solver = _sinkhorn_plain
    elif cfg.epsilon_scaling:
        solver = _sinkhorn_scaled
    else:
        solver = _sinkhorn_log_stabilized
    plan, iterations, converged = solver(p2, q2, A2, cfg.epsilon, cfg.max_iter, cfg.tolerance)[:3]
    if not np.all(np.isfinite(plan)):
        raise NumericalError(f"Sinkhorn produced a non-finite plan at epsilon={cfg.epsilon:g}")
    if cfg.round_plan:
        plan = round_to_polytope(plan, p2, q2)
    plan = _expand(plan, rows, cols, A.shape)
    cost = float((A * plan).sum())
    h = entropy(plan)
    return TransportResult(
        plan=plan,
        transport_cost=cost,
        entropy=h,
        objective=cost - cfg.epsilon * h,
        iterations=iterations,
        converged=converged,
        marginal_violation=marginal_violation(plan, p, q),
        epsilon=cfg.epsilon,
    )


def transport(dist_s, dist_t, table_s, table_t, policy, cfg=None):
    """Embed two distributions and solve between them.

    ``cfg=None`` selects the exact solver. Returns the result together with
    the surviving source and target distributions.
    """
    X, ds = embed_distribution(dist_s, table_s, policy)
    Y, dt = embed_distribution(dist_t, table_t, policy)
    A = cost_matrix(X, Y)
    if cfg is None:
        res = solve_exact(ds.weights, dt.weights, A)
    else:
        res = solve_sinkhorn(ds.weights, dt.weights, A, cfg)
    return res, ds, dt


def wasserstein_distance(dist_s, dist_t, table_s, table_t, policy):
    res, _, _ = transport(dist_s, dist_t, table_s, table_t, policy)
    return res.transport_cost


def sinkhorn_distance(dist_s, dist_t, table_s, table_t, policy, cfg=SinkhornConfig(), value="transport"):
    """Regularized distance; ``value`` is ``"transport"`` for ``<A, P>`` or
    ``"regularized"`` for ``<A, P> - epsilon * H(P)``."""
    res, _, _ = transport(dist_s, dist_t, table_s, table_t, policy, cfg)
    if value == "transport":
        return res.transport_cost
    if value == "regularized":
        return res.objective
    raise ValueError(f"unknown value {value!r}; expected 'transport' or 'regularized'")


def export_plan(result, src_words, tgt_words, path):
    """Write a plan as CSV: header of target words, one row per source word."""
    plan = result.plan if isinstance(result, TransportResult) else np.asarray(result)
    if plan.shape != (len(src_words), len(tgt_words)):
        raise DataError(f"plan shape {plan.shape} does not match {len(src_words)}x{len(tgt_words)} labels")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([""] + list(tgt_words))
        for word, row in zip(src_words, plan):
            writer.writerow([word] + [repr(float(x)) for x in row])


def read_plan(path):
    """Inverse of :func:`export_plan`: ``(plan, src_words, tgt_words)``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty plan file")
    tgt = rows[0][1:]
    src = [r[0] for r in rows[1:]]
    plan = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=np.float64).reshape(len(src), len(tgt))
    return plan, src, tgt


@dataclass
class PlanSweep:
    """Plans for one document pair over a list of regularization values."""

    src_words: tuple
    tgt_words: tuple
    results: dict = field(default_factory=dict)


def sweep(dist_s, dist_t, table_s, table_t, policy, epsilons, base=SinkhornConfig()):
    out = None
    for eps in epsilons:
        res, ds, dt = transport(dist_s, dist_t, table_s, table_t, policy, replace(base, epsilon=float(eps)))
        if out is None:
            out = PlanSweep(ds.words, dt.words)
        out.results[float(eps)] = res
    return out
