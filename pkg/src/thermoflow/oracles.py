"""Independent reference implementations used to cross-check the solver.

Nothing here shares code with :mod:`thermoflow.solver`: the absorbing
chain is inverted directly, shortest paths come from a textbook Dijkstra
on a heap, electric currents from the node-potential Laplacian system,
and the killed-walk statistics from literal step-by-step simulation of
the extended chain (move with probability v_ij, absorb at the target
with probability q_i, die otherwise).
"""

import heapq
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import AllWalksKilled, SingularNetwork, TargetUnreachableAtBeta
from .graphs import Graph
from .solver import ProblemSpec, check_underflow_guard


@dataclass(frozen=True)
class KilledWalkStats:
    """Monte Carlo estimates from walks killed at rate 1 - sum_j v_ij.

    ``edge_counts`` are mean transition counts over the surviving walks
    (those absorbed at the target), matching the solver's normalization,
    which also describes only mass that reaches the target.
    """

    edge_counts: np.ndarray
    survival_rate: float
    n_walks: int
    standard_errors: np.ndarray


def absorbing_chain_visits(g: Graph, s: int, t: int) -> np.ndarray:
    """Expected arc transition counts of the W-walk from s absorbed at t.

    Uses the fundamental matrix N = (I - Q)^(-1) of the chain with t made
    absorbing: the expected number of visits to i is N[s, i], and each
    visit spends w_ij transitions on arc (i, j) in expectation.
    """
    n = g.n
    kept = [i for i in range(n) if i != t]
    Q = g.W[np.ix_(kept, kept)]
    try:
        N = np.linalg.inv(np.eye(n - 1) - Q)
    except np.linalg.LinAlgError as exc:
        raise TargetUnreachableAtBeta(
            f"absorbing chain for target {t} is singular") from exc
    visits = np.zeros(n)
    visits[kept] = N[kept.index(s), :]
    X = visits[:, None] * g.W
    X[t, :] = 0.0
    return X


def dijkstra_cost(g: Graph, s: int, t: int) -> float:
    """Minimal total resistance over directed s-t paths."""
    dist = np.full(g.n, np.inf)
    dist[s] = 0.0
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == t:
            return d
        if d > dist[u]:
            continue
        for v in np.nonzero(g.support[u])[0]:
            nd = d + g.R[u, v]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, int(v)))
    return float(dist[t])


def electric_current(g: Graph, s: int, t: int) -> np.ndarray:
    """One-directional arc currents for a unit current injected at s and
    extracted at t, with conductance 1/r_ij per edge.

    Requires the resistances to be symmetric on the support. Currents
    follow the potential drop: x_ij = (phi_i - phi_j)/r_ij where
    positive, zero otherwise.
    """
    sup = g.support
    if not np.array_equal(sup, sup.T):
        raise ValueError("electric_current requires a symmetric support")
    asym = np.abs(np.where(sup, g.R, 0.0) - np.where(sup, g.R, 0.0).T)
    if asym.max() > 1e-12:
        raise ValueError("electric_current requires symmetric resistances")

    C = np.where(sup, 1.0 / np.where(sup, g.R, 1.0), 0.0)
    L = np.diag(C.sum(axis=1)) - C
    kept = [i for i in range(g.n) if i != t]
    b = np.zeros(g.n)
    b[s] = 1.0
    b[t] = -1.0
    phi = np.zeros(g.n)
    try:
        phi[kept] = np.linalg.solve(L[np.ix_(kept, kept)], b[kept])
    except np.linalg.LinAlgError as exc:
        raise SingularNetwork("reduced Laplacian is singular") from exc
    if not np.all(np.isfinite(phi)):
        raise SingularNetwork("reduced Laplacian is numerically singular")
    drop = phi[:, None] - phi[None, :]
    return np.where(sup & (drop > 0), drop * C, 0.0)


def simulate_killed_walks(
    g: Graph, spec: ProblemSpec, n_walks: int, seed: int
) -> KilledWalkStats:
    """Simulate the extended killed chain and average surviving walks.

    Each walk draws from its own random stream derived from
    ``(seed, walk_index)``, so results do not depend on evaluation order.
    Only the linear cost is supported: for p != 1 the one-step weights
    would depend on the unknown flow itself.
    """
    if n_walks < 1:
        raise ValueError("need n_walks >= 1")
    if spec.p != 1.0:
        raise ValueError("killed-walk simulation is defined for p = 1 only")
    check_underflow_guard(g, spec.beta)
    n, t = g.n, spec.t
    with np.errstate(under="ignore"):
        v = np.where(g.support, g.W * np.exp(-spec.beta * g.finite_resistances()), 0.0)
    v[t, :] = 0.0
    # outcome k < n: move to node k (k == t absorbs); k == n: killed
    cum_rows = [np.cumsum(np.append(v[i], 1.0 - v[i].sum())).tolist()
                for i in range(n)]

    total = np.zeros((n, n))
    total_sq = np.zeros((n, n))
    n_survived = 0
    for k in range(n_walks):
        rng = np.random.default_rng((seed, k))
        counts = np.zeros((n, n))
        node = spec.s
        alive = True
        block: list = []
        while True:
            if not block:
                block = rng.random(64).tolist()
            u = block.pop()
            nxt = bisect_right(cum_rows[node], u)
            if nxt >= n:
                alive = False
                break
            counts[node, nxt] += 1.0
            if nxt == t:
                break
            node = nxt
        if alive:
            n_survived += 1
            total += counts
            total_sq += counts * counts
    if n_survived == 0:
        raise AllWalksKilled(
            f"none of {n_walks} walks reached node {t} at beta={spec.beta}")
    mean = total / n_survived
    var = np.maximum(total_sq / n_survived - mean * mean, 0.0)
    return KilledWalkStats(
        edge_counts=mean,
        survival_rate=n_survived / n_walks,
        n_walks=n_walks,
        standard_errors=np.sqrt(var / n_survived),
    )
