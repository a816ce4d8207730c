"""Flow-based centrality indices built on the solver.

The mean flow betweenness of an arc is its flow averaged over all
ordered source-target pairs; the mean net flow replaces each per-pair
flow by |x_ij - x_ji|, cancelling back-and-forth motion inside an edge.
Closeness-style indices come from the per-pair total travel times.

The all-pairs sweep factorizes (I - V) once per target and reuses the
factorization for every source, which brings the naive O(n^5) cost down
to O(n^4). Per-target computations are independent; the driver sums them
in ascending target order so tables are reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, ThermoflowError
from .graphs import Graph
from .solver import (
    Flow,
    ProblemSpec,
    _TargetSystem,
    check_underflow_guard,
    solve_linear_flow,
    solve_power_flow,
)


@dataclass(frozen=True)
class NetFlow:
    """Entrywise |x_ij - x_ji| of a flow, with node totals."""

    Nu: np.ndarray
    node_net: np.ndarray


@dataclass(frozen=True)
class CentralityTable:
    """All-pairs averages of flow quantities at one temperature.

    ``mean_flow[i, j]`` averages x_ij over ordered pairs (s, t), s != t;
    ``rel_mean_flow`` is the same table normalized to total mass one.
    ``closeness_out[s]`` / ``closeness_in[t]`` average the total travel
    time over targets / sources respectively.
    """

    mean_flow: np.ndarray
    node_mean_flow: np.ndarray
    rel_mean_flow: np.ndarray
    rel_node_mean_flow: np.ndarray
    mean_net_flow: np.ndarray
    node_mean_net_flow: np.ndarray
    grand_total: float
    closeness_out: np.ndarray
    closeness_in: np.ndarray
    beta: float
    p: float = 1.0


def net_flow(flow: Flow) -> NetFlow:
    """Net flow of a single source-target flow."""
    nu = flow.net()
    return NetFlow(Nu=nu, node_net=nu.sum(axis=1))


def mean_flow_centrality(g: Graph, beta: float, p: float = 1.0) -> CentralityTable:
    """Average simple and net flows over all ordered (s, t) pairs.

    For p = 1 each target costs one factorization shared by its n - 1
    sources. Other exponents fall back to a full fixed-point solve per
    pair, which is substantially slower.

    Raises
    ------
    ThermoflowError
        Solver failures are re-raised annotated with the failing pair.
    """
    check_underflow_guard(g, beta)
    n = g.n
    mean_x = np.zeros((n, n))
    mean_nu = np.zeros((n, n))
    totals = np.zeros((n, n))  # totals[s, t] = x_.. of the (s, t) flow

    for t in range(n):
        if p == 1.0:
            sys_t = _TargetSystem(g, t, beta)
        for s in range(n):
            if s == t:
                continue
            try:
                if p == 1.0:
                    X = sys_t.flow_matrix(s)
                else:
                    flow, _, _ = solve_power_flow(
                        g, ProblemSpec(s=s, t=t, beta=beta, p=p))
                    X = flow.X
            except ThermoflowError as exc:
                raise type(exc)(f"pair (s={s}, t={t}): {exc}") from exc
            mean_x += X
            mean_nu += np.abs(X - X.T)
            totals[s, t] = X.sum()

    norm = n * (n - 1)
    mean_x /= norm
    mean_nu /= norm
    grand = float(mean_x.sum())
    return CentralityTable(
        mean_flow=mean_x,
        node_mean_flow=mean_x.sum(axis=1),
        rel_mean_flow=mean_x / grand,
        rel_node_mean_flow=mean_x.sum(axis=1) / grand,
        mean_net_flow=mean_nu,
        node_mean_net_flow=mean_nu.sum(axis=1),
        grand_total=grand,
        closeness_out=totals.sum(axis=1) / (n - 1),
        closeness_in=totals.sum(axis=0) / (n - 1),
        beta=beta,
        p=p,
    )


def commute_time(g: Graph, s: int, t: int, beta: float) -> float:
    """Total expected transitions s -> t plus t -> s at the given beta.

    At beta = 0 this is the classical commute-time (resistance) distance.
    """
    if s == t:
        raise ValueError("commute time needs distinct nodes")
    a, _ = solve_linear_flow(g, ProblemSpec(s=s, t=t, beta=beta))
    b, _ = solve_linear_flow(g, ProblemSpec(s=t, t=s, beta=beta))
    return a.total_time + b.total_time


@dataclass(frozen=True)
class CorrelationSweep:
    """Per-beta correlations of the net-flow node centrality against its
    values at the grid's extremes. ``degenerate`` flags grid points whose
    centrality vector was constant (correlation undefined, stored NaN)."""

    betas: np.ndarray
    corr_low: np.ndarray
    corr_high: np.ndarray
    total: np.ndarray
    degenerate: np.ndarray

    def argmax_beta(self) -> float:
        """Grid beta maximizing corr_low + corr_high."""
        return float(self.betas[int(np.nanargmax(self.total))])


def centrality_correlation(g: Graph, beta_grid) -> CorrelationSweep:
    """Correlate mean-net-flow node centrality across temperatures.

    For each beta on the (ascending) grid, the Pearson correlation of the
    node vector against the vectors at the smallest and largest grid
    betas; the grid maximum stands in for the zero-temperature limit.
    """
    betas = np.asarray(beta_grid, dtype=float)
    if betas.ndim != 1 or len(betas) < 2:
        raise ValueError("beta_grid must hold at least two values")
    if np.any(np.diff(betas) <= 0):
        raise ValueError("beta_grid must be sorted strictly ascending")

    vectors = [mean_flow_centrality(g, b).node_mean_net_flow for b in betas]
    ref_low, ref_high = vectors[0], vectors[-1]
    k = len(betas)
    corr_low = np.full(k, np.nan)
    corr_high = np.full(k, np.nan)
    degenerate = np.zeros(k, dtype=bool)
    for i, vec in enumerate(vectors):
        try:
            corr_low[i] = _pearson(vec, ref_low)
            corr_high[i] = _pearson(vec, ref_high)
        except DegenerateVariance:
            degenerate[i] = True
    return CorrelationSweep(
        betas=betas,
        corr_low=corr_low,
        corr_high=corr_high,
        total=corr_low + corr_high,
        degenerate=degenerate,
    )


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da = a - a.mean()
    db = b - b.mean()
    na = float(np.sqrt((da * da).sum()))
    nb = float(np.sqrt((db * db).sum()))
    if na == 0.0 or nb == 0.0:
        raise DegenerateVariance("constant centrality vector")
    return float((da * db).sum() / (na * nb))


def trip_duration_sensitivity(
    g: Graph, beta: float, edge: tuple, step: float
) -> float:
    """Central finite difference of the mean total travel time with
    respect to one directed arc resistance.

    ``edge`` is the arc (i, j); ``step`` must stay below r_ij so both
    perturbed graphs remain valid.
    """
    i, j = edge
    if not g.support[i, j]:
        raise ValueError(f"arc ({i}, {j}) is not in the support")
    if step <= 0:
        raise ValueError("step must be > 0")
    if step >= g.R[i, j]:
        raise ValueError(
            f"step {step} >= r[{i}, {j}] = {g.R[i, j]}; perturbed graph "
            "would lose positivity")
    up = mean_flow_centrality(g.with_resistance(i, j, g.R[i, j] + step), beta)
    down = mean_flow_centrality(g.with_resistance(i, j, g.R[i, j] - step), beta)
    return (up.grand_total - down.grand_total) / (2.0 * step)
