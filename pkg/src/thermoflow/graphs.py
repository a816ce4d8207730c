"""Graph representation, validation and generators.

A :class:`Graph` couples a row-stochastic transition matrix ``W`` (the
reference random walk) with a positive resistance matrix ``R`` (the cost
of each directed arc). Resistances are only meaningful on the support of
``W``; off-support entries are stored as ``inf`` and never read by any
computation.

The generators build the binary "simple symmetric" model: uniform
transitions and unit resistances on the edges of an undirected graph,
optionally with selected edges made more resistive.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Disconnected,
    NegativeEntry,
    NotIrreducible,
    NotStochastic,
    NotSymmetric,
    ZeroOrNegativeResistanceOnEdge,
)

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Graph:
    """Validated weighted graph.

    Attributes
    ----------
    n : int
        Number of nodes.
    W : ndarray, shape (n, n)
        Row-stochastic transition matrix; its support must be strongly
        connected.
    R : ndarray, shape (n, n)
        Resistance of each directed arc, > 0 on the support of ``W`` and
        ``inf`` elsewhere.
    node_labels : list of str, optional
        Display names, one per node.

    Instances are immutable and safe to share across workers. Build them
    through :func:`validate_graph` or a generator rather than directly.
    """

    n: int
    W: np.ndarray
    R: np.ndarray
    node_labels: list | None = field(default=None)

    @property
    def support(self) -> np.ndarray:
        """Boolean matrix of arcs with positive transition probability."""
        return self.W > 0.0

    def degrees(self) -> np.ndarray:
        """Out-degree of each node counted on the support."""
        return self.support.sum(axis=1)

    def finite_resistances(self) -> np.ndarray:
        """Resistances on the support, zero elsewhere (for masked sums)."""
        return np.where(self.support, self.R, 0.0)

    def with_resistance(self, i: int, j: int, r: float) -> "Graph":
        """Copy of the graph with the resistance of arc (i, j) replaced."""
        if not self.support[i, j]:
            raise ValueError(f"arc ({i}, {j}) is not in the support")
        if r <= 0:
            raise ZeroOrNegativeResistanceOnEdge(
                f"replacement resistance {r} on arc ({i}, {j}) must be > 0")
        R = self.R.copy()
        R[i, j] = r
        return Graph(self.n, self.W, R, self.node_labels)


def _reachable(support: np.ndarray, start: int) -> np.ndarray:
    n = support.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        u = stack.pop()
        for v in np.nonzero(support[u])[0]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return seen


def validate_graph(W, R, node_labels=None) -> Graph:
    """Check (W, R) and return an immutable :class:`Graph`.

    Parameters
    ----------
    W : array_like, shape (n, n)
        Candidate transition matrix. Every row must sum to 1 within
        1e-12 and all entries must be non-negative.
    R : array_like, shape (n, n)
        Candidate resistances; entries must be > 0 wherever ``W`` is
        positive. Entries off the support are ignored and stored as inf.
    node_labels : list of str, optional

    Raises
    ------
    NotStochastic, NegativeEntry, ZeroOrNegativeResistanceOnEdge,
    NotIrreducible
        When the corresponding invariant fails.
    ValueError
        On shape mismatch or n < 2.
    """
    W = np.array(W, dtype=float)
    R = np.array(R, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"W must be square, got shape {W.shape}")
    if R.shape != W.shape:
        raise ValueError(f"W and R shapes differ: {W.shape} vs {R.shape}")
    n = W.shape[0]
    if n < 2:
        raise ValueError("a graph needs at least two nodes")

    if np.any(W < 0.0):
        i, j = np.argwhere(W < 0.0)[0]
        raise NegativeEntry(f"W[{i}, {j}] = {W[i, j]} is negative")
    row_sums = W.sum(axis=1)
    bad = np.abs(row_sums - 1.0) > ROW_SUM_TOL
    if np.any(bad):
        i = int(np.nonzero(bad)[0][0])
        raise NotStochastic(f"row {i} of W sums to {row_sums[i]!r}, not 1")

    support = W > 0.0
    bad_r = support & ~(R > 0.0)
    if np.any(bad_r):
        i, j = np.argwhere(bad_r)[0]
        raise ZeroOrNegativeResistanceOnEdge(
            f"R[{i}, {j}] = {R[i, j]} on arc with W[{i}, {j}] = {W[i, j]}")

    if not _reachable(support, 0).all() or not _reachable(support.T, 0).all():
        raise NotIrreducible("support of W is not strongly connected")

    R = np.where(support, R, np.inf)
    labels = list(node_labels) if node_labels is not None else None
    return Graph(n=n, W=W, R=R, node_labels=labels)


def simple_symmetric_graph(adjacency, resistances=None, node_labels=None) -> Graph:
    """Uniform transitions and unit resistances on an undirected graph.

    Parameters
    ----------
    adjacency : array_like, shape (n, n)
        Symmetric 0/1 matrix with zero diagonal; must be connected.
    resistances : array_like, optional
        Symmetric per-edge resistances overriding the default of 1.

    Returns
    -------
    Graph
        w_ij = a_ij / degree(i), r_ij = 1 (or the override) on edges.
    """
    A = np.array(adjacency, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise NotSymmetric("adjacency matrix is not symmetric")
    if np.any(np.diag(A) != 0):
        raise ValueError("adjacency diagonal must be zero (no self-loops)")
    if not np.isin(A, (0.0, 1.0)).all():
        raise ValueError("adjacency entries must be 0 or 1")
    if not _reachable(A > 0, 0).all():
        raise Disconnected("adjacency graph is not connected")

    deg = A.sum(axis=1)
    if np.any(deg == 0):
        raise Disconnected("isolated node in adjacency graph")
    W = A / deg[:, None]
    if resistances is None:
        R = np.where(A > 0, 1.0, np.inf)
    else:
        R = np.array(resistances, dtype=float)
    return validate_graph(W, R, node_labels)


def grid_graph(rows: int, cols: int | None = None) -> Graph:
    """Simple random walk on a rows x cols grid with 4-neighbour edges."""
    if cols is None:
        cols = rows
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("grid needs at least two nodes")
    n = rows * cols
    A = np.zeros((n, n))
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                A[i, i + 1] = A[i + 1, i] = 1.0
            if r + 1 < rows:
                A[i, i + cols] = A[i + cols, i] = 1.0
    return simple_symmetric_graph(A)


def path_graph(n: int) -> Graph:
    """Simple random walk on the path 0 - 1 - ... - (n-1)."""
    if n < 2:
        raise ValueError("path needs at least two nodes")
    A = np.zeros((n, n))
    for i in range(n - 1):
        A[i, i + 1] = A[i + 1, i] = 1.0
    return simple_symmetric_graph(A)


def two_cliques_graph(k: int) -> Graph:
    """Two K_k cliques joined by two edges (the graph-B pattern).

    Nodes 0..k-1 form the first clique, k..2k-1 the second. The bridge
    edges are (k-2, k) and (k-1, k+1), leaving nodes 0 and 2k-1 free of
    bridge attachments on either side.
    """
    if k < 3:
        raise ValueError("cliques need k >= 3")
    n = 2 * k
    A = np.zeros((n, n))
    for base in (0, k):
        for i in range(base, base + k):
            for j in range(base, base + k):
                if i != j:
                    A[i, j] = 1.0
    A[k - 2, k] = A[k, k - 2] = 1.0
    A[k - 1, k + 1] = A[k + 1, k - 1] = 1.0
    return simple_symmetric_graph(A)


def make_graph_A(m: int = 7) -> Graph:
    """m x m square grid with uniform transitions and unit resistances.

    The natural source/target pair for demonstrations is the corner pair
    (0, m*m - 1).
    """
    return grid_graph(m, m)


def make_graph_B() -> Graph:
    """Two K4 cliques joined by two unit edges.

    Cliques {0,1,2,3} and {4,5,6,7}; bridge edges (2,4) and (3,5). Nodes
    0 and 7 are bridge-free, one per clique.
    """
    return two_cliques_graph(4)


# Graph C layout: clique vertices 3 and 4 anchor the two inter-clique
# paths, 8 and 9 receive them; 0 and 5 stay bridge-free.
_C_UNIT_PATH = (3, 10, 11, 12, 13, 8)
_C_HEAVY_PATH = (4, 14, 9)
_C_HEAVY_RESISTANCE = 10.0


def make_graph_C() -> Graph:
    """Two K5 cliques joined by two paths of very different cost.

    Cliques {0..4} and {5..9}. A five-edge unit-resistance path
    3-10-11-12-13-8 and a two-edge path 4-14-9 whose edges carry
    resistance 10. All transitions are uniform.
    """
    n = 15
    A = np.zeros((n, n))
    for base in (0, 5):
        for i in range(base, base + 5):
            for j in range(base, base + 5):
                if i != j:
                    A[i, j] = 1.0
    for path in (_C_UNIT_PATH, _C_HEAVY_PATH):
        for a, b in zip(path[:-1], path[1:]):
            A[a, b] = A[b, a] = 1.0
    R = np.where(A > 0, 1.0, np.inf)
    for a, b in zip(_C_HEAVY_PATH[:-1], _C_HEAVY_PATH[1:]):
        R[a, b] = R[b, a] = _C_HEAVY_RESISTANCE
    return simple_symmetric_graph(A, resistances=R)


def random_connected_graph(n: int, edge_prob: float = 0.3, seed: int = 0) -> Graph:
    """Erdos-Renyi simple symmetric graph, resampled until connected.

    Deterministic for a given (n, edge_prob, seed).
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    for _ in range(10_000):
        A = (rng.random((n, n)) < edge_prob).astype(float)
        A = np.triu(A, 1)
        A = A + A.T
        if A.sum() > 0 and _reachable(A > 0, 0).all():
            return simple_symmetric_graph(A)
    raise Disconnected(
        f"no connected sample in 10000 draws (n={n}, p={edge_prob})")
