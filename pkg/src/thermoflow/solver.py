"""Free-energy-minimizing source-target flows.

The optimal flow at inverse temperature ``beta`` trades the expected cost
``U(X) = sum r_ij * phi(x_ij)`` against the path entropy ``G(X)``, the
flow-weighted Kullback-Leibler divergence of the flow's transition kernel
from the reference walk ``W``. Minimizing ``F = U + T*G`` interpolates
between the pure random walk (``beta = 0``) and the minimum-cost flow
(``beta`` large).

For the linear cost ``phi(x) = x`` the minimizer comes from one linear
system built on the sub-stochastic kernel ``v_ij = w_ij exp(-beta r_ij)``:
killing the walk with probability ``1 - sum_j v_ij`` per step and
absorbing it at the target. Survival probabilities ``z`` and expected
visit counts then assemble the flow in closed form. For ``phi(x) = x^p``
with ``p != 1`` the same system is iterated to a fixed point, the
exponent being re-linearized at the current flow.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    IncompatibleEndpoints,
    NoConvergence,
    SupportViolation,
    TargetUnreachableAtBeta,
    UnderflowGuardTripped,
)
from .graphs import Graph

# exp(-x) underflows to zero near x = 745; stay clear of the boundary so
# single-arc weights remain representable.
EXP_ARG_LIMIT = 700.0
SURVIVAL_FLOOR = 1e-300
CONSERVATION_TOL = 1e-10


@dataclass(frozen=True)
class ProblemSpec:
    """Source, target, inverse temperature and cost-shape exponent.

    ``beta = 0`` yields the pure random walk; large ``beta`` approaches
    the minimum-cost flow. ``p`` is the exponent of ``phi(x) = x**p``;
    values below 1 make the energy concave (local minima possible) and
    must be enabled explicitly with ``allow_concave_cost``.
    """

    s: int
    t: int
    beta: float
    p: float = 1.0
    allow_concave_cost: bool = False

    def __post_init__(self):
        if self.s == self.t:
            raise ValueError("source and target must be distinct")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")
        if self.p <= 0:
            raise ValueError(f"p must be > 0, got {self.p}")
        if self.p < 1 and not self.allow_concave_cost:
            raise ValueError(
                "p < 1 gives a concave energy with possible local minima; "
                "pass allow_concave_cost=True to proceed anyway")

    @property
    def T(self) -> float:
        """Temperature 1/beta (inf at beta = 0)."""
        return np.inf if self.beta == 0 else 1.0 / self.beta


@dataclass(frozen=True)
class FixedPointOptions:
    """Tuning of the fixed-point iteration for p != 1.

    ``damping`` is the initial relaxation weight of each update; it is
    self-tuned downward whenever the residual grows (the undamped map
    overshoots violently once ``beta`` is large). ``tolerance`` bounds the
    max-norm residual between a candidate flow and its re-solved image.
    """

    damping: float = 0.5
    tolerance: float = 1e-10
    max_iterations: int = 10_000
    concave_clamp: float = 1e-12


@dataclass(frozen=True)
class Flow:
    """Matrix of expected arc transition counts for a unit (or valued)
    source-target flow, absorbed at the target."""

    X: np.ndarray
    s: int
    t: int
    value: float = 1.0

    @property
    def row_sums(self) -> np.ndarray:
        return self.X.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.X.sum(axis=0)

    @property
    def total_time(self) -> float:
        """Expected number of transitions, x_.. ."""
        return float(self.X.sum())

    def net(self) -> np.ndarray:
        """Entrywise |x_ij - x_ji|."""
        return np.abs(self.X - self.X.T)

    def conservation_residual(self) -> float:
        """Max deviation from valued flow conservation."""
        div = self.row_sums - self.col_sums
        div[self.s] -= self.value
        div[self.t] += self.value
        return float(np.abs(div).max())


@dataclass(frozen=True)
class SolverDiagnostics:
    """Internal quantities of a solve, indexed by ``kept_nodes`` (all node
    ids except the target, ascending) unless stated otherwise.

    ``z`` are survival probabilities (reaching the target before being
    killed), extended by convention with z_t = 1. ``lam`` is the full
    n-vector of conservation multipliers in the gauge lam_t = 0, so
    lam_i = T ln z_i at beta > 0. ``rho`` is the one-step killing
    probability, ``q`` the one-step absorption probability, and
    ``m_s_row`` the expected visit counts from the source under the
    killed walk. ``a`` and ``b`` are the auxiliary solution vectors
    (a = m_s_row / z_s, b = z in this gauge).
    """

    kept_nodes: np.ndarray
    V: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    rho: np.ndarray
    q: np.ndarray
    m_s_row: np.ndarray
    free_energy: float
    energy: float
    entropy: float
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class FunctionalValues:
    """Energy U, entropy G, free energy F = U + T*G and per-node KL."""

    U: float
    G: float
    F: float
    per_node_KL: np.ndarray


def check_underflow_guard(g: Graph, beta: float) -> None:
    """Reject beta values whose per-arc weight exp(-beta*r) underflows."""
    r_max = float(np.max(g.finite_resistances()))
    if beta * r_max > EXP_ARG_LIMIT:
        raise UnderflowGuardTripped(
            f"beta * max resistance = {beta * r_max:.3g} exceeds "
            f"{EXP_ARG_LIMIT}; largest safe beta for this graph is "
            f"{EXP_ARG_LIMIT / r_max:.6g}")


class _TargetSystem:
    """LU factorization of (I - V) for one target, reusable across sources.

    ``phi_prime`` is an optional n x n field of marginal costs phi'(x_ij)
    used by the fixed-point solver; omitted, it defaults to the linear
    case phi' = 1.
    """

    def __init__(self, g: Graph, t: int, beta: float, phi_prime=None):
        self.g = g
        self.t = t
        self.beta = beta
        n = g.n
        kept = np.array([i for i in range(n) if i != t])
        self.kept = kept
        exponent = g.finite_resistances()
        if phi_prime is not None:
            exponent = exponent * phi_prime
        with np.errstate(under="ignore"):
            v_full = np.where(g.support, g.W * np.exp(-beta * exponent), 0.0)
        self.v_full = v_full
        self.V = v_full[np.ix_(kept, kept)]
        self.q = v_full[kept, t]
        try:
            self.lu = scipy.linalg.lu_factor(np.eye(n - 1) - self.V)
            self.z = scipy.linalg.lu_solve(self.lu, self.q)
        except scipy.linalg.LinAlgError as exc:
            raise TargetUnreachableAtBeta(
                f"(I - V) is singular for target {t} at beta={beta}") from exc
        if not np.all(np.isfinite(self.z)):
            raise TargetUnreachableAtBeta(
                f"survival probabilities are not finite for target {t} "
                f"at beta={beta}")

    def pos(self, node: int) -> int:
        """Index of a non-target node within the kept ordering."""
        return int(np.searchsorted(self.kept, node))

    def visits_from(self, s: int) -> np.ndarray:
        """Expected visit counts m_s. of the killed walk started at s."""
        e = np.zeros(len(self.kept))
        e[self.pos(s)] = 1.0
        return scipy.linalg.lu_solve(self.lu, e, trans=1)

    def survival(self, s: int) -> float:
        zs = float(self.z[self.pos(s)])
        if not np.isfinite(zs) or zs < SURVIVAL_FLOOR:
            raise TargetUnreachableAtBeta(
                f"survival probability from node {s} is {zs!r} at "
                f"beta={self.beta}; target {self.t} is numerically "
                "unreachable")
        return zs

    def flow_matrix(self, s: int, m: np.ndarray | None = None) -> np.ndarray:
        """Assemble the optimal flow x_ij = m_si v_ij z_j / z_s."""
        zs = self.survival(s)
        if m is None:
            m = self.visits_from(s)
        n = self.g.n
        X = np.zeros((n, n))
        with np.errstate(under="ignore"):
            X[np.ix_(self.kept, self.kept)] = \
                (m[:, None] * self.V) * (self.z / zs)[None, :]
            X[self.kept, self.t] = m * self.q / zs
        return X

    def expected_onestep_costs(self, phi_prime=None) -> np.ndarray:
        """c_i = sum_j w_ij r_ij phi'(x_ij), the mean cost of one step."""
        cost = self.g.finite_resistances()
        if phi_prime is not None:
            cost = cost * phi_prime
        return (self.g.W * cost).sum(axis=1)[self.kept]

    def multipliers(self, phi_prime=None) -> np.ndarray:
        """Full n-vector of multipliers, gauge lam_t = 0.

        At beta > 0, lam_i = T ln z_i. At beta = 0 that expression is
        0 * inf; the continuous limit is minus the expected accumulated
        cost to absorption, obtained from one extra solve on the same
        factorization.
        """
        n = self.g.n
        lam = np.zeros(n)
        if self.beta > 0:
            with np.errstate(divide="ignore"):
                lam[self.kept] = np.log(self.z) / self.beta
        else:
            c = self.expected_onestep_costs(phi_prime)
            d = scipy.linalg.lu_solve(self.lu, c)
            lam[self.kept] = -d
        return lam

    def killing(self) -> np.ndarray:
        """One-step killing probabilities rho_i = 1 - sum_j v_ij - q_i."""
        return 1.0 - self.V.sum(axis=1) - self.q


def evaluate_functionals(g: Graph, spec: ProblemSpec, flow: Flow) -> FunctionalValues:
    """Energy, entropy and free energy of an admissible flow.

    Terms with x_ij = 0 contribute nothing to the entropy (the limit
    x ln x -> 0). At beta = 0 the free energy is the energy alone when
    the flow is entropy-free, and infinite otherwise.

    Raises
    ------
    SupportViolation
        If the flow puts mass outside the support of ``W``.
    """
    X = flow.X
    off = (X > 0) & ~g.support
    if np.any(off):
        i, j = np.argwhere(off)[0]
        raise SupportViolation(
            f"flow has x[{i}, {j}] = {X[i, j]} but w[{i}, {j}] = 0")

    U = float(np.sum(g.finite_resistances() * _phi(X, spec.p)))

    rows = flow.row_sums
    K = np.zeros(g.n)
    visited = rows > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = X / (rows[:, None] * g.W)
        terms = np.where(X > 0, X * np.log(np.where(X > 0, ratio, 1.0)), 0.0)
    row_kl = terms.sum(axis=1)
    K[visited] = row_kl[visited] / rows[visited]
    # KL rows are non-negative; clip roundoff noise only.
    K = np.where((K < 0) & (K > -1e-12), 0.0, K)
    G = float((rows[visited] * K[visited]).sum())

    if spec.beta > 0:
        F = U + spec.T * G
    else:
        F = U if G <= 1e-9 * max(1.0, flow.total_time) else np.inf
    return FunctionalValues(U=U, G=G, F=F, per_node_KL=K)


def _phi(x: np.ndarray, p: float) -> np.ndarray:
    if p == 1.0:
        return np.where(x > 0, x, 0.0)
    return np.where(x > 0, np.power(x, p), 0.0)


def _phi_prime(x: np.ndarray, p: float, clamp: float = 1e-12) -> np.ndarray:
    if p == 1.0:
        return np.ones_like(x)
    if p < 1.0:
        # phi'(0) diverges; clamp tiny arguments so exploration stays finite
        x = np.maximum(x, clamp)
        return p * np.power(x, p - 1.0)
    return p * np.power(np.maximum(x, 0.0), p - 1.0)


def _diagnostics(g, spec, sys_t, flow, m):
    zs = sys_t.survival(spec.s)
    z_ext = np.ones(g.n)
    z_ext[sys_t.kept] = sys_t.z
    phip = None if spec.p == 1.0 else _phi_prime(flow.X, spec.p)
    vals = evaluate_functionals(g, spec, flow)
    return SolverDiagnostics(
        kept_nodes=sys_t.kept,
        V=sys_t.V,
        z=sys_t.z,
        lam=sys_t.multipliers(phip),
        rho=sys_t.killing(),
        q=sys_t.q,
        m_s_row=m,
        free_energy=vals.F,
        energy=vals.U,
        entropy=vals.G,
        a=m / zs,
        b=sys_t.z.copy(),
    ), vals


def solve_linear_flow(g: Graph, spec: ProblemSpec) -> tuple[Flow, SolverDiagnostics]:
    """Optimal flow for the linear cost phi(x) = x, in one linear solve.

    Parameters
    ----------
    g : Graph
    spec : ProblemSpec
        Must have ``p = 1``; ``beta`` must pass the underflow guard.

    Returns
    -------
    (Flow, SolverDiagnostics)
        A unit flow satisfying positivity, conservation and absorption,
        plus survival probabilities, multipliers and functional values.

    Raises
    ------
    UnderflowGuardTripped, TargetUnreachableAtBeta
    """
    if spec.p != 1.0:
        raise ValueError("solve_linear_flow requires p = 1; "
                         "use solve_power_flow for other exponents")
    _check_nodes(g, spec)
    check_underflow_guard(g, spec.beta)
    sys_t = _TargetSystem(g, spec.t, spec.beta)
    m = sys_t.visits_from(spec.s)
    flow = Flow(X=sys_t.flow_matrix(spec.s, m), s=spec.s, t=spec.t)
    diag, _ = _diagnostics(g, spec, sys_t, flow, m)
    return flow, diag


def solve_power_flow(
    g: Graph,
    spec: ProblemSpec,
    opts: FixedPointOptions | None = None,
) -> tuple[Flow, SolverDiagnostics, int]:
    """Optimal flow for phi(x) = x**p by damped fixed-point iteration.

    The recursion re-linearizes the arc weights at the current flow and
    re-solves the linear system. Each accepted candidate is the image of
    the previous one mixed with weight ``damping``; the weight shrinks
    automatically whenever the residual grows, which tames the violent
    overshoot of the undamped map at large ``beta``. For ``beta > 1`` the
    iteration ascends a geometric ladder of intermediate temperatures,
    warm-starting each rung, which keeps the iteration count well below
    the budget even deep in the low-temperature regime.

    Returns
    -------
    (Flow, SolverDiagnostics, iterations)
        ``iterations`` counts linear solves across all rungs. The
        returned flow reproduces itself under one more re-solve within
        ``opts.tolerance`` in max-norm.

    Raises
    ------
    NoConvergence, UnderflowGuardTripped, TargetUnreachableAtBeta
    """
    opts = opts or FixedPointOptions()
    _check_nodes(g, spec)
    check_underflow_guard(g, spec.beta)

    # random-walk start: at beta = 0 the weights are X-independent
    sys_rw = _TargetSystem(g, spec.t, 0.0)
    X = sys_rw.flow_matrix(spec.s)
    total = 0

    for beta_k in _beta_ladder(spec.beta):
        X, sys_t, m, used = _fixed_point_at_beta(
            g, spec, beta_k, X, opts, opts.max_iterations - total)
        total += used
        if used < 0 or total > opts.max_iterations:
            raise NoConvergence(
                f"fixed point not reached within {opts.max_iterations} "
                f"iterations (stalled at beta={beta_k})")

    flow = Flow(X=X, s=spec.s, t=spec.t)
    diag, _ = _diagnostics(g, spec, sys_t, flow, m)
    return flow, diag, total


def _beta_ladder(beta: float, factor: float = 4.0) -> list:
    if beta <= 1.0:
        return [beta]
    ladder = []
    b = 1.0
    while b < beta:
        ladder.append(b)
        b *= factor
    ladder.append(beta)
    return ladder


def _fixed_point_at_beta(g, spec, beta, X, opts, budget):
    eta = opts.damping
    prev_res = np.inf
    sys_t = None
    m = None
    for it in range(1, max(budget, 1) + 1):
        phip = _phi_prime(X, spec.p, opts.concave_clamp)
        sys_t = _TargetSystem(g, spec.t, beta, phi_prime=phip)
        m = sys_t.visits_from(spec.s)
        X_img = sys_t.flow_matrix(spec.s, m)
        res = float(np.abs(X_img - X).max())
        if res < opts.tolerance:
            return X_img, sys_t, m, it
        if res > prev_res:
            eta = max(0.5 * eta, 1e-3)
        elif res < 0.5 * prev_res:
            eta = min(1.2 * eta, 0.9)
        prev_res = res
        X = (1.0 - eta) * X + eta * X_img
    return X, sys_t, m, -1


def verify_min_free_energy_identity(
    g: Graph, spec: ProblemSpec, flow: Flow, diag: SolverDiagnostics
) -> float:
    """Residual of the minimum-free-energy identity.

    For a converged solve the minimized objective equals
    ``sum r_ij [phi(x_ij) - phi'(x_ij) x_ij] + lam_t - lam_s``; with the
    linear cost the sum vanishes and the identity reduces to
    ``F = lam_t - lam_s``. Returns the absolute difference, evaluating F
    from the flow itself (not from the diagnostics shortcut).
    """
    vals = evaluate_functionals(g, spec, flow)
    X = flow.X
    correction = float(np.sum(
        g.finite_resistances()
        * (_phi(X, spec.p) - _phi_prime(X, spec.p) * X)))
    rhs = correction + diag.lam[spec.t] - diag.lam[spec.s]
    return abs(vals.F - rhs)


def scale_flow(flow: Flow, v: float) -> Flow:
    """Scale a flow to value ``v`` times its current value.

    Entropy and (for p = 1) free energy scale linearly with the value.
    """
    if v < 0:
        raise ValueError(f"flow value must be >= 0, got {v}")
    return Flow(X=flow.X * v, s=flow.s, t=flow.t, value=flow.value * v)


def mix_flows(x: Flow, y: Flow, alpha: float) -> Flow:
    """Convex mixture alpha*X + (1-alpha)*Y of two admissible flows.

    Both flows must share source, target and value; the mixture is then
    admissible for the same endpoints (the constraint set is convex).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if (x.s, x.t) != (y.s, y.t) or abs(x.value - y.value) > 1e-12:
        raise IncompatibleEndpoints(
            f"cannot mix flow ({x.s}->{x.t}, v={x.value}) with "
            f"({y.s}->{y.t}, v={y.value})")
    return Flow(X=alpha * x.X + (1.0 - alpha) * y.X,
                s=x.s, t=x.t, value=x.value)


def _check_nodes(g: Graph, spec: ProblemSpec) -> None:
    for name, node in (("source", spec.s), ("target", spec.t)):
        if not 0 <= node < g.n:
            raise ValueError(f"{name} {node} out of range for n={g.n}")
