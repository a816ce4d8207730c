"""Temperature estimation from observed path data.

Two calibration routes are provided. The energy route solves the moment
condition U(observed) = U(X(T)) for T by bisection, after verifying
numerically that the energy of the optimal flow is monotone over the
search bracket (it rises with temperature as the walk wanders more).
The abacus route interpolates an observed total travel time on a
precomputed x_..(beta) curve.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    NonBracketed,
    OutsideCurveRange,
    TargetOutsideRange,
    ThermoflowError,
)
from .graphs import Graph
from .solver import Flow, ProblemSpec, evaluate_functionals, solve_linear_flow

# Observed energies may sit a hair outside the evaluable bracket when the
# data comes from a limiting regime (exact shortest path, pure random
# walk). Values within this fraction of the bracket's energy range are
# pinned to the nearest end instead of rejected.
PIN_SLACK_FRACTION = 0.01


@dataclass(frozen=True)
class AbacusCurve:
    """Total travel time x_..(beta) on a sorted beta grid."""

    betas: np.ndarray
    total_times: np.ndarray
    s: int
    t: int
    graph_id: str | None = None


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of an energy calibration.

    ``pinned`` is None for an interior solution, or "lower"/"upper" when
    the observed energy sat at (or just beyond) a bracket end.
    ``crossings`` lists every matching temperature when the energy curve
    failed the monotonicity check and a grid search was used instead.
    """

    T_hat: float
    residual: float
    beta_hat: float
    bracket: tuple
    monotone: bool
    pinned: str | None = None
    crossings: tuple = field(default=())


def build_abacus(g: Graph, s: int, t: int, beta_grid, graph_id=None) -> AbacusCurve:
    """Tabulate the expected total travel time over a beta grid."""
    betas = np.asarray(beta_grid, dtype=float)
    if betas.ndim != 1 or len(betas) < 1:
        raise ValueError("beta_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(betas) <= 0):
        raise ValueError("beta_grid must be sorted strictly ascending")
    times = np.empty(len(betas))
    for k, beta in enumerate(betas):
        flow, _ = solve_linear_flow(g, ProblemSpec(s=s, t=t, beta=beta))
        times[k] = flow.total_time
    return AbacusCurve(betas=betas, total_times=times, s=s, t=t,
                       graph_id=graph_id)


def _energy_at_T(g: Graph, s: int, t: int, T: float) -> float:
    spec = ProblemSpec(s=s, t=t, beta=1.0 / T)
    flow, _ = solve_linear_flow(g, spec)
    return evaluate_functionals(g, spec, flow).U


def _feasible_lower_T(g, s, t, lo, hi):
    """Smallest bracket temperature the solver can actually evaluate.

    Very small T means huge beta; below some graph-dependent temperature
    the survival probability underflows double precision and the solver
    refuses. Probe upward by decades until a solve succeeds.
    """
    T = lo
    while T < hi:
        try:
            _energy_at_T(g, s, t, T)
            return T
        except ThermoflowError:
            T *= 10.0
    raise NonBracketed(
        f"no evaluable temperature in [{lo}, {hi}] for pair ({s}, {t})")


def calibrate_from_energy(
    g: Graph, s: int, t: int, observed: Flow, bracket=(1e-6, 1e3)
) -> CalibrationResult:
    """Estimate the temperature at which the optimal flow matches the
    observed flow's energy.

    Parameters
    ----------
    observed : Flow
        Admissible s-t flow on the graph's support (aggregated counts).
    bracket : (float, float)
        Temperature search interval. Its lower end is raised
        automatically to the smallest temperature the solver can
        evaluate on this instance.

    Returns
    -------
    CalibrationResult
        With ``T_hat`` solving U(X(T_hat)) = U(observed) and the
        achieved residual. Observed energies at (or marginally beyond)
        the bracket ends return the end temperature with ``pinned`` set.

    Raises
    ------
    TargetOutsideRange
        If the observed energy lies clearly outside the achievable range
        (beyond the pin slack).
    NonBracketed
        If the energy curve is non-monotone and no grid point brackets
        the observed value.
    """
    if (observed.s, observed.t) != (s, t):
        raise ValueError(
            f"observed flow has endpoints ({observed.s}, {observed.t}), "
            f"expected ({s}, {t})")
    u_obs = evaluate_functionals(
        g, ProblemSpec(s=s, t=t, beta=1.0), observed).U
    resid = observed.conservation_residual()
    if resid > 1e-8 * max(1.0, observed.value):
        raise ValueError(
            f"observed flow violates conservation by {resid:.3g}")

    t_lo = _feasible_lower_T(g, s, t, bracket[0], bracket[1])
    t_hi = float(bracket[1])
    grid_T = np.geomspace(t_lo, t_hi, 33)
    grid_U = np.array([_energy_at_T(g, s, t, T) for T in grid_T])

    monotone = bool(np.all(np.diff(grid_U) >= -1e-10 * max(1.0, grid_U.max())))
    u_lo, u_hi = float(grid_U.min()), float(grid_U.max())
    slack = PIN_SLACK_FRACTION * max(u_hi - u_lo, 1e-30)

    def result(T_hat, pinned=None, crossings=()):
        return CalibrationResult(
            T_hat=T_hat,
            residual=abs(_energy_at_T(g, s, t, T_hat) - u_obs),
            beta_hat=1.0 / T_hat,
            bracket=(t_lo, t_hi),
            monotone=monotone,
            pinned=pinned,
            crossings=tuple(crossings),
        )

    if u_obs < grid_U[0] - slack or u_obs > grid_U[-1] + slack:
        raise TargetOutsideRange(
            f"observed energy {u_obs!r} outside achievable bracket "
            f"[{grid_U[0]!r}, {grid_U[-1]!r}] for T in [{t_lo!r}, {t_hi!r}]")
    if u_obs <= grid_U[0]:
        return result(t_lo, pinned="lower")
    if u_obs >= grid_U[-1]:
        return result(t_hi, pinned="upper")

    def f(log_T):
        return _energy_at_T(g, s, t, float(np.exp(log_T))) - u_obs

    if monotone:
        k = int(np.searchsorted(grid_U, u_obs, side="right")) - 1
        k = min(max(k, 0), len(grid_T) - 2)
        log_T = brentq(f, np.log(grid_T[k]), np.log(grid_T[k + 1]),
                       xtol=1e-12)
        return result(float(np.exp(log_T)))

    # non-monotone energy curve: dense grid search, refine every crossing
    dense_T = np.geomspace(t_lo, t_hi, 257)
    dense_U = np.array([_energy_at_T(g, s, t, T) for T in dense_T])
    sign = np.sign(dense_U - u_obs)
    crossings = []
    for k in np.nonzero(sign[:-1] * sign[1:] <= 0)[0]:
        log_T = brentq(f, np.log(dense_T[k]), np.log(dense_T[k + 1]),
                       xtol=1e-12)
        crossings.append(float(np.exp(log_T)))
    if not crossings:
        raise NonBracketed(
            f"non-monotone energy curve never crosses {u_obs!r}")
    best = min(crossings, key=lambda T: abs(_energy_at_T(g, s, t, T) - u_obs))
    return result(best, crossings=crossings)


def calibrate_from_total_time(curve: AbacusCurve, observed_time: float) -> float:
    """Invert an abacus curve at an observed total travel time.

    Interpolation is piecewise linear in ln(beta); a leading beta = 0
    grid point is handled linearly in beta on its segment. Returns the
    estimated temperature 1/beta_hat.

    Raises
    ------
    OutsideCurveRange
        If the observed time is not covered by the curve.
    """
    times = curve.total_times
    betas = curve.betas
    lo, hi = float(times.min()), float(times.max())
    if not lo <= observed_time <= hi:
        raise OutsideCurveRange(
            f"observed time {observed_time!r} outside curve range "
            f"[{lo!r}, {hi!r}]")

    exact = np.nonzero(times == observed_time)[0]
    if len(exact):
        beta_hat = float(betas[exact[0]])
        return np.inf if beta_hat == 0.0 else 1.0 / beta_hat

    # total times are non-increasing in beta; scan for the bracketing segment
    for k in range(len(betas) - 1):
        a, b = times[k], times[k + 1]
        if (a >= observed_time >= b) or (a <= observed_time <= b):
            if a == b:
                beta_hat = betas[k]
            elif betas[k] == 0.0:
                frac = (observed_time - a) / (b - a)
                beta_hat = betas[k] + frac * (betas[k + 1] - betas[k])
            else:
                frac = (observed_time - a) / (b - a)
                log_beta = np.log(betas[k]) + frac * (
                    np.log(betas[k + 1]) - np.log(betas[k]))
                beta_hat = float(np.exp(log_beta))
            return np.inf if beta_hat == 0.0 else 1.0 / float(beta_hat)
    # exact match on the last grid point falls through the segment scan
    beta_hat = float(betas[-1])
    return 1.0 / beta_hat
