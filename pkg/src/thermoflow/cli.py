"""Command line interface.

Subcommands mirror the library: ``flow`` solves one source-target pair
and writes the edge CSV plus an optional DOT rendering; ``centrality``
sweeps all pairs; ``abacus`` tabulates total time against beta;
``calibrate`` estimates a temperature from an observed flow or total
time; ``correlate`` runs the centrality correlation sweep; ``generate``
writes builtin graphs to JSON; ``crosscheck`` compares the solver
against the independent reference implementations.

Module errors exit with status 1 and a single parsable line
``ERROR <CODE>: message``; configuration errors exit with status 2.
"""

import argparse
import sys

import numpy as np

from . import fileio
from .calibration import (
    CalibrationResult,
    build_abacus,
    calibrate_from_energy,
    calibrate_from_total_time,
)
from .centrality import centrality_correlation, mean_flow_centrality
from .errors import ThermoflowError
from .graphs import (
    Graph,
    grid_graph,
    make_graph_A,
    make_graph_B,
    make_graph_C,
    path_graph,
    random_connected_graph,
    two_cliques_graph,
)
from .oracles import absorbing_chain_visits, dijkstra_cost, electric_current, simulate_killed_walks
from .solver import Flow, ProblemSpec, solve_linear_flow, solve_power_flow

_BUILTIN_ENDPOINTS = {
    "A": (0, 48),   # opposite grid corners
    "B": (0, 7),    # bridge-free node in each clique
    "C": (0, 5),
}


def load_graph(source: str) -> Graph:
    """Resolve a --graph argument: builtin name, pattern, or file path."""
    if source == "A":
        return make_graph_A()
    if source == "B":
        return make_graph_B()
    if source == "C":
        return make_graph_C()
    if source.startswith("grid:"):
        dims = source[5:].split("x")
        if len(dims) not in (1, 2):
            raise ValueError(f"bad grid spec {source!r}; use grid:RxC")
        rows = int(dims[0])
        cols = int(dims[1]) if len(dims) == 2 else rows
        return grid_graph(rows, cols)
    if source.startswith("path:"):
        return path_graph(int(source[5:]))
    if source.startswith("cliques:"):
        return two_cliques_graph(int(source[8:]))
    if source.endswith(".json"):
        return fileio.read_graph_json(source)
    if source.endswith(".csv"):
        return fileio.read_graph_edge_csv(source)
    raise ValueError(
        f"unknown graph source {source!r}; use A, B, C, grid:RxC, path:n, "
        "cliques:k, or a .json/.csv file")


def describe_graph(name: str, g: Graph) -> str:
    lines = [f"graph {name}: n = {g.n}, "
             f"{int(g.support.sum()) // 2} undirected edges"]
    if name == "A":
        lines.append("7x7 grid, row-major node ids; corners 0, 6, 42, 48; "
                     "suggested s=0 t=48")
    elif name == "B":
        lines.append("cliques {0,1,2,3} and {4,5,6,7}; bridges (2,4), (3,5); "
                     "suggested s=0 t=7")
    elif name == "C":
        lines.append("cliques {0..4} and {5..9}; unit path 3-10-11-12-13-8; "
                     "resistance-10 path 4-14-9; suggested s=0 t=5")
    deg = g.degrees()
    lines.append("degree by node: "
                 + " ".join(f"{i}:{deg[i]}" for i in range(g.n)))
    return "\n".join(lines)


def _parse_beta_grid(args) -> np.ndarray:
    if args.betas:
        return np.array([float(v) for v in args.betas.split(",")])
    lo, hi, count = args.beta_grid.split(":")
    return np.geomspace(float(lo), float(hi), int(count))


def _read_observed_flow(path, g: Graph, s: int, t: int) -> Flow:
    X = np.zeros((g.n, g.n))
    with open(path, encoding="utf-8") as fh:
        for row in fh:
            row = row.strip()
            if not row or row.startswith("i,"):
                continue
            parts = row.split(",")
            X[int(parts[0]), int(parts[1])] = float(parts[2])
    return Flow(X=X, s=s, t=t)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoflow",
        description="Temperature-controlled optimal flows between random "
                    "walks and shortest paths.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_graph_arg(p):
        p.add_argument("--graph", required=True,
                       help="A | B | C | grid:RxC | path:n | cliques:k | file")
        p.add_argument("--describe", action="store_true",
                       help="print the node layout of the graph and exit")

    p = sub.add_parser("flow", help="solve one source-target flow")
    add_graph_arg(p)
    p.add_argument("--s", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--output", default="flow.csv")
    p.add_argument("--dot", help="also write a DOT rendering here")
    p.add_argument("--diagnostics", help="also write diagnostics JSON here")
    p.add_argument("--net-dot", action="store_true",
                   help="shade the DOT by net flow instead of simple flow")

    p = sub.add_parser("centrality", help="all-pairs mean flow tables")
    add_graph_arg(p)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--edge-output", default="centrality_edges.csv")
    p.add_argument("--node-output", default="centrality_nodes.csv")

    p = sub.add_parser("abacus", help="total time versus beta curve")
    add_graph_arg(p)
    p.add_argument("--s", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--beta-grid", default="0.001:50:30",
                   help="log grid lo:hi:count")
    p.add_argument("--betas", help="explicit comma-separated beta list")
    p.add_argument("--output", default="abacus.csv")

    p = sub.add_parser("calibrate", help="estimate temperature from data")
    add_graph_arg(p)
    p.add_argument("--s", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--observed-flow", help="flow CSV (i,j,x[,net]) to match "
                                           "by energy")
    p.add_argument("--observed-time", type=float,
                   help="total travel time to invert on the abacus")
    p.add_argument("--beta-grid", default="0.001:50:30")
    p.add_argument("--betas")
    p.add_argument("--output", default="calibration.json")

    p = sub.add_parser("correlate", help="centrality correlation sweep")
    add_graph_arg(p)
    p.add_argument("--beta-grid", default="0.001:50:25")
    p.add_argument("--betas")
    p.add_argument("--output", default="correlation.csv")

    p = sub.add_parser("generate", help="write a builtin graph to JSON")
    add_graph_arg(p)
    p.add_argument("--output", default="graph.json")

    p = sub.add_parser("crosscheck", help="compare solver against oracles")
    add_graph_arg(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--walks", type=int, default=20000)
    return parser


def _require(args, parser, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        parser.error(f"{args.command} requires --" + ", --".join(missing))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        graph_name = args.graph
        g = load_graph(graph_name)
        if getattr(args, "describe", False):
            print(describe_graph(graph_name, g))
            return 0
        return _dispatch(args, parser, g)
    except ThermoflowError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"ERROR Config: {exc}", file=sys.stderr)
        return 2


def _dispatch(args, parser, g: Graph) -> int:
    cmd = args.command
    if cmd == "flow":
        _require(args, parser, "s", "t")
        spec = ProblemSpec(s=args.s, t=args.t, beta=args.beta, p=args.p)
        if args.p == 1.0:
            flow, diag = solve_linear_flow(g, spec)
        else:
            flow, diag, _ = solve_power_flow(g, spec)
        fileio.write_flow_csv(args.output, g, flow)
        if args.dot:
            values = flow.net() if args.net_dot else flow.X
            fileio.write_dot(args.dot, g, values, s=args.s, t=args.t)
        if args.diagnostics:
            fileio.write_diagnostics_json(args.diagnostics, g, flow, diag)
        print(f"wrote {args.output} (total time {flow.total_time!r}, "
              f"F {diag.free_energy!r})")
        return 0

    if cmd == "centrality":
        table = mean_flow_centrality(g, args.beta, args.p)
        fileio.write_centrality_edge_csv(args.edge_output, g, table)
        fileio.write_centrality_node_csv(args.node_output, table)
        print(f"wrote {args.edge_output} and {args.node_output}")
        return 0

    if cmd == "abacus":
        _require(args, parser, "s", "t")
        curve = build_abacus(g, args.s, args.t, _parse_beta_grid(args),
                             graph_id=args.graph)
        fileio.write_abacus_csv(args.output, curve)
        print(f"wrote {args.output}")
        return 0

    if cmd == "calibrate":
        _require(args, parser, "s", "t")
        if (args.observed_flow is None) == (args.observed_time is None):
            parser.error("calibrate needs exactly one of --observed-flow "
                         "or --observed-time")
        if args.observed_flow is not None:
            observed = _read_observed_flow(args.observed_flow, g,
                                           args.s, args.t)
            result = calibrate_from_energy(g, args.s, args.t, observed)
            fileio.write_calibration_json(args.output, result)
        else:
            curve = build_abacus(g, args.s, args.t, _parse_beta_grid(args))
            t_hat = calibrate_from_total_time(curve, args.observed_time)
            result = CalibrationResult(
                T_hat=t_hat, residual=0.0,
                beta_hat=0.0 if t_hat == np.inf else 1.0 / t_hat,
                bracket=(1.0 / curve.betas[-1], np.inf), monotone=True)
            fileio.write_calibration_json(args.output, result)
        print(f"wrote {args.output} (T_hat {result.T_hat!r})")
        return 0

    if cmd == "correlate":
        sweep = centrality_correlation(g, _parse_beta_grid(args))
        fileio.write_correlation_csv(args.output, sweep)
        print(f"wrote {args.output} (sum peaks at beta "
              f"{sweep.argmax_beta()!r})")
        return 0

    if cmd == "generate":
        fileio.write_graph_json(args.output, g)
        print(f"wrote {args.output}")
        return 0

    if cmd == "crosscheck":
        return _crosscheck(g, args.seed, args.walks)
    parser.error(f"unknown command {cmd!r}")
    return 2


def _crosscheck(g: Graph, seed: int, walks: int) -> int:
    """Solver-versus-oracle comparison table; exit 1 on any failure."""
    s, t = 0, g.n - 1
    rows = []

    flow0, diag0 = solve_linear_flow(g, ProblemSpec(s=s, t=t, beta=0.0))
    oracle = absorbing_chain_visits(g, s, t)
    rows.append(("absorbing chain at beta=0",
                 float(np.abs(flow0.X - oracle).max()), 1e-9))

    beta_hi = min(50.0, 600.0 / float(np.max(g.finite_resistances())) / g.n)
    flow_hi, diag_hi = solve_linear_flow(g, ProblemSpec(s=s, t=t, beta=beta_hi))
    rows.append((f"energy vs shortest path at beta={beta_hi:g}",
                 abs(diag_hi.energy - dijkstra_cost(g, s, t)), 1e-3))

    stats = simulate_killed_walks(g, ProblemSpec(s=s, t=t, beta=0.5),
                                  n_walks=walks, seed=seed)
    flow_mc, diag_mc = solve_linear_flow(g, ProblemSpec(s=s, t=t, beta=0.5))
    se = np.where(stats.standard_errors > 0, stats.standard_errors, np.inf)
    rows.append(("killed walks at beta=0.5 (max |diff|/SE)",
                 float((np.abs(stats.edge_counts - flow_mc.X) / se).max()),
                 4.0))

    sym = np.array_equal(g.support, g.support.T) and np.allclose(
        np.where(g.support, g.R, 0.0), np.where(g.support, g.R, 0.0).T)
    if sym:
        flow_e, _, _ = solve_power_flow(
            g, ProblemSpec(s=s, t=t, beta=20.0, p=2.0))
        rows.append(("quadratic cost vs electric current at beta=20",
                     float(np.abs(flow_e.X - electric_current(g, s, t)).max()),
                     0.1))

    failed = False
    for name, value, bound in rows:
        ok = value <= bound
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3e} "
              f"(bound {bound:g})")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
