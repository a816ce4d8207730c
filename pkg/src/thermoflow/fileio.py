"""File formats: graph JSON / edge-list CSV input, CSV/JSON/DOT exports.

All outputs are UTF-8 with LF line endings and shortest round-trip float
formatting, so repeated runs on identical inputs are byte-identical.
"""

import csv
import json

import numpy as np

from .calibration import AbacusCurve, CalibrationResult
from .centrality import CentralityTable, CorrelationSweep
from .graphs import Graph, simple_symmetric_graph, validate_graph
from .solver import Flow, SolverDiagnostics


def _fmt(x) -> str:
    """Shortest representation that round-trips to the same double."""
    return repr(float(x))


def _open_w(path):
    return open(path, "w", encoding="utf-8", newline="\n")


# --- graph input / output ---

def graph_to_json_dict(g: Graph) -> dict:
    edges = []
    for i in range(g.n):
        for j in np.nonzero(g.support[i])[0]:
            edges.append({"from": int(i), "to": int(j),
                          "w": float(g.W[i, j]), "r": float(g.R[i, j])})
    doc = {"n": g.n, "edges": edges}
    if g.node_labels is not None:
        doc["labels"] = list(g.node_labels)
    return doc


def write_graph_json(path, g: Graph) -> None:
    with _open_w(path) as fh:
        json.dump(graph_to_json_dict(g), fh, indent=2)
        fh.write("\n")


def graph_from_json_dict(doc: dict) -> Graph:
    n = int(doc["n"])
    W = np.zeros((n, n))
    R = np.full((n, n), np.inf)
    for e in doc["edges"]:
        i, j = int(e["from"]), int(e["to"])
        W[i, j] = float(e["w"])
        R[i, j] = float(e["r"])
    return validate_graph(W, R, doc.get("labels"))


def read_graph_json(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return graph_from_json_dict(json.load(fh))


def read_graph_edge_csv(path) -> Graph:
    """Undirected edge list ``i,j,r`` building the simple symmetric model
    (uniform transitions; the r column sets per-edge resistances)."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            if row[0].strip().lower() in ("i", "from"):
                continue  # optional header
            i, j = int(row[0]), int(row[1])
            r = float(row[2]) if len(row) > 2 and row[2].strip() else 1.0
            pairs.append((i, j, r))
    if not pairs:
        raise ValueError(f"no edges found in {path}")
    n = max(max(i, j) for i, j, _ in pairs) + 1
    A = np.zeros((n, n))
    R = np.full((n, n), np.inf)
    for i, j, r in pairs:
        A[i, j] = A[j, i] = 1.0
        R[i, j] = R[j, i] = r
    return simple_symmetric_graph(A, resistances=R)


# --- result exports ---

def write_flow_csv(path, g: Graph, flow: Flow) -> None:
    """One row ``i,j,x,net`` per directed arc of the graph support."""
    nu = flow.net()
    with _open_w(path) as fh:
        fh.write("i,j,x,net\n")
        for i in range(g.n):
            for j in np.nonzero(g.support[i])[0]:
                fh.write(f"{i},{j},{_fmt(flow.X[i, j])},{_fmt(nu[i, j])}\n")


def write_diagnostics_json(path, g: Graph, flow: Flow,
                           diag: SolverDiagnostics) -> None:
    z = np.ones(g.n)
    z[diag.kept_nodes] = diag.z  # z_t = 1 by convention
    doc = {
        "z": [float(v) for v in z],
        "lambda": [float(v) for v in diag.lam],
        "U": float(diag.energy),
        "G": float(diag.entropy),
        "F": float(diag.free_energy),
        "total_time": float(flow.total_time),
    }
    with _open_w(path) as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def write_centrality_edge_csv(path, g: Graph, table: CentralityTable) -> None:
    with _open_w(path) as fh:
        fh.write("i,j,mean_flow,rel_mean_flow,mean_net_flow\n")
        for i in range(g.n):
            for j in np.nonzero(g.support[i])[0]:
                fh.write(
                    f"{i},{j},{_fmt(table.mean_flow[i, j])},"
                    f"{_fmt(table.rel_mean_flow[i, j])},"
                    f"{_fmt(table.mean_net_flow[i, j])}\n")


def write_centrality_node_csv(path, table: CentralityTable) -> None:
    with _open_w(path) as fh:
        fh.write("i,mean_flow,rel,mean_net_flow,closeness_out,closeness_in\n")
        for i in range(len(table.node_mean_flow)):
            fh.write(
                f"{i},{_fmt(table.node_mean_flow[i])},"
                f"{_fmt(table.rel_node_mean_flow[i])},"
                f"{_fmt(table.node_mean_net_flow[i])},"
                f"{_fmt(table.closeness_out[i])},"
                f"{_fmt(table.closeness_in[i])}\n")


def write_abacus_csv(path, curve: AbacusCurve) -> None:
    with _open_w(path) as fh:
        fh.write("beta,total_time\n")
        for beta, time in zip(curve.betas, curve.total_times):
            fh.write(f"{_fmt(beta)},{_fmt(time)}\n")


def write_correlation_csv(path, sweep: CorrelationSweep) -> None:
    with _open_w(path) as fh:
        fh.write("beta,corr0,corr_inf,sum\n")
        for k in range(len(sweep.betas)):
            fh.write(f"{_fmt(sweep.betas[k])},{_fmt(sweep.corr_low[k])},"
                     f"{_fmt(sweep.corr_high[k])},{_fmt(sweep.total[k])}\n")


def write_calibration_json(path, result: CalibrationResult) -> None:
    doc = {
        "T_hat": float(result.T_hat),
        "beta_hat": float(result.beta_hat),
        "residual": float(result.residual),
        "bracket": [float(result.bracket[0]), float(result.bracket[1])],
        "monotone": bool(result.monotone),
    }
    if result.pinned is not None:
        doc["pinned"] = result.pinned
    with _open_w(path) as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


GREY_RAMP = tuple(f"gray{90 - 10 * k}" for k in range(10))  # light -> black


def write_dot(path, g: Graph, edge_values: np.ndarray,
              s: int | None = None, t: int | None = None) -> None:
    """Directed graph in DOT syntax, arcs shaded by value.

    Values map linearly onto a 10-step grey ramp normalized by the file's
    maximum; the source renders as a filled black square, the target as a
    white square.
    """
    vmax = float(np.max(edge_values)) if np.max(edge_values) > 0 else 1.0
    lines = ["digraph flow {"]
    for i in range(g.n):
        attrs = []
        if g.node_labels is not None:
            attrs.append(f'label="{g.node_labels[i]}"')
        if i == s:
            attrs.append('shape=square style=filled fillcolor=black '
                         'fontcolor=white')
        elif i == t:
            attrs.append("shape=square")
        lines.append(f"  {i} [{' '.join(attrs)}];" if attrs else f"  {i};")
    for i in range(g.n):
        for j in np.nonzero(g.support[i])[0]:
            v = float(edge_values[i, j])
            step = min(int(10.0 * v / vmax), 9) if v > 0 else 0
            lines.append(
                f'  {i} -> {j} [color="{GREY_RAMP[step]}" '
                f'tooltip="{_fmt(v)}"];')
    lines.append("}")
    with _open_w(path) as fh:
        fh.write("\n".join(lines) + "\n")
