"""Temperature-controlled optimal flows on graphs.

Solves for the source-target flow minimizing a free energy that trades
expected travel cost against path entropy, interpolating continuously
between the pure random walk and the minimum-cost (shortest-path or
electric) flow. On top of the solver sit flow-based centrality indices,
commute times, a total-time abacus and temperature calibration.
"""

from .calibration import (
    AbacusCurve,
    CalibrationResult,
    build_abacus,
    calibrate_from_energy,
    calibrate_from_total_time,
)
from .centrality import (
    CentralityTable,
    CorrelationSweep,
    NetFlow,
    centrality_correlation,
    commute_time,
    mean_flow_centrality,
    net_flow,
    trip_duration_sensitivity,
)
from .errors import (
    AllWalksKilled,
    DegenerateVariance,
    Disconnected,
    IncompatibleEndpoints,
    NegativeEntry,
    NoConvergence,
    NonBracketed,
    NotIrreducible,
    NotStochastic,
    NotSymmetric,
    OutsideCurveRange,
    SingularNetwork,
    SupportViolation,
    TargetOutsideRange,
    TargetUnreachableAtBeta,
    ThermoflowError,
    UnderflowGuardTripped,
    ZeroOrNegativeResistanceOnEdge,
)
from .graphs import (
    Graph,
    grid_graph,
    make_graph_A,
    make_graph_B,
    make_graph_C,
    path_graph,
    random_connected_graph,
    simple_symmetric_graph,
    two_cliques_graph,
    validate_graph,
)
from .oracles import (
    KilledWalkStats,
    absorbing_chain_visits,
    dijkstra_cost,
    electric_current,
    simulate_killed_walks,
)
from .solver import (
    FixedPointOptions,
    Flow,
    FunctionalValues,
    ProblemSpec,
    SolverDiagnostics,
    evaluate_functionals,
    mix_flows,
    scale_flow,
    solve_linear_flow,
    solve_power_flow,
    verify_min_free_energy_identity,
)

__version__ = "0.1.0"
