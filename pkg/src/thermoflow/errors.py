"""Exception hierarchy for thermoflow.

Every error raised by the library derives from :class:`ThermoflowError`,
so callers (and the CLI) can catch one base class. The concrete classes
carry no extra state beyond the message; the class name doubles as the
machine-readable error code printed by the command line tool.
"""


class ThermoflowError(Exception):
    """Base class for all thermoflow errors."""


# --- graph validation ---

class NotStochastic(ThermoflowError):
    """A transition-matrix row does not sum to one."""


class NegativeEntry(ThermoflowError):
    """A transition-matrix entry is negative."""


class ZeroOrNegativeResistanceOnEdge(ThermoflowError):
    """A resistance is <= 0 on an arc with positive transition probability."""


class NotIrreducible(ThermoflowError):
    """The support of the transition matrix is not strongly connected."""


class Disconnected(ThermoflowError):
    """An undirected adjacency structure is not connected."""


class NotSymmetric(ThermoflowError):
    """An adjacency matrix expected to be symmetric is not."""


# --- solver ---

class TargetUnreachableAtBeta(ThermoflowError):
    """The linear system is numerically exhausted: the survival probability
    of the source underflowed or (I - V) could not be factorized."""


class UnderflowGuardTripped(ThermoflowError):
    """The requested inverse temperature would push per-arc weights
    exp(-beta * r) outside the double-precision exponent range."""


class NoConvergence(ThermoflowError):
    """The fixed-point iteration exhausted its budget."""


class SupportViolation(ThermoflowError):
    """A flow puts mass on an arc with zero transition probability."""


class IncompatibleEndpoints(ThermoflowError):
    """Two flows with different (source, target, value) cannot be mixed."""


# --- centrality ---

class DegenerateVariance(ThermoflowError):
    """A centrality vector is constant, leaving correlation undefined."""


# --- calibration ---

class TargetOutsideRange(ThermoflowError):
    """The observed energy lies clearly outside the achievable bracket."""


class NonBracketed(ThermoflowError):
    """No temperature in the search bracket reproduces the observed energy."""


class OutsideCurveRange(ThermoflowError):
    """An observed total time lies outside the abacus curve."""


# --- oracles ---

class AllWalksKilled(ThermoflowError):
    """Not a single simulated walk reached the target."""


class SingularNetwork(ThermoflowError):
    """The reduced conductance Laplacian is singular."""
