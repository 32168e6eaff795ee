"""Exception hierarchy shared across the engine."""


class CircuitQError(Exception):
    """Base class for all errors raised by this package."""


class NetlistSyntaxError(CircuitQError):
    """Malformed netlist text.  Carries 1-based line and column."""

    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CircuitTopologyError(CircuitQError):
    """Structurally invalid circuit (shorts, opens, disconnected graphs)."""


class BindingError(CircuitQError):
    """Missing, extraneous, or non-positive parameter bindings."""


class AnalysisError(CircuitQError):
    """Numerical or symbolic analysis failed for a valid circuit."""


class BridgeSingularityError(AnalysisError):
    """Voltage transfer through a balanced bridge is exactly zero.

    Raised when the lattice denominator Ya*Yd - Yb*Yc of a four-node
    reduction vanishes identically, as happens for a perfectly symmetric
    junction ring.  Breaking the symmetry with slightly different element
    values removes the singularity.
    """


class RootConditionError(AnalysisError):
    """A value passed as a polynomial root does not satisfy the root
    condition within tolerance."""


class DegenerateDerivativeError(AnalysisError):
    """Admittance derivative evaluation hit a pole-zero collision."""
