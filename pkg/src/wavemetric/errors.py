"""Exception hierarchy shared across the package.

Two families matter to callers: validation problems (bad inputs, violated
preconditions) and numerical failures (solver did not meet its tolerance,
a symbol blows up).  The CLI maps them to exit codes 2 and 3 respectively.
"""


class ValidationError(ValueError):
    """Input or precondition violation."""


class IsolatedVertexError(ValidationError):
    """A vertex has no incident edges where connectivity is required."""


class DisconnectedGraphError(ValidationError):
    """Spectral gap is (numerically) zero: the graph is disconnected."""


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""


class EigenSolverError(NumericalError):
    """Eigenpairs violate residual or orthonormality tolerances."""


class UnstableSymbolError(NumericalError):
    """A PDE symbol grows fast enough to overflow over the time horizon."""
