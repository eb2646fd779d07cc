class GraphWaveError(Exception):
    """Base exception class for all graphwave errors."""
    pass

class GraphError(GraphWaveError):
    """Base exception class for graph-related errors."""
    pass

class GraphValidationError(GraphError):
    """Raised when a graph violates weight, measure or simplicity rules."""
    pass

class UnknownVertexError(GraphError):
    """Raised when a vertex identifier is not part of the graph."""
    pass

class EmptyInteriorError(GraphError):
    """Raised when a domain has no interior vertices."""
    pass

class ProblemError(GraphWaveError):
    """Base exception class for wave problem errors."""
    pass

class ProblemValidationError(ProblemError):
    """Raised when initial data or forcing terms are malformed."""
    pass

class ProfileDomainError(ProblemError):
    """Raised when a sampled time profile is queried outside its grid."""
    pass

class SolverError(GraphWaveError):
    """Base exception class for solver errors."""
    pass

class LinearSolverError(SolverError):
    """Raised when the SPD solve does not converge."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual

class EigenSolverError(SolverError):
    """Raised when the symmetric eigensolver fails."""
    pass

class DegenerateSpectrumError(SolverError):
    """Raised when an eigenvalue is numerically zero."""
    pass

class BoundsNotApplicableError(SolverError):
    """Raised when a-priori bounds are requested for a step length above 1."""
    pass

class AnalysisError(GraphWaveError):
    """Base exception class for experiment errors."""
    pass

class EnergyIdentityError(AnalysisError):
    """Raised when energy conservation is requested for a forced problem."""
    pass

class ConfigurationError(GraphWaveError):
    """Raised when there's an error in configuration."""
    pass

class InputFormatError(GraphWaveError):
    """Raised when an input file cannot be parsed."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        location = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column
