"""Exception hierarchy for MengerFlow.

Every failure raised by the library derives from :class:`MengerFlowError`,
which carries a short machine-readable ``error_type`` alongside the human
message. The flow driver relies on the distinction between the subclasses:
restoration, Armijo and isotopy failures are recoverable by shrinking the
step size, whereas invalid inputs are not.

Error Types:
    Input validation:
        - InvalidParams: parameter out of its admissible range
        - InvalidInitialCurve: initial polyline is self-intersecting
        - ParseError: curve or config file could not be parsed
        - IoError: file could not be read or written

    Geometry:
        - DegenerateEdge: an edge of zero length where a direction is needed
        - MidpointCollision: two edge midpoints (nearly) coincide
        - NonDistinctEdges: repeated edge index in a triple
        - MidpointCoincidence: two parameter midpoints coincide
        - DimensionMismatch / PartitionMismatch: incompatible operands

    Solver and flow:
        - SingularSystem: the saddle point matrix could not be factorized
        - RestorationDiverged: modified Newton iteration failed
        - StepsizeUnderflow: backtracking dropped below the minimum step
        - NoDescent: the projected gradient vanishes (critical point)
"""


class MengerFlowError(Exception):
    """Base exception for all MengerFlow errors."""

    error_type = "MengerFlowError"

    def __init__(self, message: str, details: str | None = None):
        self.message = message
        self.details = details
        super().__init__(f"{self.error_type}: {message}")


class InvalidParams(MengerFlowError, ValueError):
    error_type = "InvalidParams"


class InvalidInitialCurve(MengerFlowError):
    error_type = "InvalidInitialCurve"


class ParseError(MengerFlowError, ValueError):
    error_type = "ParseError"


class IoError(MengerFlowError, OSError):
    error_type = "IoError"


class DegenerateEdge(MengerFlowError):
    """Raised when an edge has zero length but a unit direction is required."""

    error_type = "DegenerateEdge"

    def __init__(self, message: str, edge: int | None = None):
        self.edge = edge
        super().__init__(message)


class MidpointCollision(MengerFlowError):
    """Raised when two points of an energy triple are closer than the guard."""

    error_type = "MidpointCollision"


class NonDistinctEdges(MengerFlowError):
    error_type = "NonDistinctEdges"


class MidpointCoincidence(MengerFlowError):
    error_type = "MidpointCoincidence"


class DimensionMismatch(MengerFlowError, ValueError):
    error_type = "DimensionMismatch"


class PartitionMismatch(MengerFlowError, ValueError):
    error_type = "PartitionMismatch"


class SingularSystem(MengerFlowError):
    """Raised when the saddle point matrix is (numerically) rank deficient."""

    error_type = "SingularSystem"

    def __init__(self, message: str, condition_estimate: float = float("inf")):
        self.condition_estimate = condition_estimate
        super().__init__(
            message, details=f"condition estimate {condition_estimate:.3e}"
        )


class RestorationDiverged(MengerFlowError):
    error_type = "RestorationDiverged"

    def __init__(
        self, message: str, violation: float = float("nan"), iterations: int = 0
    ):
        self.violation = violation
        self.iterations = iterations
        super().__init__(message)


class StepsizeUnderflow(MengerFlowError):
    error_type = "StepsizeUnderflow"


class NoDescent(MengerFlowError):
    error_type = "NoDescent"
