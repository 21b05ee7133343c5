"""Exception hierarchy.

Data errors (bad input, infeasible sizes) and numerical failures are kept
apart so the command line can map them to distinct exit codes.
"""


class HypergraphError(Exception):
    """Base class for all errors raised by :mod:`hgpart`."""


class DataError(HypergraphError, ValueError):
    """Invalid or unusable input data."""


class NumericalError(HypergraphError, ArithmeticError):
    """A numerical stage failed or produced an unusable result."""


class IsolatedNodeError(DataError):
    def __init__(self, node: int):
        self.node = node
        super().__init__(f"node {node} has degree 0")


class ZeroVolumePartError(DataError):
    def __init__(self, part: int):
        self.part = part
        super().__init__(f"part {part} is nonempty but has zero volume")


class InfeasibleScaleError(DataError):
    pass


class ZeroExpectedDegreeError(DataError):
    def __init__(self, node: int):
        self.node = node
        super().__init__(f"node {node} has zero expected degree")


class IndivisiblePartitionError(DataError):
    pass


class LengthMismatchError(DataError):
    pass


class TooFewNodesError(DataError):
    pass


class UnidentifiableError(NumericalError):
    def __init__(self, delta: float):
        self.delta = delta
        super().__init__(f"partition is not identifiable (delta={delta!r} <= 0)")


class ZeroRowError(NumericalError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"row {row} of the embedding is numerically zero")


class NoConvergenceError(NumericalError):
    pass
