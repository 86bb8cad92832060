"""Exception hierarchy shared by all modules."""


class NNSPError(ValueError):
    """Base class for every input/contract violation raised by this package."""


class DuplicateEdge(NNSPError):
    pass


class InvalidWeight(NNSPError):
    pass


class SelfLoop(NNSPError):
    pass


class DimensionMismatch(NNSPError):
    pass


class InvalidEdgeSet(NNSPError):
    pass


class InvalidEdge(NNSPError):
    pass


class PartitionMismatch(NNSPError):
    pass


class DisconnectedGraph(NNSPError):
    pass


class DuplicateCenter(NNSPError):
    pass


class IndivisibleClusterSize(NNSPError):
    pass


class InvalidSize(NNSPError):
    pass


class EmptySamplingSet(NNSPError):
    pass


class BoundaryTooLarge(NNSPError):
    pass


class InvalidBudget(NNSPError):
    pass
