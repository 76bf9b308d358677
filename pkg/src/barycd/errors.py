"""Exception taxonomy shared by all solver and certifier modules."""


class BarycdError(Exception):
    """Base class for toolkit errors."""


class BadParams(BarycdError):
    """Invalid generator, sampler, or solver parameters."""


class SchemaError(BarycdError):
    """A file does not match its documented schema."""


class AllInfinite(BarycdError):
    """Every candidate point has infinite objective (disjoint distance classes)."""


class InfiniteDistance(BarycdError):
    """Operation needs a finite distance between the given points."""


class MixedFiniteness(BarycdError):
    """A pair is finite in one space and infinite in the other; no finite defect exists."""


class SpaceMismatch(BarycdError):
    """Operands live on different spaces."""


class InfiniteCost(BarycdError):
    """Supports are joined only by infinite-cost arcs."""


class TooLarge(BarycdError):
    """Enumeration would exceed the configured cap."""


class Infeasible(BarycdError):
    """No feasible plan exists (extended-metric disconnection)."""


class MissingPlan(BarycdError):
    """Solution carries no plan or couplings to check."""


class DomainError(BarycdError):
    """Argument outside the principal domain of a distortion coefficient."""


class BadBracket(BarycdError):
    """Bisection bracket does not straddle the pass/fail boundary."""


class NotProbability(BarycdError):
    """Reference measure must be a probability measure for this check."""


class SolverFailure(BarycdError):
    """The LP backend returned an unexpected status, or a cross-check failed."""
