"""Exception types shared across the package."""


class Sigma2LabError(Exception):
    """Base class; ``code`` is the short error tag used in reports."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(f"{self.code}: {message}" if message else self.code)


class InvalidSpec(Sigma2LabError, ValueError):
    code = "invalid-spec"


class IndefiniteMetric(Sigma2LabError, ValueError):
    code = "indefinite-metric"


class SingularMetric(Sigma2LabError, ValueError):
    code = "singular-metric"


class ChartDomainError(Sigma2LabError, ValueError):
    code = "chart-domain"


class KindMismatch(Sigma2LabError, TypeError):
    code = "kind-mismatch"


class NotEinstein(Sigma2LabError, ValueError):
    code = "not-einstein"


class WrongDimension(Sigma2LabError, ValueError):
    code = "wrong-dimension"


class DimensionFour(Sigma2LabError, ValueError):
    code = "dimension-four"


class RicciBoundViolated(Sigma2LabError, ValueError):
    code = "ricci-bound-violated"


class ZeroCovector(Sigma2LabError, ValueError):
    code = "zero-covector"


class IndefiniteAlongPath(Sigma2LabError, ValueError):
    code = "indefinite-along-path"


class NonFlatBackground(Sigma2LabError, ValueError):
    code = "non-flat-background"


class NotDivergenceFree(Sigma2LabError, ValueError):
    code = "not-divergence-free"


class TooLargeGrid(Sigma2LabError, ValueError):
    code = "too-large-grid"


class EmptySeries(Sigma2LabError, ValueError):
    code = "empty-series"
