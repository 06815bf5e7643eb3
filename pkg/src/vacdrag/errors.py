"""Exception hierarchy for the vacdrag solvers."""


class VacdragError(Exception):
    """Base class for all solver errors."""


class DegenerateInputError(VacdragError):
    """An input combination makes the requested quantity undefined."""


class PoleError(VacdragError):
    """A reflection coefficient was evaluated too close to one of its poles."""


class HigherOrderPoleError(VacdragError):
    """The simple-pole residue extraction failed (derivative of 1/R vanishes)."""


class BranchLostError(VacdragError):
    """Branch continuation found no root inside the continuity window."""


class OutOfRangeError(VacdragError):
    """Requested value lies outside the range attained by a branch."""


class BoundaryTooCloseError(VacdragError):
    """Adaptive contour refinement exceeded its depth limit near a zero/pole."""


class CertificationError(VacdragError):
    """The winding-number zero count disagrees with the located modes."""


class SupportTruncationError(VacdragError):
    """The instability support is not negligible on the integration boundary."""


class NonConvergenceError(VacdragError):
    """An extrapolation or iteration did not reach its tolerance."""


class SaturationError(VacdragError):
    """Time evolution requested beyond the sinh overflow horizon."""


class ConfigError(VacdragError):
    """Invalid run configuration document."""

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")
