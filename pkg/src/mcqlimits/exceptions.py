"""Exception types raised across the package."""

import numpy as np


class DimensionError(ValueError):
    """Array shapes do not fit together."""


class ContractError(ValueError):
    """Arguments violate an operation's precondition."""


class SingularityError(ArithmeticError):
    """A physical pole was hit (e.g. the sideband sits on a mechanical resonance)."""


class DivergenceError(ArithmeticError):
    """The requested bound is infinite for these inputs (no information)."""


class IllConditionedError(np.linalg.LinAlgError):
    """A covariance is too badly conditioned to invert in double precision."""
