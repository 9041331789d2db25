"""Exception types shared across the package."""


class ActiveScalarError(Exception):
    pass


class QuadratureNonconvergence(ActiveScalarError):
    """Adaptive quadrature exhausted its subdivision budget."""


class ComparisonFailure(ActiveScalarError):
    """No finite constant validates the two-sided kernel comparison."""


class NoValidExponent(ActiveScalarError):
    """The minorant fails the monotonicity scan even for a tiny exponent."""


class SearchExhausted(ActiveScalarError):
    pass


class ConstructionFailed(ActiveScalarError):
    pass


class StepRejected(ActiveScalarError):
    pass


class BlowupSuspected(ActiveScalarError):
    """Raised when step halving cannot produce a finite state.

    ``state`` is the last finite field and ``trajectory`` the reports so far.
    """

    def __init__(self, message, state=None, trajectory=None, t=None):
        super().__init__(message)
        self.state = state
        self.trajectory = trajectory if trajectory is not None else []
        self.t = t


class ConfigError(ActiveScalarError):
    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
