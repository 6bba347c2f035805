"""Exception types shared across the package."""


class RabipolyError(Exception):
    """Base class for numerical and validation failures."""


class PoleAtInteger(RabipolyError):
    """The energy variable zeta sits on (or too close to) a nonnegative integer."""

    def __init__(self, zeta, pole):
        self.zeta = zeta
        self.pole = pole
        super().__init__(f"zeta={zeta!r} is within tolerance of the pole at {pole}")


class NearPole(RabipolyError):
    """Evaluation point too close to a pole of a rational approximant."""


class NoConvergence(RabipolyError):
    """Iteration budget exhausted before the stopping rule fired."""

    def __init__(self, message, n_used=None):
        self.n_used = n_used
        super().__init__(message)


class NoRootInBracket(RabipolyError):
    """The bracketed interval shows no sign change."""


class InconsistentWeights(RabipolyError):
    """The two quadrature-weight formulas disagree beyond tolerance."""


class MethodUnstable(RabipolyError):
    """Forward recursion of a minimal solution lost its decay."""


class TooFewLevels(RabipolyError):
    """Not enough levels to form spacing statistics."""
