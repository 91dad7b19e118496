"""Exception hierarchy shared by all numerical modules."""


class LineaError(Exception):
    """Base class for every numerical failure raised by linea."""


class NonConvergence(LineaError):
    """Root finding did not reach the residual tolerance within the iteration cap."""


class BudgetExceeded(LineaError):
    """A preimage tree would exceed the configured node budget."""


class PostcriticalQuery(LineaError):
    """The query point lies (numerically) on the postcritical set."""


class SingularQuery(PostcriticalQuery):
    """The query point lies on the singular set of an entire function."""


class NotRepelling(LineaError):
    """The fixed point is not repelling enough to linearize."""


class DegenerateRadius(LineaError):
    """No injectivity radius above the floor passed the sampled checks."""


class OverflowEscape(LineaError):
    """Iterates left the binary64 range while evaluating a linearizer."""


class InsufficientGrowth(LineaError):
    """Maximum modulus too small for a log-log growth fit."""


class SeedFailure(LineaError):
    """Newton iteration failed from every seed for one preimage candidate."""

    def __init__(self, level, w_tilde, message="no seed converged"):
        super().__init__(f"level {level}, target {w_tilde!r}: {message}")
        self.level = level
        self.w_tilde = w_tilde


class SiegelValidationFailed(LineaError):
    """The supposed Siegel-disc point escapes or never returns near itself."""


class PoleHit(LineaError):
    """A preimage landed on a pole of the quadratic differential."""


class ZeroSample(LineaError):
    """A pushforward sample vanished, so its logarithm is undefined."""
