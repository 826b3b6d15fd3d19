"""Exception types shared across the package."""


class LenspecError(Exception):
    """Base class for all package errors."""


class ConfigError(LenspecError):
    """Malformed or inconsistent run configuration."""

    def __init__(self, message, section=None, key=None, line=None):
        self.section = section
        self.key = key
        self.line = line
        loc = []
        if section is not None:
            loc.append(f"section [{section}]")
        if key is not None:
            loc.append(f"key '{key}'")
        if line is not None:
            loc.append(f"line {line}")
        suffix = f" ({', '.join(loc)})" if loc else ""
        super().__init__(message + suffix)


class PreconditionViolated(LenspecError):
    """An operation was called outside its domain of validity."""


class BudgetExceeded(LenspecError):
    """An enumeration would exceed the configured node budget."""

    def __init__(self, message, used=None, budget=None):
        self.used = used
        self.budget = budget
        super().__init__(message)


class ThresholdTooSmall(PreconditionViolated):
    """Threshold generating set requested below the roughness floor."""


class NotABasis(PreconditionViolated):
    """Exact translation lengths require the standard free basis."""


class EmptyCensus(PreconditionViolated):
    """A statistic was requested over a census with no usable rows."""


class EmptyFilter(PreconditionViolated):
    """No census row passed the requested filter."""


class RequiresExactLengths(PreconditionViolated):
    """Equality-mode correlation needs exact translation lengths."""


class InsufficientAnnuli(PreconditionViolated):
    """Curve estimation needs more annuli than the census provides."""


class GridTooCoarse(LenspecError):
    """A curve-grid extremum sits on the boundary with nonzero slope."""


class NoConvergence(LenspecError):
    """Iterative estimate did not stabilize within the iteration cap."""

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)
