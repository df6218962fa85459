"""Exception hierarchy shared by all magcool modules.

Every exception carries an ``exit_code`` so the CLI can map failures onto
its documented exit statuses: 1 for domain/config errors, 2 for
instability/runaway conditions, 3 for convergence failures.
"""


class MagcoolError(Exception):
    """Base class for all magcool errors."""

    exit_code = 1


class DomainError(MagcoolError, ValueError):
    """A physical parameter violates its admissible range."""

    exit_code = 1


class ConfigError(MagcoolError):
    """Malformed or inconsistent run configuration."""

    exit_code = 1


class BracketError(DomainError):
    """Root bracketing failed: both endpoints lie on the same side."""

    exit_code = 1


class InstabilityError(MagcoolError):
    """The linearized drift has an eigenvalue in the right half-plane."""

    exit_code = 2


class ParametricThresholdError(InstabilityError):
    """Intracavity pumping exceeds the parametric-oscillation threshold."""

    exit_code = 2


class RunawayError(MagcoolError):
    """Net heating exceeds damping: no steady occupancy exists."""

    exit_code = 2


class SingularityError(MagcoolError):
    """A response matrix is numerically singular at the requested frequency."""

    exit_code = 2


class ConvergenceError(MagcoolError):
    """An iterative solver did not reach its tolerance."""

    exit_code = 3


class MultistabilityWarning(UserWarning):
    """Several distinct steady states were found; the smallest-|c0| root is used."""
