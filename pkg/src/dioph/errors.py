"""Exception hierarchy shared by the library and the CLI exit codes."""


class DiophError(Exception):
    exit_code = 1


class ValidationError(DiophError, ValueError):
    exit_code = 2


class PrecisionError(DiophError, ArithmeticError):
    """A real-place comparison stayed undecided at the precision cap."""

    exit_code = 3


class ResourceError(DiophError):
    """Dimension or enumeration cap exceeded."""

    exit_code = 4


class NoWitness(DiophError):
    """The requested height is not a witness of non-singularity."""

    exit_code = 2


class StrongApproxError(DiophError):
    exit_code = 2


class SolverError(DiophError, RuntimeError):
    """A construction produced something its own guarantees rule out."""
