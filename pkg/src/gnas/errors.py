"""Exception types shared across the engine."""


class GnasError(Exception):
    """Base class for all engine errors."""


class ScheduleError(GnasError):
    """Downsampling schedule cannot fit the input resolution."""


class InvalidBounds(GnasError, ValueError):
    """Search bounds are empty or inconsistent."""


class DegenerateInput(GnasError, ValueError):
    """Rank correlation is undefined for this input (constant vector, short or mismatched lengths)."""


class EvalFailed(GnasError):
    """An evaluator reported failure for a candidate."""


class ProtocolError(EvalFailed):
    """External worker violated the wire protocol (bad JSON, id mismatch, wrong handshake)."""


class WorkerDied(EvalFailed):
    """External worker closed its stream or exited mid-session."""


class EvalTimeout(GnasError):
    """External worker exceeded the configured per-request deadline."""


class ConfigError(GnasError):
    """Run configuration missing, malformed, or containing unknown keys."""


class ParseError(GnasError):
    """Summary file missing required content."""
