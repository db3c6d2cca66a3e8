"""Exception hierarchy shared by the solver, the estimates lab and the CLI."""


class MKGError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MKGError, ValueError):
    """Invalid grid, physics or scenario parameters."""


class UsageError(MKGError, ValueError):
    """An operation was called on inputs in the wrong representation or grid."""


class SingularOperatorError(MKGError, ArithmeticError):
    """A multiplier singular at zero frequency met a field with nonzero mean."""


class DomainError(MKGError, ValueError):
    """A symbol was evaluated outside its domain (e.g. at a zero frequency)."""


class ConstraintError(MKGError):
    """Cauchy data violate the Gauss law, div B = 0 or torus charge neutrality."""


class BlowUpError(MKGError, FloatingPointError):
    """Non-finite or runaway state detected during time stepping."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t = {t:.17g})")
        self.t = t


class FixtureParseError(MKGError, ValueError):
    """Malformed exponent-matrix fixture or matrix string."""

    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class ConfigParseError(ConfigurationError):
    """Malformed scenario configuration; names the offending line and key."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = (", ".join(where) + ": ") if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


class SnapshotError(MKGError, ValueError):
    """Unreadable or inconsistent field snapshot."""
