"""
Exception hierarchy shared by the scheduling package.

Every error raised on purpose by the solver derives from ``SchedulingError``
so the CLI and the HTTP layer can map categories to exit codes / status codes
without string matching.
"""


class SchedulingError(Exception):
    """Base class for all solver errors."""


class ContractViolation(SchedulingError, ValueError):
    """A caller broke an operation's precondition."""


class InvariantError(SchedulingError, AssertionError):
    """An internal structure check failed."""


# ── TSPLIB parsing ────────────────────────────────────────────────────────────


class TsplibParseError(SchedulingError, ValueError):
    """Base class for TSPLIB parse failures; names the field and line."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class MalformedHeaderError(TsplibParseError):
    pass


class UnsupportedFormatError(TsplibParseError):
    pass


class TokenCountError(TsplibParseError):
    pass


class NegativeWeightError(TsplibParseError):
    pass


class InvalidWeightError(TsplibParseError):
    pass


# ── Solver limits ─────────────────────────────────────────────────────────────


class RecombinationTooLarge(SchedulingError):
    """The recombination problem has more blocks than the enumeration cap."""

    def __init__(self, q: int, cap: int):
        self.q = q
        self.cap = cap
        super().__init__(f"recombination too large: q={q} exceeds cap {cap}")


class SolverLimitExceeded(SchedulingError):
    """An exact method or oracle refused an input above its guard."""

    def __init__(self, what: str, value: int, limit: int):
        self.what = what
        self.value = value
        self.limit = limit
        super().__init__(f"{what}={value} exceeds the limit {limit}")
