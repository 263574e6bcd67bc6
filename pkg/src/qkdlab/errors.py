"""Exception hierarchy shared by every qkdlab module."""


class QkdlabError(Exception):
    """Base class for errors raised by qkdlab."""


class DomainError(QkdlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnreachableError(DomainError):
    """The two hypotheses are indistinguishable, no finite trial count works."""


class PerfectlyDistinguishableError(DomainError):
    """Both hypotheses are deterministic and differ; a single trial decides.

    The Chernoff distance is infinite in this case, so it is reported as a
    separate signal instead of returning ``inf``.
    """


class DegenerateError(DomainError):
    """A simulation or closed form has nothing to measure (e.g. zero forwarded pulses)."""


class ConfigError(QkdlabError):
    """A scenario file could not be parsed or failed validation."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.message = message
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
