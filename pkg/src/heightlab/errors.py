"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: DomainError -> 1, ResourceError -> 2,
InvariantViolation -> 3.
"""


class HeightlabError(Exception):
    exit_code = 1


class DomainError(HeightlabError, ValueError):
    """Input outside an operation's domain (zero polynomial, degenerate family, ...)."""

    exit_code = 1


class ResourceError(HeightlabError):
    """A degree, precision or iteration budget was exhausted."""

    exit_code = 2

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class InvariantViolation(HeightlabError, AssertionError):
    """An internal invariant failed. Never caught and clamped; always surfaced."""

    exit_code = 3

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class RootFindingError(HeightlabError):
    """Root iteration hit its cap; ``roots`` holds the best-effort approximations."""

    exit_code = 2

    def __init__(self, message, roots=None, residual=None):
        super().__init__(message)
        self.roots = roots
        self.residual = residual


class ParseError(DomainError):
    def __init__(self, message, line=1, column=1, token=None):
        loc = f"line {line}, column {column}"
        if token is not None:
            loc += f" at {token!r}"
        super().__init__(f"{message} ({loc})")
        self.line = line
        self.column = column
        self.token = token
