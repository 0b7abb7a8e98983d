"""Exception types shared across the package."""


class BoardLangError(Exception):
    """Base class for all boardlang errors."""


class ParseError(BoardLangError):
    """Game text does not match the grammar.

    Carries the 1-based line/column of the offending token and, when known,
    the set of tokens that would have been accepted there.
    """

    def __init__(self, message, line=None, column=None, expected=None):
        self.line = line
        self.column = column
        self.expected = frozenset(expected) if expected else frozenset()
        loc = f" at line {line}, column {column}" if line is not None else ""
        exp = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message}{loc}{exp}")


class UnknownKeywordError(ParseError):
    """A token is not a keyword the grammar knows in this position."""


class ArityError(ParseError):
    """A form has the wrong number or type of arguments."""


class ValidationFailure(BoardLangError):
    """Raised by helpers that demand a clean validation report."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class InvalidShapeParam(BoardLangError):
    """Board shape parameters are out of range (non-positive, even hexagon, ...)."""


class InvalidPattern(BoardLangError):
    """Pattern offsets are malformed for the requested board."""


class UnsupportedConstruct(BoardLangError):
    """The compiler met a node it has no rule for.

    Impossible for validated specs; seeing this means a compiler bug.
    """


class MissingForwardAssignment(BoardLangError):
    """A relative direction was used without a forward direction for the player."""


class IllegalAction(BoardLangError):
    """An action was stepped whose legal-mask entry is false."""


class TerminalState(BoardLangError):
    """An operation that needs a live game was given a terminated state."""


class EmptyMask(BoardLangError):
    """An action was requested from a mask with no legal entries."""


class CompileError(BoardLangError):
    """Parse/validate/compile pipeline failure, with the stage that failed."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"{stage}: {message}")
