"""Exception hierarchy."""


class GkatError(Exception):
    """Base class for all errors raised by this package."""


class DeclError(GkatError):
    """Invalid or mismatched test/action declaration."""


class NameResolutionError(GkatError):
    """An identifier does not resolve against the declaration."""


class ParseError(GkatError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class AutomatonError(GkatError):
    """Malformed automaton, schema violation, or dangling state reference."""


class SalomaaError(GkatError):
    """The equation system violates the Salomaa side conditions."""


class StateBoundError(GkatError):
    """The automaton exceeds the bound accepted by a bounded search."""


class DerivationError(GkatError):
    """A well-nestedness derivation is ill-formed."""
