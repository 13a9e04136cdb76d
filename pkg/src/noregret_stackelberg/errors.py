"""Exception hierarchy shared by the library and the CLI."""


class InvalidInputError(ValueError):
    """Malformed argument: wrong dimensions, invalid probabilities, bad index."""


class InvalidConfigurationError(ValueError):
    """A policy or experiment setting is inconsistent with the game."""


class UnsupportedSizeError(ValueError):
    """The game exceeds a hard size cap of an enumeration routine."""


class InternalInvariantError(RuntimeError):
    """Something that cannot happen for valid input happened anyway."""


class ParseError(ValueError):
    """Input file error anchored at a line and column (1-based)."""

    def __init__(self, message, line=None, column=None, source=None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(str(self))

    def __str__(self):
        where = self.source or "<input>"
        if self.line is not None:
            where = f"{where}:{self.line}"
            if self.column is not None:
                where = f"{where}:{self.column}"
        return f"{where}: {self.message}"
