class GsmemError(Exception):
    """Base class for errors raised by gsmemlab."""


class FramingError(GsmemError, ValueError):
    """Trace length does not line up with the bit period."""


class SplitError(GsmemError, ValueError):
    """A class is too small to be split into train and test parts."""


class TrainingError(GsmemError, ValueError):
    """The training set cannot support the requested model."""


class ParseError(GsmemError, ValueError):
    """Malformed CSV, model or configuration text.

    ``line`` is the 1-based line number in ``path`` when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
            where += " "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
