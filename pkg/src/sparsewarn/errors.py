"""Exception hierarchy.

The CLI maps each family to a process exit code: configuration problems
exit 2, data problems exit 3, numerical failures exit 4.
"""


class SparsewarnError(Exception):
    exit_code = 1


class ConfigError(SparsewarnError):
    exit_code = 2


class DataError(SparsewarnError):
    exit_code = 3


class ParseError(DataError):
    """Malformed feature file. ``location`` names the line or byte offset."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class HeaderError(ParseError):
    pass


class RowLengthError(ParseError):
    pass


class NonFiniteError(ParseError):
    pass


class LabelError(ParseError):
    pass


class StratificationError(DataError):
    pass


class NumericalError(SparsewarnError):
    exit_code = 4


class FitError(NumericalError):
    pass


class FactorizationError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass
