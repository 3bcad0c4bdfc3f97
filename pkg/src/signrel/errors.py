"""Exception hierarchy. Each family maps to a CLI exit code."""


class SignrelError(Exception):
    exit_code = 1


class ParseError(SignrelError):
    """Malformed input file or record."""

    exit_code = 2

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidWindowError(ParseError):
    pass


class ModelError(SignrelError):
    exit_code = 3


class ModelInconsistencyError(ModelError):
    """Observed count exceeds the urn capacity of its dyad."""


class DegenerateTrainingError(ModelError):
    pass


class GroupTooSmallError(ModelError):
    pass


class NoPositiveRelationsError(ModelError):
    pass


class NumericError(SignrelError):
    exit_code = 4


class UndefinedScoreError(NumericError):
    pass
