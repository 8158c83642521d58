"""Exception hierarchy.

Each family carries the process exit code the command line reports for it.
"""


class SeslemmaError(Exception):
    exit_code = 1


class ConfigError(SeslemmaError, ValueError):
    """Invalid configuration or command-line usage."""

    exit_code = 1


class DataError(SeslemmaError):
    exit_code = 2


class ParseError(DataError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EncodingError(DataError, UnicodeError):
    pass


class AlignmentError(DataError, ValueError):
    def __init__(self, message, sentence=None, token=None):
        self.sentence = sentence
        self.token = token
        super().__init__(message)


class RuleParseError(DataError, ValueError):
    pass


class RuleApplicationError(DataError, ValueError):
    pass


class ModelError(SeslemmaError):
    exit_code = 3


class FormatError(ModelError):
    """Model file is truncated or not a model file at all."""
