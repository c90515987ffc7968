"""Exception hierarchy.

Every error carries an ``exit_code`` that the command line front end maps
onto its process exit status: 2 for configuration problems, 3 for data
integrity problems and 4 for numerical or model-fitting failures.
"""


class NetPScoreError(Exception):
    exit_code = 1


class ConfigError(NetPScoreError, ValueError):
    exit_code = 2


class DataError(NetPScoreError, ValueError):
    exit_code = 3


class SchemaError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class RangeError(DataError):
    pass


class IntegrityError(DataError):
    pass


class CoverageError(DataError):
    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class EmptyResultError(DataError):
    pass


class DomainError(NetPScoreError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 4


class FitError(NetPScoreError, RuntimeError):
    exit_code = 4


class ConvergenceError(FitError):
    def __init__(self, message, last_coef=None, diagnostic=None):
        super().__init__(message)
        self.last_coef = last_coef
        self.diagnostic = diagnostic


class RankError(FitError):
    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = list(columns)


class DegenerateColumnError(FitError):
    pass


class NumericError(FitError):
    pass


class ResourceError(FitError):
    pass


class BootstrapError(FitError):
    pass
