"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`ProcalError`.
The three intermediate classes map onto CLI exit codes (usage 2, data 3,
numeric 4).
"""


class ProcalError(Exception):
    exit_code = 1


class ConfigError(ProcalError, ValueError):
    exit_code = 2


class DataError(ProcalError, ValueError):
    exit_code = 3


class NumericError(ProcalError, ArithmeticError):
    exit_code = 4


# -- data --------------------------------------------------------------------

class MalformedRow(DataError):
    def __init__(self, row, expected, got):
        super().__init__(f"row {row}: expected {expected} fields, got {got}")
        self.row = row


class NonNumericValue(DataError):
    def __init__(self, row, column, value):
        super().__init__(f"row {row}, column {column}: non-numeric value {value!r}")
        self.row = row
        self.column = column


class EmptyDataset(DataError):
    pass


class NoLabels(DataError):
    pass


class TooFewRecords(DataError):
    pass


class ProvenanceMissing(DataError):
    pass


class ArityMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class SourceFailure(DataError):
    def __init__(self, chunk_index, cause):
        super().__init__(f"record source failed while filling chunk {chunk_index}: {cause}")
        self.chunk_index = chunk_index
        self.__cause__ = cause


# -- configuration -------------------------------------------------------------

class InvalidGroupSize(ConfigError):
    pass


class InvalidClusterCount(ConfigError):
    pass


class InvalidStreamConfig(ConfigError):
    pass


# -- numerics ----------------------------------------------------------------

class ConvergenceFailure(NumericError):
    pass


class NoFallbackAvailable(NumericError):
    pass


class DegenerateSystem(NumericError):
    pass


class NonConvergenceWarning(UserWarning):
    """FastICA component hit ``max_iter`` before meeting ``tol``."""
