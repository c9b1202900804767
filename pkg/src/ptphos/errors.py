"""Exception types raised across the ptphos pipeline."""


class PtphosError(Exception):
    """Base class for all ptphos errors."""


# --- dataset / schema ---

class MissingColumnError(PtphosError):
    pass


class UnknownColumnError(PtphosError):
    pass


class DuplicateIdError(PtphosError):
    pass


class BadLevelError(PtphosError):
    pass


class OutOfRangeError(PtphosError):
    pass


class MissingValueError(PtphosError):
    pass


class BadValueError(PtphosError):
    pass


class MissingTargetError(PtphosError):
    pass


class EmptyMatrixError(PtphosError):
    pass


# --- splitting ---

class TooFewSamplesError(PtphosError):
    pass


class KTooLargeError(PtphosError):
    pass


# --- learners ---

class BadParamError(PtphosError):
    pass


class NonFiniteError(PtphosError):
    pass


class ColumnMismatchError(PtphosError):
    pass


class SingularKernelError(PtphosError):
    pass


class UnsupportedImportanceError(PtphosError):
    pass


# --- stacking ---

class EmptyFoldError(PtphosError):
    pass


# --- metrics ---

class LengthMismatchError(PtphosError):
    pass


class ConstantTruthError(PtphosError):
    pass


# --- physics ---

class NonPositiveError(PtphosError):
    pass


# --- persistence / config ---

class FormatVersionError(PtphosError):
    pass


class ConfigError(PtphosError):
    pass


class StageError(PtphosError):
    """Wraps a failure with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
