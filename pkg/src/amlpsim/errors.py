"""Exception hierarchy shared across the simulator.

DataFormatError subclasses map to CLI exit code 2; everything else that
escapes (ValueError, SimulationInvariantError, AssertionError) maps to 3.
"""


class DataFormatError(Exception):
    """A file on disk does not match its expected format."""


class IdxFormatError(DataFormatError):
    """IDX container has a bad magic number, bad dimensions, or bad labels."""


class IdxTruncatedError(IdxFormatError):
    """IDX payload size disagrees with the header."""


class ModelFormatError(DataFormatError):
    """Model file is structurally invalid."""


class ModelMagicError(ModelFormatError):
    """Model file does not start with the expected magic bytes."""


class ModelVersionError(ModelFormatError):
    """Model file version is not supported."""


class ModelChecksumError(ModelFormatError):
    """Model file CRC32 does not match its payload."""


class ModelTruncatedError(ModelFormatError):
    """Model file is shorter (or longer) than its header implies."""


class TrainingError(Exception):
    """Training diverged (non-finite loss)."""


class DegenerateScaleError(ValueError):
    """A weight layer is all zeros; no quantization scale exists."""


class SimulationInvariantError(Exception):
    """An internal consistency check failed during a run."""
