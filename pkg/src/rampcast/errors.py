"""Exception types shared across the pipeline.

The command line maps these onto process exit codes (bad input 2, shape
or count mismatch 3, training failure 4). Library callers can catch them
like any ValueError / RuntimeError.
"""


class InputDataError(ValueError):
    """An input file is missing, malformed, or violates the CSV contract."""


class ModelFormatError(InputDataError):
    """A persisted model file is corrupt or has an unsupported version."""


class DataShapeError(ValueError):
    """Data dimensions or counts cannot satisfy an operation's contract."""


class ChaosError(RuntimeError):
    """A Lyapunov estimate is undefined for the given series."""


class TrainingError(RuntimeError):
    """Training produced non-finite parameters or a subset evaluator failed."""
