"""Exception hierarchy shared across the package.

``ParameterError`` maps to CLI exit code 2, ``PipelineError`` (and its
subclasses) to exit code 3.
"""


class RecoveryError(Exception):
    """Base class for all package errors."""


class ParameterError(RecoveryError):
    """Invalid user-supplied parameters or malformed input files."""


class PipelineError(RecoveryError):
    """A pipeline stage could not produce a result."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class EstimationFailure(PipelineError):
    """Eigenvalue estimation could not complete on the given graph."""


class ComparisonFailure(PipelineError):
    """A vertex comparison was numerically unstable."""


class NoFeasibleHyperparameters(PipelineError):
    """The hyperparameter search exhausted its bounds.

    ``failed_inequality`` names the first inequality that could not be
    satisfied.
    """

    def __init__(self, message, failed_inequality, stage=None):
        super().__init__(message, stage=stage)
        self.failed_inequality = failed_inequality
