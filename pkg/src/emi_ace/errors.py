"""Exception types shared across the toolkit."""


class EmiAceError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(EmiAceError, ValueError):
    pass


class DegenerateSampleError(EmiAceError, ValueError):
    """A sample has zero norm after real-mean removal and carries no direction."""


class UndefinedStatisticError(EmiAceError, ArithmeticError):
    """ACE is undefined because a vector coincides with the background mean."""


class EstimationError(EmiAceError, ArithmeticError):
    """Background covariance is singular; raise the ridge."""


class PipelineError(EmiAceError):
    """Failure inside a pipeline stage.  ``stage`` names the stage that failed."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class CsvParseError(EmiAceError, ValueError):
    """Malformed input file; the message names the file and line."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
