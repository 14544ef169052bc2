"""Module containing custom exceptions."""


class EmowaveError(Exception):
    """Base class of every error raised by emowave."""


class DataPathDoesNotExist(EmowaveError):
    """Raised if a data file named in the config.yml does not exist."""


class EmptyFile(EmowaveError):
    """Raised if a recording CSV has no header or no data rows."""


class MissingColumn(EmowaveError):
    """Raised if a column named in the schema is absent from the CSV header."""


class RaggedRows(EmowaveError):
    """Raised if a CSV row has a different field count than the header."""


class UnreadableFile(EmowaveError):
    """Raised if a data file cannot be read or is not valid UTF-8."""


class NonNumericSample(EmowaveError):
    """Raised if a channel column holds a value that is not a finite number."""


class InvalidRecording(EmowaveError):
    """Raised if an EEG recording breaks one of its invariants."""


class UnknownLabel(EmowaveError):
    """Raised if a label is not one of Positive, Neutral or Negative."""


class InvalidWindow(EmowaveError):
    """Raised if the window length or overlap cannot produce segments."""


class WindowTooLarge(InvalidWindow):
    """Raised if the window length exceeds the number of samples in a recording."""


class InsufficientSessions(EmowaveError):
    """
    Raised if a label has fewer than two sessions and cannot be split.

    Attributes:
        group (str): the subject/label group that is short of sessions.
        sessions (int): number of distinct sessions found for the group.
    """

    def __init__(self, group: str, sessions: int) -> None:
        """
        Initialise the exception.

        Args:
            group (str): the subject/label group that is short of sessions.
            sessions (int): number of distinct sessions found for the group.
        """
        self.group = group
        self.sessions = sessions
        super().__init__(f"{group} has {sessions} session(s), at least 2 are needed to split")


class UnknownWavelet(EmowaveError):
    """Raised if a wavelet family is not in the filter table."""


class InvalidFilterBank(EmowaveError):
    """Raised if a filter pair is not an orthogonal quadrature-mirror pair."""


class SignalTooShort(EmowaveError):
    """Raised if a signal is too short for a single decomposition step."""


class InvalidLevels(EmowaveError):
    """Raised if a decomposition depth is not a positive integer."""


class TooManyLevels(InvalidLevels):
    """
    Raised if the decomposition depth exceeds what the signal length supports.

    Attributes:
        requested (int): the requested number of levels.
        maximum (int): the deepest admissible level for the signal.
    """

    def __init__(self, requested: int, maximum: int) -> None:
        """
        Initialise the exception.

        Args:
            requested (int): the requested number of levels.
            maximum (int): the deepest admissible level for the signal.
        """
        self.requested = requested
        self.maximum = maximum
        super().__init__(f"{requested} levels requested, the signal supports at most {maximum}")


class ShapeMismatch(EmowaveError):
    """Raised if a wavelet decomposition does not have the coefficient counts it should."""


class InvalidSamplingRate(EmowaveError):
    """Raised if a sampling rate is not strictly positive."""


class NoThetaSubband(EmowaveError):
    """Raised if the theta-only band policy is used but no coefficient set covers theta."""


class EmptyInput(EmowaveError):
    """Raised if statistics are requested for an empty coefficient set."""


class EmptyDataset(EmowaveError):
    """Raised if a dataset that must hold samples is empty."""


class DimensionMismatch(EmowaveError):
    """
    Raised if two vectors or a vector and a model disagree on dimension.

    Attributes:
        expected (int): the dimension the model or first operand has.
        given (int): the dimension that was passed in.
    """

    def __init__(self, expected: int, given: int) -> None:
        """
        Initialise the exception.

        Args:
            expected (int): the dimension the model or first operand has.
            given (int): the dimension that was passed in.
        """
        self.expected = expected
        self.given = given
        super().__init__(f"Expected dimension {expected}, got {given}")


class InvalidExponent(EmowaveError):
    """Raised if a Minkowski exponent is smaller than 1."""


class EmptyModel(EmowaveError):
    """Raised if a kNN model has no training vectors."""


class TooFewSamples(EmowaveError):
    """Raised if there are fewer samples than cross-validation folds."""


class LengthMismatch(EmowaveError):
    """Raised if true and predicted label sequences differ in length."""


class EmptyTally(EmowaveError):
    """Raised if a rate is requested from a tally with no samples."""


class EmptyMatrix(EmowaveError):
    """Raised if a report is requested from a confusion matrix with no samples."""


class StageMismatch(EmowaveError):
    """
    Raised if an artifact was produced under a different configuration.

    Attributes:
        expected (str): the config hash of the current invocation.
        given (str): the config hash found in the artifact.
    """

    def __init__(self, artifact: str, expected: str, given: str) -> None:
        """
        Initialise the exception.

        Args:
            artifact (str): the artifact whose hash does not match.
            expected (str): the config hash of the current invocation.
            given (str): the config hash found in the artifact.
        """
        self.expected = expected
        self.given = given
        super().__init__(
            f"{artifact} was produced with config {given[:12]}, current config is {expected[:12]}"
        )


class MissingArtifact(EmowaveError):
    """Raised if a stage needs an artifact that an earlier stage has not written."""


class MandatoryKeyNotFound(EmowaveError):
    """Raised if a mandatory key is not found in the config.yml."""


class InvalidConfigValue(EmowaveError):
    """Raised if a config.yml or training setting has a value outside its range."""
