"""Exception types shared across the pipeline."""


class MailTopicsError(Exception):
    """Base class for all mailtopics errors."""


class InsufficientDataError(MailTopicsError):
    """Fewer samples than the operation needs (e.g. fitting a reducer)."""


class EmptyInputError(MailTopicsError):
    """An operation received an empty collection it cannot work with."""


class VocabularyEmptyError(MailTopicsError):
    """No term survived the min_df / stopword filters."""


class NoClassesError(MailTopicsError):
    """Every document is an outlier; there is no class to represent."""


class NoTopicsError(MailTopicsError):
    """The model has zero topics; assignment is impossible."""


class ModelFormatError(MailTopicsError):
    """A model artifact is corrupt, truncated, or from an unknown version."""


class RemoteEmbeddingError(MailTopicsError):
    """The remote embedding service failed after retries.

    Carries the index range of the batch that failed so callers can retry
    just that slice.
    """

    def __init__(self, message: str, start: int = 0, end: int = 0):
        super().__init__(message)
        self.start = start
        self.end = end
