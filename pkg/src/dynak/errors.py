"""Exception hierarchy shared by all dynak modules."""


class DynakError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(DynakError):
    """A documented precondition was violated by the caller."""


class ParseError(DynakError):
    """Raw input could not be parsed; message carries the line number."""


class SchemaError(DynakError):
    """A required column is missing from a tabular input."""


class DataError(DynakError):
    """An interaction log or split violates one of its invariants."""


class UnknownIdError(DynakError):
    """A user or item id is outside the model's vocabulary."""


class ConfigError(DynakError):
    """Bad key, value or type in a configuration file or override."""


class PersistenceError(DynakError):
    """Base for artifact serialization failures."""


class UnsupportedVersionError(PersistenceError):
    """Artifact header declares a kind or version this build cannot read."""


class CorruptFileError(PersistenceError):
    """Artifact body contradicts its header or is truncated."""


class CompatibilityError(DynakError):
    """Model and dataset vocabularies do not match."""


class BackendError(DynakError):
    """Requested compute backend is unavailable."""


class TrainingDivergedError(DynakError):
    """A non-finite parameter appeared during training."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"training diverged: non-finite parameter at iteration {iteration}")
