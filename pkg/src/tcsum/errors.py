"""Exception types shared across the package."""


class TCSumError(Exception):
    """Base class for all package errors."""


class DataError(TCSumError, ValueError):
    """Malformed or inconsistent input data (corpora, embeddings, configs)."""


class ModelError(TCSumError, ValueError):
    """A model file or parameter set that cannot be used as requested."""
