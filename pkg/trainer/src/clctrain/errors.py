class TrainerError(Exception):
    """Base for all errors raised by this package."""


class ConfigError(TrainerError):
    """Invalid configuration or tensor shape drift."""


class DataError(TrainerError):
    """Dataset contents unusable (bad wav, mismatched pair, empty set)."""


class TrainError(TrainerError):
    """Optimization failed, e.g. loss became non-finite."""
