"""Exception hierarchy shared by the whole toolkit.

The CLI maps these onto distinct exit codes, so raising the right class
matters more than the message text.
"""


class AmlGraphError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(AmlGraphError):
    """Tensor/matrix dimensions do not line up."""


class DomainError(AmlGraphError):
    """An input value is outside the documented domain of an operation."""


class ParameterError(AmlGraphError):
    """A hyperparameter or argument value is invalid."""


class DegenerateDataError(AmlGraphError):
    """The training data cannot support the requested fit (e.g. one class)."""


class DataFormatError(AmlGraphError):
    """A dataset file does not match the expected layout."""


class DataIntegrityError(AmlGraphError):
    """Dataset files are individually well-formed but mutually inconsistent."""


class CheckpointFormatError(AmlGraphError):
    """A checkpoint file is corrupt or has an incompatible format version."""


class ConfigError(AmlGraphError):
    """An experiment configuration is invalid."""


class HarnessError(AmlGraphError):
    """A test/verification harness precondition was violated."""
