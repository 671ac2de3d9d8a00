"""Exception types shared across the package."""


class HyqnetError(Exception):
    """Base class for all hyqnet errors."""


class DimensionError(HyqnetError, ValueError):
    """Shape or size mismatch between operands."""


class ContractError(HyqnetError, ValueError):
    """A caller violated an API precondition (non-scalar backward seed,
    non-one-hot target row, zero shots, ...)."""


class CircuitError(HyqnetError, ValueError):
    """Invalid circuit construction or execution (bad qubit index, builder failure)."""


class EncodingError(HyqnetError, ValueError):
    """Invalid input to a data-encoding circuit template."""


class ConfigError(HyqnetError, ValueError):
    """Invalid configuration value (noise probability out of range, unknown model name)."""


class FormatError(HyqnetError, ValueError):
    """Malformed file content (bad magic number, truncated payload, bad CSV)."""


class AdapterError(HyqnetError, RuntimeError):
    """An external black-box circuit failed; carries its metadata string."""

    def __init__(self, message, metadata=""):
        super().__init__(f"{message} [circuit: {metadata}]" if metadata else message)
        self.metadata = metadata
