"""Exception hierarchy shared by all mvpir modules."""


class MVPIRError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(MVPIRError, ValueError):
    """Incompatible or out-of-range arguments (modulus mismatch, bad prime, ...)."""


class ConfigError(ParameterError):
    """A scheme configuration that cannot support recovery."""


class CapacityError(MVPIRError):
    """A size limit or search budget was exhausted."""

    def __init__(self, message, largest=None):
        super().__init__(message)
        self.largest = largest


class FamilyFormatError(MVPIRError, ValueError):
    """A family file could not be parsed."""


class IntegrityError(MVPIRError):
    """Loaded data parsed fine but violates its invariants."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class ProtocolError(MVPIRError):
    """Wire-level or retrieval failure."""


class InternalError(MVPIRError):
    """An algebraic identity that must hold did not; indicates a bug."""
