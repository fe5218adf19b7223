"""Exception hierarchy shared across the toolkit.

The CLI maps these onto distinct exit codes, so raising the right class
matters more than the message text.
"""


class LmacError(Exception):
    """Base class for all toolkit errors."""


class InputError(LmacError):
    """Bad user input: unreadable files, empty corpora, malformed tables."""


class ModelContractError(LmacError):
    """A probability model violated its contract (wrong size, bad freqs)."""


class VocabularyTooLargeError(ModelContractError):
    """Vocabulary exceeds the quantizer's supported size."""


class BridgeTransportError(LmacError):
    """The bridge process/socket died or could not be reached."""


class BridgeProtocolError(LmacError):
    """The bridge answered, but the reply violates the wire protocol."""


class TokenizerLossyError(LmacError):
    """The bridge tokenizer cannot restore this text exactly."""


class ContainerFormatError(LmacError):
    """Not a valid container: bad magic, unsupported version, short header."""


class ModelMismatchError(LmacError):
    """Container was produced under a different model spec."""


class CorruptStreamError(LmacError):
    """The arithmetic-code payload cannot be decoded."""
