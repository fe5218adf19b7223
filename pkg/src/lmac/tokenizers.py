"""Text <-> token-stream conversion.

Two routes: a byte-level tokenizer (one token per byte, universal and
lossless) for the built-in models, and a pass-through that delegates to a
bridge process's native tokenizer for bridge-served models.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError, TokenizerLossyError
from .models import BYTE_VOCAB

TOKENIZER_BYTE = 0x00
TOKENIZER_BRIDGE = 0x01


@dataclass
class TokenStream:
    """Ordered token ids plus the id of the tokenizer that produced them."""

    ids: list[int] = field(default_factory=list)
    tokenizer_id: int = TOKENIZER_BYTE

    def __len__(self) -> int:
        return len(self.ids)


def byte_tokenize(data: bytes) -> TokenStream:
    """One token per byte; ids 0..255 over the 257-symbol byte vocabulary."""
    return TokenStream(ids=list(data), tokenizer_id=TOKENIZER_BYTE)


def byte_detokenize(stream: TokenStream) -> bytes:
    if stream.tokenizer_id != TOKENIZER_BYTE:
        raise InputError("stream was not produced by the byte tokenizer")
    try:
        return bytes(stream.ids)
    except ValueError:
        bad = next(t for t in stream.ids if not 0 <= t <= 255)
        raise InputError(f"token {bad} is not a byte value") from None


def bridge_tokenize(connection, text: str) -> TokenStream:
    """Tokenize via the bridge's native tokenizer.

    Bridges must either restore the text exactly or flag the result as
    lossy; lossy text is rejected here so it can be excluded upstream.
    """
    ids, lossy = connection.tokenize(text)
    if lossy:
        raise TokenizerLossyError("bridge tokenizer cannot restore this text exactly")
    return TokenStream(ids=ids, tokenizer_id=TOKENIZER_BRIDGE)


def bridge_detokenize(connection, stream: TokenStream) -> str:
    if stream.tokenizer_id != TOKENIZER_BRIDGE:
        raise InputError("stream was not produced by the bridge tokenizer")
    return connection.detokenize(stream.ids)


class ByteTokenizer:
    """Object form of the byte tokenizer, for code that takes a tokenizer."""

    tokenizer_id = TOKENIZER_BYTE
    vocab = BYTE_VOCAB

    def tokenize(self, data: bytes) -> TokenStream:
        return byte_tokenize(data)

    def detokenize(self, stream: TokenStream) -> bytes:
        return byte_detokenize(stream)


class BridgeTokenizer:
    """Tokenizer backed by a live bridge connection; text in, UTF-8 out."""

    tokenizer_id = TOKENIZER_BRIDGE

    def __init__(self, connection):
        self._connection = connection
        self.vocab = connection.vocabulary

    def tokenize(self, data: bytes) -> TokenStream:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise InputError(f"bridge tokenizer needs UTF-8 text: {e}") from None
        return bridge_tokenize(self._connection, text)

    def detokenize(self, stream: TokenStream) -> bytes:
        return bridge_detokenize(self._connection, stream).encode("utf-8")
