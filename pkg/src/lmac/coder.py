"""Finite-precision arithmetic coder.

32-bit low/high registers (high stored inclusive), quarter-interval
renormalization with pending-bit tracking, and interval narrowing by
``low + floor(range*cum/total)``. With frequency totals of 2**16 the
intermediate products stay under 2**48, and the post-renormalization
range of at least 2**30 keeps every one-count symbol decodable.

Streams are self-terminating: the terminal EOS token is encoded in-band,
and the leading EOS used to condition the first prediction is never
encoded at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import CorruptStreamError, InputError, ModelContractError
from .models import Model, QuantizedDistribution

REGISTER_BITS = 32
_FULL = 1 << REGISTER_BITS
_HALF = _FULL >> 1
_QUARTER = _FULL >> 2
_THREE_QUARTERS = 3 * _QUARTER
_MASK = _FULL - 1

# Virtual zero bits a reader may supply past the end of the payload:
# enough to prime the value register and absorb byte padding, and small
# enough that truncated streams fail instead of decoding garbage forever.
READER_SLACK_BITS = REGISTER_BITS + 7


@dataclass(frozen=True)
class BitString:
    """An immutable bit sequence, packed MSB-first into bytes."""

    data: bytes
    bit_length: int

    def __post_init__(self) -> None:
        if self.bit_length < 0 or len(self.data) != (self.bit_length + 7) // 8:
            raise ValueError("data length does not match bit_length")

    def bit(self, i: int) -> int:
        if not 0 <= i < self.bit_length:
            raise IndexError(i)
        return (self.data[i >> 3] >> (7 - (i & 7))) & 1

    def bits(self) -> list[int]:
        return [self.bit(i) for i in range(self.bit_length)]

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        w = BitWriter()
        for b in bits:
            w.write(b)
        return w.getvalue()


class BitWriter:
    """Packs bits into a bytearray, MSB-first."""

    def __init__(self) -> None:
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0

    def write(self, bit: int) -> None:
        self.write_bits(bit, 1)

    def write_bits(self, value: int, nbits: int) -> None:
        """Append the low `nbits` bits of `value`, most significant first."""
        acc = (self._acc << nbits) | value
        n = self._nacc + nbits
        buf = self._buf
        while n >= 8:
            n -= 8
            buf.append((acc >> n) & 0xFF)
        self._acc = acc & ((1 << n) - 1)
        self._nacc = n

    @property
    def bit_length(self) -> int:
        return len(self._buf) * 8 + self._nacc

    def getvalue(self) -> BitString:
        """Snapshot as a BitString; the final partial byte is zero-padded."""
        n = self.bit_length
        data = bytes(self._buf) if self._nacc == 0 else bytes(
            self._buf + bytes([self._acc << (8 - self._nacc)])
        )
        return BitString(data, n)


class BitReader:
    """Reads bits MSB-first, supplying at most READER_SLACK_BITS zeros past
    the end before declaring the stream corrupt."""

    def __init__(self, bits: BitString, slack: int = READER_SLACK_BITS):
        self._data = bits.data
        self._nbits = bits.bit_length
        self._limit = bits.bit_length + slack
        self._pos = 0

    @property
    def bits_read(self) -> int:
        return self._pos

    def read(self) -> int:
        pos = self._pos
        if pos >= self._limit:
            raise CorruptStreamError("bit stream exhausted before disambiguation")
        self._pos = pos + 1
        if pos >= self._nbits:
            return 0
        return (self._data[pos >> 3] >> (7 - (pos & 7))) & 1

    def read_bits(self, n: int) -> int:
        """Read `n` bits as one integer, MSB-first."""
        pos = self._pos
        end = pos + n
        if end > self._limit:
            raise CorruptStreamError("bit stream exhausted before disambiguation")
        self._pos = end
        nbits = self._nbits
        if pos >= nbits:
            return 0
        take_end = min(end, nbits)
        first = pos >> 3
        last = (take_end + 7) >> 3
        chunk = int.from_bytes(self._data[first:last], "big")
        chunk >>= (last << 3) - take_end
        chunk &= (1 << (take_end - pos)) - 1
        return chunk << (end - take_end)


class StreamEncoder:
    """Arithmetic encoder over one stream; strictly sequential use."""

    def __init__(self, writer: Optional[BitWriter] = None):
        self.writer = writer if writer is not None else BitWriter()
        self.low = 0
        self.high = _MASK
        self.pending_bits = 0

    def encode_token(self, dist: QuantizedDistribution, token: int) -> None:
        """Narrow the interval to the token's slot and emit forced bits.

        A determined leading bit flushes as itself followed by the pending
        underflow bits inverted; the whole run goes out in one write.
        """
        if not 0 <= token < dist.size:
            raise ModelContractError(f"token {token} outside distribution of size {dist.size}")
        cum = dist.cum
        lo_c = int(cum[token])
        hi_c = int(cum[token + 1])
        total = dist.total
        low = self.low
        rng = self.high - low + 1
        high = low + (rng * hi_c) // total - 1
        low = low + (rng * lo_c) // total

        pending = self.pending_bits
        out = 0
        out_n = 0
        while True:
            if high < _HALF:
                out = (out << (pending + 1)) | ((1 << pending) - 1)
                out_n += pending + 1
                pending = 0
            elif low >= _HALF:
                out = (out << (pending + 1)) | (1 << pending)
                out_n += pending + 1
                pending = 0
                low -= _HALF
                high -= _HALF
            elif low >= _QUARTER and high < _THREE_QUARTERS:
                pending += 1
                low -= _QUARTER
                high -= _QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
        if out_n:
            self.writer.write_bits(out, out_n)
        self.low = low
        self.high = high
        self.pending_bits = pending
        assert low < high <= _MASK and high - low >= _QUARTER

    def finish(self) -> BitString:
        """Flush the disambiguation bits and return the whole stream.

        Emits exactly pending_bits + 2 bits; together with the convention
        that a reader supplies zeros past the end, the resulting value
        always lands inside the final interval.
        """
        run = self.pending_bits + 1
        if self.low < _QUARTER:
            self.writer.write_bits((1 << run) - 1, run + 1)
        else:
            self.writer.write_bits(1 << run, run + 1)
        self.pending_bits = 0
        return self.writer.getvalue()


class StreamDecoder:
    """Mirror of StreamEncoder: same narrowing, same renormalization."""

    def __init__(self, reader: BitReader):
        self.reader = reader
        self.low = 0
        self.high = _MASK
        self.value = reader.read_bits(REGISTER_BITS)

    def decode_token(self, dist: QuantizedDistribution) -> int:
        cum = dist.cum
        total = dist.total
        low = self.low
        rng = self.high - low + 1
        scaled = ((self.value - low + 1) * total - 1) // rng
        token = int(np.searchsorted(cum, scaled, side="right")) - 1
        lo_c = int(cum[token])
        hi_c = int(cum[token + 1])
        high = low + (rng * hi_c) // total - 1
        low = low + (rng * lo_c) // total

        # Renormalization decisions depend only on low/high, so the value
        # register can catch up with one bulk read at the end.
        shifts = 0
        sub_acc = 0
        while True:
            if high < _HALF:
                sub = 0
            elif low >= _HALF:
                sub = _HALF
                low -= _HALF
                high -= _HALF
            elif low >= _QUARTER and high < _THREE_QUARTERS:
                sub = _QUARTER
                low -= _QUARTER
                high -= _QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
            sub_acc = (sub_acc << 1) + sub
            shifts += 1
        if shifts:
            self.value = (
                (self.value << shifts) - (sub_acc << 1) + self.reader.read_bits(shifts)
            )
        self.low = low
        self.high = high
        assert low <= self.value <= high and high - low >= _QUARTER
        return token


def iter_coding_steps(
    model: Model, tokens: Sequence[int]
) -> Iterator[tuple[QuantizedDistribution, int]]:
    """Yield (distribution, token) pairs exactly as the encoder sees them:
    every data token in order, then the terminal EOS, with the model
    observing each data token after its distribution was produced."""
    vocab = model.vocab
    eos = vocab.eos_id
    for t in tokens:
        if t == eos:
            raise InputError("token stream contains an interior EOS")
        if not 0 <= t < vocab.size:
            raise ModelContractError(f"token {t} outside vocabulary of size {vocab.size}")
        dist = model.next_distribution()
        if dist.size != vocab.size:
            raise ModelContractError(
                f"model produced distribution of size {dist.size}, vocabulary has {vocab.size}"
            )
        yield dist, t
        model.observe(t)
    dist = model.next_distribution()
    if dist.size != vocab.size:
        raise ModelContractError(
            f"model produced distribution of size {dist.size}, vocabulary has {vocab.size}"
        )
    yield dist, eos


def encode_stream(model: Model, tokens: Sequence[int]) -> BitString:
    """Encode tokens plus the terminal EOS into a self-terminating stream.

    The model must be a fresh per-stream instance; decoding requires an
    identically parameterized fresh instance.
    """
    enc = StreamEncoder()
    for dist, tok in iter_coding_steps(model, tokens):
        enc.encode_token(dist, tok)
    return enc.finish()


def decode_stream(
    model: Model, bits: BitString, max_tokens: Optional[int] = None
) -> list[int]:
    """Decode a stream produced by encode_stream under an identically
    behaving model; returns the tokens without the terminal EOS."""
    vocab = model.vocab
    eos = vocab.eos_id
    dec = StreamDecoder(BitReader(bits))
    out: list[int] = []
    while True:
        dist = model.next_distribution()
        if dist.size != vocab.size:
            raise ModelContractError(
                f"model produced distribution of size {dist.size}, vocabulary has {vocab.size}"
            )
        token = dec.decode_token(dist)
        if token == eos:
            return out
        out.append(token)
        model.observe(token)
        if max_tokens is not None and len(out) > max_tokens:
            raise CorruptStreamError("decoded past the expected stream length without finding EOS")
