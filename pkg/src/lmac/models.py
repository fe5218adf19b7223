"""Probability models and the fixed-point quantizer.

Every entropy model, built-in or served by a bridge process, produces
integer frequency tables summing to 2**16. The coder consumes only these
quantized distributions, so encode and decode see bit-identical numbers
as long as the model itself is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, ModelContractError, VocabularyTooLargeError

F_BITS = 16
QUANT_TOTAL = 1 << F_BITS
MAX_VOCAB = 1 << 15


@dataclass(frozen=True)
class Vocabulary:
    """A finite token alphabet with a designated end-of-stream id."""

    size: int
    eos_id: int

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ModelContractError(f"vocabulary must have at least 2 symbols, got {self.size}")
        if not 0 <= self.eos_id < self.size:
            raise ModelContractError(f"eos id {self.eos_id} outside vocabulary of size {self.size}")


class QuantizedDistribution:
    """Next-token distribution as integer frequencies summing to QUANT_TOTAL.

    `cum` is the cumulative table with cum[0] == 0 and cum[size] == total;
    the frequency floor of one count per symbol guarantees every symbol is
    decodable.
    """

    __slots__ = ("freqs", "total", "cum")

    def __init__(
        self,
        freqs: np.ndarray,
        total: int = QUANT_TOTAL,
        validate: bool = True,
        cum: Optional[np.ndarray] = None,
    ):
        freqs = np.ascontiguousarray(freqs, dtype=np.int64)
        if validate:
            if freqs.ndim != 1 or freqs.size < 1:
                raise ModelContractError("freqs must be a non-empty 1-d array")
            if freqs.min(initial=1) < 1:
                raise ModelContractError("every symbol needs a frequency of at least 1")
            if int(freqs.sum()) != total:
                raise ModelContractError(
                    f"frequencies sum to {int(freqs.sum())}, expected {total}"
                )
        self.freqs = freqs
        self.total = total
        if cum is None:
            cum = np.empty(freqs.size + 1, dtype=np.int64)
            cum[0] = 0
            np.cumsum(freqs, out=cum[1:])
        self.cum = cum

    @property
    def size(self) -> int:
        return self.freqs.size

    def bits_for(self, token: int) -> float:
        """Code length of `token` in bits under this distribution."""
        return math.log2(self.total) - math.log2(int(self.freqs[token]))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QuantizedDistribution)
            and self.total == other.total
            and np.array_equal(self.freqs, other.freqs)
        )

    def __repr__(self) -> str:
        return f"QuantizedDistribution(size={self.size}, total={self.total})"


def _finish_apportionment(
    base: np.ndarray, remainders: np.ndarray, priority: np.ndarray, total: int
) -> np.ndarray:
    """Distribute leftover units by largest remainder, then enforce the floor of 1.

    Remainder ties break to the lower token id (stable sort). Floor
    enforcement takes units from the largest bin, preferring the lowest
    pre-quantization weight and then the highest id among equals, which
    keeps freq order consistent with weight order.
    """
    leftover = total - int(base.sum())
    if leftover < 0:
        raise ModelContractError("probabilities sum above 1; cannot apportion")
    if leftover > 0:
        order = np.argsort(-remainders, kind="stable")
        base[order[:leftover]] += 1

    if base.min() < 1:
        for idx in np.flatnonzero(base == 0):
            base[idx] = 1
            top = np.flatnonzero(base == base.max())
            top = top[priority[top] == priority[top].min()]
            base[int(top[-1])] -= 1
    return base


def quantize(probs: Sequence[float], total: int = QUANT_TOTAL) -> QuantizedDistribution:
    """Largest-remainder apportionment of a real distribution to integer counts.

    Deterministic: remainder ties go to the lower token id, and every
    symbol ends with at least one count.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ModelContractError("probs must be a non-empty 1-d array")
    if p.size > MAX_VOCAB:
        raise VocabularyTooLargeError(f"vocabulary size {p.size} exceeds {MAX_VOCAB}")
    if np.any(p < 0):
        raise ModelContractError("probabilities must be non-negative")
    s = float(p.sum())
    if abs(s - 1.0) > 1e-6:
        raise ModelContractError(f"probabilities sum to {s}, expected 1 within 1e-6")

    raw = (p / s) * total
    base = np.floor(raw).astype(np.int64)
    freqs = _finish_apportionment(base, raw - base, p, total)
    return QuantizedDistribution(freqs, total, validate=False)


def _apportion_weights_numpy(w: np.ndarray, total: int) -> tuple[np.ndarray, np.ndarray]:
    """Reference integer apportionment; returns (freqs, cumulative)."""
    s = int(w.sum())
    raw = w * total
    base, rem = np.divmod(raw, s)
    leftover = total - int(base.sum())
    if leftover > 0:
        # combined key: remainder descending, then lower id; one unstable sort
        order = np.argsort(rem * w.size + (w.size - 1 - np.arange(w.size)))
        base[order[-leftover:]] += 1
    if base.min() < 1:
        base = _finish_apportionment(base, np.zeros_like(rem), w, total)
    cum = np.empty(w.size + 1, dtype=np.int64)
    cum[0] = 0
    np.cumsum(base, out=cum[1:])
    return base, cum


try:  # compiled hot path; the numpy reference stays as fallback and oracle
    from numba import njit

    @njit(cache=True)
    def _apportion_weights_kernel(w, total):  # pragma: no cover - compiled
        n = w.shape[0]
        s = np.int64(0)
        for i in range(n):
            s += w[i]
        base = np.empty(n, np.int64)
        key = np.empty(n, np.int64)
        acc = np.int64(0)
        for i in range(n):
            raw = w[i] * total
            b = raw // s
            base[i] = b
            # remainder descending then lower id, as a single sortable key;
            # keys are unique, so a threshold selects exactly `leftover` slots
            key[i] = (raw - b * s) * n + (n - 1 - i)
            acc += b
        # each floor loses under one unit, so 0 <= leftover < n always
        leftover = total - acc
        if leftover > 0:
            kth = np.partition(key, n - leftover)[n - leftover]
            for i in range(n):
                if key[i] >= kth:
                    base[i] += 1
        for i in range(n):
            if base[i] == 0:
                base[i] = 1
                donor = -1
                for j in range(n):
                    if base[j] < 2:
                        continue
                    if donor < 0 or base[j] > base[donor] or (
                        base[j] == base[donor]
                        and (w[j] < w[donor] or (w[j] == w[donor] and j > donor))
                    ):
                        donor = j
                base[donor] -= 1
        cum = np.empty(n + 1, np.int64)
        cum[0] = 0
        for i in range(n):
            cum[i + 1] = cum[i] + base[i]
        return base, cum

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False


def quantize_weights(weights: np.ndarray, total: int = QUANT_TOTAL) -> QuantizedDistribution:
    """Exact integer-weight variant of `quantize` (no float rounding).

    For weights w the target is w[i]/sum(w); remainders are compared as
    exact integers, so results match `quantize` on rational inputs and
    are immune to float tie noise. Used by the adaptive count models.
    """
    w = np.ascontiguousarray(weights, dtype=np.int64)
    if w.size > MAX_VOCAB:
        raise VocabularyTooLargeError(f"vocabulary size {w.size} exceeds {MAX_VOCAB}")
    if _HAVE_NUMBA:
        freqs, cum = _apportion_weights_kernel(w, total)
    else:
        freqs, cum = _apportion_weights_numpy(w, total)
    return QuantizedDistribution(freqs, total, validate=False, cum=cum)


class Model:
    """Per-stream autoregressive next-token model.

    A fresh instance starts with the conditioning-only EOS as its context.
    `distribution(ctx)` is the pure mapping from an explicit context;
    `next_distribution()`/`observe(token)` drive the maintained context
    during coding. Adaptive instances must never be shared across streams.
    """

    vocab: Vocabulary
    model_id: str

    def distribution(self, ctx: Sequence[int]) -> QuantizedDistribution:
        raise NotImplementedError

    def next_distribution(self) -> QuantizedDistribution:
        raise NotImplementedError

    def observe(self, token: int) -> None:
        raise NotImplementedError

    def next_raw_probs(self) -> Optional[np.ndarray]:
        """Pre-quantization probabilities for diagnostics, if available."""
        return None

    def close(self) -> None:
        pass

    def _check_ctx(self, ctx: Sequence[int]) -> None:
        for t in ctx:
            if not 0 <= t < self.vocab.size:
                raise ModelContractError(f"context token {t} outside vocabulary")


class UniformModel(Model):
    """Stateless uniform prior over the vocabulary."""

    model_id = "uniform"

    def __init__(self, vocab: Vocabulary):
        if vocab.size > MAX_VOCAB:
            raise VocabularyTooLargeError(f"vocabulary size {vocab.size} exceeds {MAX_VOCAB}")
        self.vocab = vocab
        self._dist = quantize_weights(np.ones(vocab.size, dtype=np.int64))
        self._raw = np.full(vocab.size, 1.0 / vocab.size)

    def distribution(self, ctx: Sequence[int]) -> QuantizedDistribution:
        self._check_ctx(ctx)
        return self._dist

    def next_distribution(self) -> QuantizedDistribution:
        return self._dist

    def observe(self, token: int) -> None:
        pass

    def next_raw_probs(self) -> np.ndarray:
        return self._raw


class NgramModel(Model):
    """Adaptive add-1 n-gram with back-off to shorter contexts.

    Order k conditions on the previous k-1 tokens. Counts for every
    context length 0..k-1 update after each observed token; prediction
    uses the longest context suffix that has been observed at least once,
    falling back to the uniform add-1 prior when nothing matches. The
    update rule is identical on the encode and decode paths, which is
    what makes separately constructed instances interchangeable.
    """

    MAX_ORDER = 8

    def __init__(self, vocab: Vocabulary, order: int):
        if not 1 <= order <= self.MAX_ORDER:
            raise ModelContractError(f"ngram order must be in 1..{self.MAX_ORDER}, got {order}")
        if vocab.size > MAX_VOCAB:
            raise VocabularyTooLargeError(f"vocabulary size {vocab.size} exceeds {MAX_VOCAB}")
        self.vocab = vocab
        self.order = order
        self.model_id = f"ngram:{order}"
        # _counts[L] maps a length-L context tuple to per-token counts:
        # a dense counts+1 array for L <= 1 (few contexts, hot path),
        # a sparse raw-count dict above.
        self._counts: list[dict] = [{} for _ in range(order)]
        self._ctx: list[int] = [vocab.eos_id]
        self._uniform = quantize_weights(np.ones(vocab.size, dtype=np.int64))

    def _weights_for(self, ctx: Sequence[int]) -> Optional[np.ndarray]:
        """Laplace counts+1 for the longest observed context suffix, or None."""
        n = len(ctx)
        for length in range(min(self.order - 1, n), -1, -1):
            key = tuple(ctx[n - length:]) if length else ()
            bucket = self._counts[length].get(key)
            if bucket is None:
                continue
            if isinstance(bucket, dict):
                w = np.ones(self.vocab.size, dtype=np.int64)
                for tok, c in bucket.items():
                    w[tok] += c
                return w
            return bucket  # dense buckets already hold counts+1
        return None

    def distribution(self, ctx: Sequence[int]) -> QuantizedDistribution:
        self._check_ctx(ctx)
        w = self._weights_for(ctx)
        if w is None:
            return self._uniform
        return quantize_weights(w)

    def next_distribution(self) -> QuantizedDistribution:
        w = self._weights_for(self._ctx)
        if w is None:
            return self._uniform
        return quantize_weights(w)

    def observe(self, token: int) -> None:
        if not 0 <= token < self.vocab.size:
            raise ModelContractError(f"token {token} outside vocabulary")
        ctx = self._ctx
        n = len(ctx)
        for length in range(min(self.order - 1, n) + 1):
            key = tuple(ctx[n - length:]) if length else ()
            table = self._counts[length]
            bucket = table.get(key)
            if length <= 1:
                if bucket is None:
                    bucket = table[key] = np.ones(self.vocab.size, dtype=np.int64)
                bucket[token] += 1
            else:
                if bucket is None:
                    bucket = table[key] = {}
                bucket[token] = bucket.get(token, 0) + 1
        ctx.append(token)
        keep = self.order - 1
        if len(ctx) > keep:
            del ctx[: len(ctx) - keep]

    def next_raw_probs(self) -> np.ndarray:
        w = self._weights_for(self._ctx)
        if w is None:
            w = np.ones(self.vocab.size, dtype=np.int64)
        return w / w.sum()


def make_uniform_model(vocab: Vocabulary) -> UniformModel:
    return UniformModel(vocab)


def make_ngram_model(vocab: Vocabulary, order: int) -> NgramModel:
    return NgramModel(vocab, order)


#: Default alphabet for the built-in models: one token per byte plus EOS.
BYTE_VOCAB = Vocabulary(size=257, eos_id=256)


@dataclass
class ModelSpec:
    """A parsed model spec string: "uniform", "ngram:K", or "bridge:ENDPOINT".

    The verbatim spec text is the model's identity in containers and
    reports. `make()` returns a fresh per-stream instance; for bridge
    specs all instances share one lazily opened connection (requests on a
    connection are serialized, so bridge evaluation is sequential).
    """

    text: str
    kind: str
    order: Optional[int] = None
    endpoint: Optional[str] = None
    _connection: Optional[object] = field(default=None, repr=False, compare=False)

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        if text == "uniform":
            return cls(text=text, kind="uniform")
        if text.startswith("ngram:"):
            try:
                order = int(text[len("ngram:"):])
            except ValueError:
                raise InputError(f"bad ngram order in model spec {text!r}") from None
            if not 1 <= order <= NgramModel.MAX_ORDER:
                raise InputError(
                    f"ngram order must be in 1..{NgramModel.MAX_ORDER}, got {order}"
                )
            return cls(text=text, kind="ngram", order=order)
        if text.startswith("bridge:"):
            endpoint = text[len("bridge:"):]
            if not endpoint:
                raise InputError("bridge model spec has an empty endpoint")
            return cls(text=text, kind="bridge", endpoint=endpoint)
        raise InputError(
            f"unknown model spec {text!r}; expected uniform, ngram:K, or bridge:ENDPOINT"
        )

    def connection(self):
        if self.kind != "bridge":
            raise InputError(f"model spec {self.text!r} has no bridge connection")
        if self._connection is None:
            from .bridge import BridgeConnection

            self._connection = BridgeConnection.open(self.endpoint)
        return self._connection

    def vocabulary(self) -> Vocabulary:
        if self.kind == "bridge":
            return self.connection().vocabulary
        return BYTE_VOCAB

    def make(self) -> Model:
        if self.kind == "uniform":
            return UniformModel(BYTE_VOCAB)
        if self.kind == "ngram":
            return NgramModel(BYTE_VOCAB, self.order)
        from .bridge import BridgeModel

        return BridgeModel(self.connection())

    def close(self) -> None:
        if self._connection is not None:
            self._connection.close()
            self._connection = None
