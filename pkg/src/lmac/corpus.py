"""Corpus chunking and per-model compression sweeps.

A text8-style corpus is split into fixed-word-count chunks; each chunk is
scored independently with a fresh model instance, either by actually
coding it or by the NLL estimate. Original size is 8 bits per UTF-8 byte
of the chunk string — the only model-independent reading — and coded
sizes count payload bits only, never container headers.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .coder import encode_stream
from .errors import InputError, TokenizerLossyError
from .estimator import nll_bits
from .models import ModelSpec
from .tokenizers import ByteTokenizer

MODE_CODED = "coded"
MODE_ESTIMATED = "estimated"
MODES = (MODE_CODED, MODE_ESTIMATED)


@dataclass(frozen=True)
class ChunkSet:
    """Equal-word-count chunks of one corpus, in corpus order."""

    chunks: tuple[str, ...]
    words_per_chunk: int
    source_digest: str

    @property
    def count(self) -> int:
        return len(self.chunks)


def load_chunks(
    source: str | Path,
    words_per_chunk: int = 200,
    max_chunks: int = 10000,
) -> ChunkSet:
    """Split a whitespace-delimited text file into word-count chunks.

    Consecutive groups of `words_per_chunk` words, joined by single
    spaces, become chunks; an incomplete trailing group is dropped and at
    most `max_chunks` chunks are kept, in order.
    """
    path = Path(source)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise InputError(f"cannot read corpus {path}: {e}") from e
    digest = hashlib.sha256(raw).hexdigest()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise InputError(f"corpus {path} is not UTF-8 text: {e}") from None
    words = text.split()
    if len(words) < words_per_chunk:
        raise InputError(
            f"corpus has {len(words)} words, fewer than one {words_per_chunk}-word chunk"
        )
    n_full = len(words) // words_per_chunk
    n_keep = min(n_full, max_chunks)
    chunks = tuple(
        " ".join(words[i * words_per_chunk:(i + 1) * words_per_chunk])
        for i in range(n_keep)
    )
    return ChunkSet(chunks=chunks, words_per_chunk=words_per_chunk, source_digest=digest)


def ratio(original_bits: float, compressed_bits: float) -> float:
    """original bits / compressed bits."""
    if original_bits <= 0:
        raise InputError(f"original size must be positive, got {original_bits}")
    if compressed_bits <= 0:
        raise InputError(f"compressed size must be positive, got {compressed_bits}")
    return original_bits / compressed_bits


@dataclass(frozen=True)
class ChunkResult:
    index: int
    original_bits: int
    compressed_bits: float


@dataclass
class CompressionReport:
    """Per-corpus compression outcome for one model and one mode."""

    model_id: str
    mode: str
    corpus_digest: str
    original_bits: int
    compressed_bits: float
    ratio: float
    chunks: list[ChunkResult]
    excluded: list[tuple[int, str]] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "model": self.model_id,
            "mode": self.mode,
            "corpus_digest": self.corpus_digest,
            "original_bits": self.original_bits,
            "compressed_bits": self.compressed_bits,
            "ratio": self.ratio,
            "chunks": [
                {
                    "index": c.index,
                    "original_bits": c.original_bits,
                    "compressed_bits": c.compressed_bits,
                }
                for c in self.chunks
            ],
            "excluded": [{"index": i, "reason": r} for i, r in self.excluded],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CompressionReport":
        try:
            return cls(
                model_id=doc["model"],
                mode=doc["mode"],
                corpus_digest=doc["corpus_digest"],
                original_bits=doc["original_bits"],
                compressed_bits=doc["compressed_bits"],
                ratio=doc["ratio"],
                chunks=[
                    ChunkResult(c["index"], c["original_bits"], c["compressed_bits"])
                    for c in doc["chunks"]
                ],
                excluded=[(e["index"], e["reason"]) for e in doc.get("excluded", [])],
            )
        except (KeyError, TypeError) as e:
            raise InputError(f"malformed compression report document: {e}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)

    def summary_lines(self) -> list[str]:
        lines = [
            f"model\t{self.model_id}",
            f"mode\t{self.mode}",
            f"corpus\t{self.corpus_digest}",
            f"chunks\t{len(self.chunks)}",
            f"original_bits\t{self.original_bits}",
            f"compressed_bits\t{self.compressed_bits:.3f}",
            f"ratio\t{self.ratio:.6f}",
        ]
        if self.excluded:
            lines.append(f"excluded_chunks\t{len(self.excluded)}")
        return lines


def _score_chunk(spec_text: str, chunk: str, mode: str) -> tuple[int, float]:
    """(original_bits, compressed_bits) for one chunk with a fresh model."""
    spec = ModelSpec.parse(spec_text)
    data = chunk.encode("utf-8")
    stream = ByteTokenizer().tokenize(data)
    model = spec.make()
    if mode == MODE_CODED:
        compressed = float(encode_stream(model, stream.ids).bit_length)
    else:
        compressed = nll_bits(model, stream.ids).total_bits
    return 8 * len(data), compressed


def evaluate_model(
    spec: ModelSpec,
    chunks: ChunkSet,
    mode: str = MODE_ESTIMATED,
    tokenizer=None,
    jobs: int = 1,
) -> CompressionReport:
    """Score every chunk independently and assemble the report.

    Each chunk gets a fresh adaptive-model instance, so chunk results do
    not depend on evaluation order and built-in models may run in
    parallel. A lossy-tokenizer chunk is excluded and recorded; any other
    per-chunk failure aborts the whole report, annotated with the chunk
    index, because a partial report is not a valid report.
    """
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}, got {mode!r}")
    if chunks.count == 0:
        raise InputError("cannot evaluate an empty chunk set")

    results: list[Optional[ChunkResult]] = [None] * chunks.count
    excluded: list[tuple[int, str]] = []

    if spec.kind != "bridge" and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scored = pool.map(
                _score_chunk,
                [spec.text] * chunks.count,
                chunks.chunks,
                [mode] * chunks.count,
                chunksize=8,
            )
            for i, (orig, comp) in enumerate(scored):
                results[i] = ChunkResult(i, orig, comp)
    else:
        if tokenizer is None:
            tokenizer = ByteTokenizer()
        for i, chunk in enumerate(chunks.chunks):
            data = chunk.encode("utf-8")
            try:
                stream = tokenizer.tokenize(data)
                model = spec.make()
                if mode == MODE_CODED:
                    compressed = float(encode_stream(model, stream.ids).bit_length)
                else:
                    compressed = nll_bits(model, stream.ids).total_bits
            except TokenizerLossyError as e:
                excluded.append((i, str(e)))
                continue
            except Exception as e:
                raise type(e)(f"chunk {i}: {e}") from e
            results[i] = ChunkResult(i, 8 * len(data), compressed)

    kept = [r for r in results if r is not None]
    if not kept:
        raise InputError("every chunk was excluded; nothing to report")
    total_orig = sum(r.original_bits for r in kept)
    total_comp = sum(r.compressed_bits for r in kept)
    return CompressionReport(
        model_id=spec.text,
        mode=mode,
        corpus_digest=chunks.source_digest,
        original_bits=total_orig,
        compressed_bits=total_comp,
        ratio=ratio(total_orig, total_comp),
        chunks=kept,
        excluded=excluded,
    )
