"""Compression length without compression.

The arithmetic code for a stream occupies within [-1, +2] bits of the
cumulative negative log probability of its tokens under the quantized
distributions the coder sees, so summing -log2(freq/total) along the
coding path prices a model without running the coder. The cross-entropy
and KL helpers give the distribution-level form of the same accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coder import iter_coding_steps
from .errors import InputError
from .models import Model

#: Ratios above this are reported as the cap; NLL this small on non-empty
#: input means the model is effectively asserting the text is certain.
RATIO_CAP = 1e4


@dataclass
class NllReport:
    """Per-token code lengths in bits along one coding path (EOS included)."""

    total_bits: float
    per_token_bits: list[float]
    tokens: list[int]
    token_count: int
    raw_total_bits: Optional[float] = None

    def tsv_lines(self):
        """Line-oriented serialization: index, token id, bits."""
        for i, (tok, bits) in enumerate(zip(self.tokens, self.per_token_bits)):
            yield f"{i}\t{tok}\t{bits:.6f}"


def nll_bits(model: Model, tokens: Sequence[int]) -> NllReport:
    """Sum -log2 of each token's quantized probability along the exact
    adaptation path the coder would take, terminal EOS included.

    Pre-quantization probabilities are accumulated as a diagnostic when
    the model exposes them; the headline number is always the quantized
    one, because that is what the coder pays.
    """
    per_token: list[float] = []
    seen: list[int] = []
    raw_total = 0.0
    have_raw = True
    for dist, tok in iter_coding_steps(model, tokens):
        per_token.append(dist.bits_for(tok))
        seen.append(tok)
        if have_raw:
            raw = model.next_raw_probs()
            if raw is None or raw[tok] <= 0.0:
                have_raw = False
            else:
                raw_total -= math.log2(float(raw[tok]))
    return NllReport(
        total_bits=float(sum(per_token)),
        per_token_bits=per_token,
        tokens=seen,
        token_count=len(per_token),
        raw_total_bits=raw_total if have_raw else None,
    )


def _check_reference(q: np.ndarray, name: str) -> None:
    if q.ndim != 1 or q.size < 1:
        raise InputError(f"{name} must be a non-empty 1-d distribution")
    if np.any(q < 0):
        raise InputError(f"{name} has negative entries")
    if abs(float(q.sum()) - 1.0) > 1e-9:
        raise InputError(f"{name} sums to {float(q.sum())}, expected 1 within 1e-9")


def cross_entropy(q: Sequence[float], p: Sequence[float]) -> float:
    """H(Q, P) = -sum q_i log2 p_i, in bits.

    Returns math.inf when P puts zero mass where Q does not: a reportable
    value, not an exception, so sweeps keep going.
    """
    qa = np.asarray(q, dtype=np.float64)
    pa = np.asarray(p, dtype=np.float64)
    if qa.shape != pa.shape:
        raise InputError("distributions must have the same length")
    _check_reference(qa, "q")
    _check_reference(pa, "p")
    support = qa > 0
    if np.any(pa[support] == 0):
        return math.inf
    return float(-(qa[support] * np.log2(pa[support])).sum())


def kl_divergence(q: Sequence[float], p: Sequence[float]) -> float:
    """D(Q || P) in bits, computed literally as H(Q,P) - H(Q,Q)."""
    return cross_entropy(q, p) - cross_entropy(q, q)


def estimate_ratio(model: Model, data: bytes, tokenizer) -> float:
    """Compression ratio of `data` by the NLL shortcut: 8*bytes / NLL bits.

    Capped at RATIO_CAP for reporting sanity on near-certain inputs.
    """
    if len(data) == 0:
        raise InputError("cannot estimate a ratio for empty input")
    stream = tokenizer.tokenize(data)
    report = nll_bits(model, stream.ids)
    return min(8.0 * len(data) / report.total_bits, RATIO_CAP)
