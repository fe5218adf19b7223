"""Lossless text compression with autoregressive entropy models.

Any deterministic next-token predictor can drive the arithmetic coder;
the same per-token probabilities also price a stream without coding it,
which is what makes compression ratio a cheap model-evaluation metric.
"""

from .coder import BitString, decode_stream, encode_stream
from .corpus import CompressionReport, evaluate_model, load_chunks, ratio
from .errors import LmacError
from .estimator import cross_entropy, estimate_ratio, kl_divergence, nll_bits
from .models import (
    BYTE_VOCAB,
    ModelSpec,
    QuantizedDistribution,
    Vocabulary,
    make_ngram_model,
    make_uniform_model,
    quantize,
)
from .ranker import AccuracyTable, correlation_report, pearson, rank_models, spearman
from .tokenizers import TokenStream, byte_detokenize, byte_tokenize

__version__ = "0.1.0"

__all__ = [
    "AccuracyTable",
    "BitString",
    "BYTE_VOCAB",
    "CompressionReport",
    "LmacError",
    "ModelSpec",
    "QuantizedDistribution",
    "TokenStream",
    "Vocabulary",
    "byte_detokenize",
    "byte_tokenize",
    "correlation_report",
    "cross_entropy",
    "decode_stream",
    "encode_stream",
    "estimate_ratio",
    "evaluate_model",
    "kl_divergence",
    "load_chunks",
    "make_ngram_model",
    "make_uniform_model",
    "nll_bits",
    "pearson",
    "quantize",
    "rank_models",
    "ratio",
    "spearman",
]
