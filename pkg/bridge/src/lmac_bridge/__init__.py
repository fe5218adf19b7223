"""Deterministic next-token distribution server for a small pretrained
causal language model, speaking newline-delimited JSON over stdio."""

__version__ = "0.1.0"
