"""Shared test scaffolding: tiny deterministic models and distributions."""

import numpy as np

from lmac.models import Model, QuantizedDistribution, Vocabulary, quantize, quantize_weights


def dist_from_freqs(freqs) -> QuantizedDistribution:
    return QuantizedDistribution(np.asarray(freqs, dtype=np.int64), total=int(np.sum(freqs)))


def dist_from_probs(probs) -> QuantizedDistribution:
    return quantize(probs)


class StaticModel(Model):
    """Same distribution at every step; vocabulary implied by its size."""

    def __init__(self, freqs, eos_id=None):
        self._dist = dist_from_freqs(freqs)
        size = self._dist.size
        self.vocab = Vocabulary(size=size, eos_id=size - 1 if eos_id is None else eos_id)
        self.model_id = "static"

    def distribution(self, ctx):
        return self._dist

    def next_distribution(self):
        return self._dist

    def observe(self, token):
        pass


class ScriptedModel(Model):
    """Plays a fixed sequence of distributions, then repeats the last one."""

    def __init__(self, dists, vocab: Vocabulary):
        self._dists = list(dists)
        self._step = 0
        self.vocab = vocab
        self.model_id = "scripted"

    def next_distribution(self):
        d = self._dists[min(self._step, len(self._dists) - 1)]
        self._step += 1
        return d

    def distribution(self, ctx):
        raise NotImplementedError("scripted models are stream-only")

    def observe(self, token):
        pass


def random_quantized(rng: np.random.Generator, size: int) -> QuantizedDistribution:
    """A random valid distribution via Dirichlet-ish weights."""
    probs = rng.dirichlet(np.ones(size))
    return quantize(probs)


def random_count_dist(rng: np.random.Generator, size: int, hi: int = 2000) -> QuantizedDistribution:
    return quantize_weights(rng.integers(1, hi, size=size).astype(np.int64))
