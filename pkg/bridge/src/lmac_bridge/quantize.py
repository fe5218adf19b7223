"""Fixed-point quantization of model probabilities.

Largest-remainder apportionment to a total of 2**16 with a floor of one
count per symbol: remainder ties break to the lower token id, and the
floor takes units from the largest bin (lowest probability first, then
highest id, among ties). Integers built this way are what cross the wire;
no floats ever do.
"""

import numpy as np

QUANT_TOTAL = 1 << 16


def quantize_probs(probs, total: int = QUANT_TOTAL) -> list[int]:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size < 1 or np.any(p < 0):
        raise ValueError("probs must be a non-negative 1-d vector")
    raw = (p / p.sum()) * total
    base = np.floor(raw).astype(np.int64)
    rem = raw - base
    leftover = total - int(base.sum())
    if leftover > 0:
        order = np.argsort(-rem, kind="stable")
        base[order[:leftover]] += 1
    for idx in np.flatnonzero(base == 0):
        base[idx] = 1
        top = np.flatnonzero(base == base.max())
        top = top[p[top] == p[top].min()]
        base[int(top[-1])] -= 1
    return [int(f) for f in base]
