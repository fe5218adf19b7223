#!/usr/bin/env python3
"""Deterministic toy bridge server for client tests.

Serves the line-delimited JSON protocol over stdio with a 28-symbol
character model (a-z, space, EOS). The distribution is a rotation of the
near-uniform split keyed on the context, so it is context-sensitive but
trivially reproducible. Variants simulate protocol violations.
"""

import argparse
import json
import sys

ALPHABET = "abcdefghijklmnopqrstuvwxyz "
EOS_ID = len(ALPHABET)
V = len(ALPHABET) + 1
MAX_CONTEXT = 16
TOTAL = 1 << 16


def freqs_for(ctx):
    ctx = ctx[-MAX_CONTEXT:]
    base = TOTAL // V
    extra = TOTAL - base * V
    freqs = [base + (1 if i < extra else 0) for i in range(V)]
    shift = (sum(ctx) + len(ctx)) % V
    return freqs[-shift:] + freqs[:-shift] if shift else freqs


def handle(req, variant):
    op = req.get("op")
    if op == "hello":
        return {
            "model": "fake-lm",
            "vocab_size": V,
            "max_context": MAX_CONTEXT,
            "eos": EOS_ID,
            "protocol": "lmac-bridge/1",
        }
    if op == "dist":
        ctx = req.get("ctx", [])
        if not all(isinstance(t, int) and 0 <= t < V for t in ctx):
            return {"error": "bad-ids"}
        freqs = freqs_for(ctx)
        if variant == "bad-sum":
            freqs = freqs[:-1] + [freqs[-1] + 3]
        return {"freqs": freqs}
    if op == "tok":
        text = req.get("text", "")
        ids, lossy = [], variant == "lossy"
        for ch in text:
            idx = ALPHABET.find(ch)
            if idx < 0:
                lossy = True
                idx = 0
            ids.append(idx)
        return {"ids": ids, "lossy": lossy}
    if op == "detok":
        ids = req.get("ids", [])
        if not all(isinstance(i, int) and 0 <= i < len(ALPHABET) for i in ids):
            return {"error": "bad-ids"}
        return {"text": "".join(ALPHABET[i] for i in ids)}
    return {"error": "bad-op"}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--variant", default="good",
                        choices=["good", "bad-sum", "wrong-id", "lossy"])
    args = parser.parse_args()
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        payload = handle(req, args.variant)
        reply = {"id": req.get("id", 0), "ok": "error" not in payload, **payload}
        if args.variant == "wrong-id":
            reply["id"] = -1
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
