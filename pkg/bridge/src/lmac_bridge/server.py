"""Line-delimited JSON server over stdio.

One request per line, one reply per line, strictly in order. Replies echo
the request id and carry an "ok" flag; distribution replies are integer
frequency arrays summing to 2**16. Protocol version "lmac-bridge/1".

Determinism is non-negotiable: the model runs in eval mode under
no_grad with a single torch thread, and the process refuses to start if
the weights cannot be loaded into that configuration.
"""

from __future__ import annotations

import json
import sys

import torch

from .model import TinyCharLM, load_model
from .quantize import QUANT_TOTAL, quantize_probs
from .vocab import ALPHABET, EOS_ID, VOCAB_SIZE, decode_ids, encode_text

PROTOCOL_VERSION = "lmac-bridge/1"
MODEL_NAME = "tiny-char-gpt"


class BridgeServer:
    def __init__(self, model: TinyCharLM):
        self.model = model
        self.max_context = model.config["max_context"]

    def handle(self, req: dict) -> dict:
        op = req.get("op")
        if op == "hello":
            return {
                "model": MODEL_NAME,
                "vocab_size": VOCAB_SIZE,
                "max_context": self.max_context,
                "eos": EOS_ID,
                "protocol": PROTOCOL_VERSION,
            }
        if op == "dist":
            ctx = req.get("ctx")
            if not isinstance(ctx, list) or len(ctx) < 1:
                return {"error": "empty-ctx"}
            if not all(isinstance(t, int) and 0 <= t < VOCAB_SIZE for t in ctx):
                return {"error": "bad-ids"}
            probs = self.model.next_token_probs(ctx)  # trailing-window truncation
            freqs = quantize_probs(probs.numpy())
            assert sum(freqs) == QUANT_TOTAL and min(freqs) >= 1
            return {"freqs": freqs}
        if op == "tok":
            text = req.get("text")
            if not isinstance(text, str):
                return {"error": "bad-text"}
            ids, lossy = encode_text(text)
            return {"ids": ids, "lossy": lossy}
        if op == "detok":
            ids = req.get("ids")
            if not isinstance(ids, list) or not all(
                isinstance(i, int) and 0 <= i < len(ALPHABET) for i in ids
            ):
                return {"error": "bad-ids"}
            return {"text": decode_ids(ids)}
        return {"error": "bad-op"}


def serve(weights_path: str, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    torch.set_num_threads(1)
    torch.manual_seed(0)
    try:
        model = load_model(weights_path)
        model.eval()
        for p in model.parameters():
            p.requires_grad_(False)
    except Exception as e:
        print(f"lmac-bridge: cannot load model weights: {e}", file=sys.stderr)
        return 1
    server = BridgeServer(model)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
        except json.JSONDecodeError:
            stdout.write(json.dumps({"id": -1, "ok": False, "error": "bad-json"}) + "\n")
            stdout.flush()
            continue
        payload = server.handle(req)
        reply = {"id": req.get("id", -1), "ok": "error" not in payload, **payload}
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()
    return 0
