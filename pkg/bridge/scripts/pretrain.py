#!/usr/bin/env python3
"""Pretrain the tiny character LM served by the bridge.

The training source is an order-3 character Markov chain fitted on the
seed prose, which yields unbounded English-like text with stable
statistics. Training text is arranged exactly like coding streams:
EOS + ~200-word chunk + EOS, repeated. A held-out sample from the same
source becomes the evaluation corpus fixture.

Fully seeded; rerunning reproduces the shipped fixtures bit-for-bit on
the same torch build with the same thread count (pinned below).
"""

import argparse
import math
import sys
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from lmac_bridge.model import TinyCharLM, bits_per_char, save_model  # noqa: E402
from lmac_bridge.vocab import ALPHABET, CHAR_TO_ID, EOS_ID  # noqa: E402

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "fixtures"

MARKOV_ORDER = 3
CHUNK_WORDS = 200


class MarkovSource:
    """Order-3 character chain over a-z and space."""

    def __init__(self, seed_text: str, rng: np.random.Generator):
        self.rng = rng
        chars = " ".join(seed_text.split())
        n_sym = len(ALPHABET)
        self.tables: dict[tuple, np.ndarray] = {}
        ids = [CHAR_TO_ID[c] for c in chars]
        for i in range(len(ids) - MARKOV_ORDER):
            key = tuple(ids[i:i + MARKOV_ORDER])
            table = self.tables.get(key)
            if table is None:
                table = self.tables[key] = np.zeros(n_sym, dtype=np.float64)
            table[ids[i + MARKOV_ORDER]] += 1
        self.probs = {k: v / v.sum() for k, v in self.tables.items()}
        self.keys = list(self.probs)

    def sample_chars(self, n: int) -> str:
        state = list(self.keys[int(self.rng.integers(0, len(self.keys)))])
        out = []
        for _ in range(n):
            p = self.probs.get(tuple(state[-MARKOV_ORDER:]))
            if p is None:
                state = list(self.keys[int(self.rng.integers(0, len(self.keys)))])
                p = self.probs[tuple(state)]
            nxt = int(self.rng.choice(len(ALPHABET), p=p))
            out.append(ALPHABET[nxt])
            state.append(nxt)
        return "".join(out)

    def sample_words(self, n_words: int) -> list[str]:
        words: list[str] = []
        while len(words) < n_words:
            words.extend(self.sample_chars(200_000).split())
        return words[:n_words]


def stream_ids(words: list[str]) -> np.ndarray:
    """EOS + chunk + EOS framing, exactly as coding streams look."""
    ids: list[int] = []
    for start in range(0, len(words) - CHUNK_WORDS + 1, CHUNK_WORDS):
        chunk = " ".join(words[start:start + CHUNK_WORDS])
        ids.append(EOS_ID)
        ids.extend(CHAR_TO_ID[c] for c in chunk)
        ids.append(EOS_ID)
    return np.asarray(ids, dtype=np.int64)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=1500)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--train-words", type=int, default=360_000)
    parser.add_argument("--eval-words", type=int, default=12_000)
    parser.add_argument("--out", default=str(FIXTURES / "tiny_lm.pt"))
    args = parser.parse_args()

    torch.set_num_threads(4)  # pinned: exact reproduction needs this count
    torch.manual_seed(1234)
    rng = np.random.default_rng(20240615)

    seed_text = (FIXTURES / "seed_prose.txt").read_text(encoding="utf-8")
    source = MarkovSource(seed_text, rng)

    print("sampling training corpus ...", flush=True)
    train_ids = stream_ids(source.sample_words(args.train_words))
    eval_words = source.sample_words(args.eval_words)
    (FIXTURES / "eval_corpus.txt").write_text(" ".join(eval_words), encoding="utf-8")
    held_out = stream_ids(eval_words[:2000])
    print(f"train stream: {train_ids.size} tokens", flush=True)

    model = TinyCharLM()
    n_params = sum(p.numel() for p in model.parameters())
    print(f"model parameters: {n_params}", flush=True)
    opt = torch.optim.AdamW(model.parameters(), lr=1.5e-3, weight_decay=0.01)
    seq = model.config["max_context"]
    warmup = 50

    data = torch.from_numpy(train_ids)
    batch_rng = np.random.default_rng(777)
    model.train()
    for step in range(1, args.steps + 1):
        lr = 1.5e-3 * min(step / warmup, 1.0)
        lr *= 0.5 * (1 + math.cos(math.pi * max(step - warmup, 0) / (args.steps - warmup)))
        for group in opt.param_groups:
            group["lr"] = lr
        starts = batch_rng.integers(0, data.shape[0] - seq - 1, size=args.batch)
        batch = torch.stack([data[s:s + seq + 1] for s in starts])
        logits = model(batch[:, :-1])
        loss = F.cross_entropy(logits.reshape(-1, logits.shape[-1]), batch[:, 1:].reshape(-1))
        opt.zero_grad()
        loss.backward()
        opt.step()
        if step % 100 == 0 or step == 1:
            print(f"step {step:5d} lr {lr:.2e} loss {float(loss) / math.log(2):.3f} bits/char",
                  flush=True)

    model.eval()
    probe = torch.from_numpy(held_out[: seq * 60])
    total = 0.0
    count = 0
    for s in range(0, probe.shape[0] - seq - 1, seq):
        total += bits_per_char(model, probe[s:s + seq + 1]) * seq
        count += seq
    print(f"held-out: {total / count:.3f} bits/char", flush=True)
    save_model(model, args.out)
    print(f"saved {args.out}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
