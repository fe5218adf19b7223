"""A small causal transformer over the character vocabulary.

Pre-norm GPT-style blocks with learned positional embeddings. Inference
is always full-context in float32 with a fixed thread count: no KV cache,
no autocast, nothing whose numeric path could differ between a cold and a
warm process. That is what makes the served distributions reproducible
across restarts.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from .vocab import VOCAB_SIZE

DEFAULT_CONFIG = {
    "vocab_size": VOCAB_SIZE,
    "max_context": 128,
    "d_model": 96,
    "n_head": 4,
    "n_layer": 2,
    "d_ff": 256,
}


class Block(nn.Module):
    def __init__(self, d_model: int, n_head: int, d_ff: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(d_model)
        self.attn = nn.MultiheadAttention(d_model, n_head, batch_first=True)
        self.ln2 = nn.LayerNorm(d_model)
        self.mlp = nn.Sequential(
            nn.Linear(d_model, d_ff),
            nn.GELU(),
            nn.Linear(d_ff, d_model),
        )

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        h = self.ln1(x)
        attn_out, _ = self.attn(h, h, h, attn_mask=mask, need_weights=False)
        x = x + attn_out
        return x + self.mlp(self.ln2(x))


class TinyCharLM(nn.Module):
    def __init__(self, config: dict | None = None):
        super().__init__()
        self.config = dict(DEFAULT_CONFIG, **(config or {}))
        c = self.config
        self.tok_emb = nn.Embedding(c["vocab_size"], c["d_model"])
        self.pos_emb = nn.Embedding(c["max_context"], c["d_model"])
        self.blocks = nn.ModuleList(
            Block(c["d_model"], c["n_head"], c["d_ff"]) for _ in range(c["n_layer"])
        )
        self.ln_f = nn.LayerNorm(c["d_model"])
        self.head = nn.Linear(c["d_model"], c["vocab_size"], bias=False)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        n = ids.shape[-1]
        pos = torch.arange(n, device=ids.device)
        x = self.tok_emb(ids) + self.pos_emb(pos)
        mask = torch.full((n, n), float("-inf"), device=ids.device).triu(1)
        for block in self.blocks:
            x = block(x, mask)
        return self.head(self.ln_f(x))

    @torch.no_grad()
    def next_token_probs(self, ids: list[int]) -> torch.Tensor:
        """Distribution for the position after `ids` (trailing window)."""
        window = ids[-self.config["max_context"]:]
        logits = self.forward(torch.tensor([window], dtype=torch.long))[0, -1]
        return F.softmax(logits.double(), dim=-1)


def save_model(model: TinyCharLM, path: str) -> None:
    torch.save({"config": model.config, "state_dict": model.state_dict()}, path)


def load_model(path: str) -> TinyCharLM:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    model = TinyCharLM(blob["config"])
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model


def bits_per_char(model: TinyCharLM, ids: torch.Tensor) -> float:
    """Mean NLL in bits of ids[1:] given ids[:-1] (teacher-forced)."""
    with torch.no_grad():
        logits = model(ids[None, :-1])
        loss = F.cross_entropy(logits[0], ids[1:])
    return float(loss) / math.log(2)
