"""Client side of the bridge wire protocol.

A bridge is an external process serving a pretrained causal LM's
tokenizer and next-token distributions as newline-delimited JSON records,
one request/reply pair per line, over stdio or a local TCP socket.
Frequencies cross the wire as integers summing to 2**16 — never floats —
so encode and decode see bit-identical numbers.

Requests:  {"id": n, "op": "hello"}
           {"id": n, "op": "dist", "ctx": [...]}
           {"id": n, "op": "tok", "text": "..."}
           {"id": n, "op": "detok", "ids": [...]}
Replies carry "id", "ok", and the op-specific payload. Protocol version
string: "lmac-bridge/1".
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
from typing import Optional, Sequence

import numpy as np

from .errors import BridgeProtocolError, BridgeTransportError
from .models import QUANT_TOTAL, Model, QuantizedDistribution, Vocabulary

PROTOCOL_VERSION = "lmac-bridge/1"


class BridgeConnection:
    """One serialized request/reply channel to a bridge process.

    Requests on a connection are strictly sequential; open one connection
    per concurrent stream. `open()` performs the hello handshake, so a
    constructed connection always has a validated session descriptor.
    """

    def __init__(self, sender, receiver, closer=None):
        self._send = sender
        self._recv = receiver
        self._close = closer
        self._next_id = 0
        self.model_name: str = ""
        self.vocab_size: int = 0
        self.max_context: int = 0
        self.vocabulary: Optional[Vocabulary] = None
        self._hello()

    @classmethod
    def open(cls, endpoint: str) -> "BridgeConnection":
        """Connect to `endpoint`: "tcp:HOST:PORT", or a command line to spawn."""
        if endpoint.startswith("tcp:"):
            try:
                host, port = endpoint[4:].rsplit(":", 1)
                sock = socket.create_connection((host, int(port)), timeout=60)
            except (OSError, ValueError) as e:
                raise BridgeTransportError(f"cannot connect to {endpoint}: {e}") from e
            rfile = sock.makefile("r", encoding="utf-8", newline="\n")
            wfile = sock.makefile("w", encoding="utf-8", newline="\n")

            def close() -> None:
                rfile.close()
                wfile.close()
                sock.close()

            return cls(_line_sender(wfile), _line_receiver(rfile), close)

        argv = shlex.split(endpoint)
        if not argv:
            raise BridgeTransportError("empty bridge endpoint")
        try:
            proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as e:
            raise BridgeTransportError(f"cannot spawn bridge {argv[0]!r}: {e}") from e

        def close() -> None:
            try:
                proc.stdin.close()
                proc.wait(timeout=10)
            except Exception:
                proc.kill()

        return cls(_line_sender(proc.stdin), _line_receiver(proc.stdout), close)

    def _request(self, op: str, **payload) -> dict:
        self._next_id += 1
        req_id = self._next_id
        record = {"id": req_id, "op": op, **payload}
        try:
            self._send(json.dumps(record))
            line = self._recv()
        except (OSError, ValueError) as e:
            raise BridgeTransportError(f"bridge connection failed during {op!r}: {e}") from e
        if line is None:
            raise BridgeTransportError(f"bridge closed the connection during {op!r}")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as e:
            raise BridgeProtocolError(f"bridge reply is not valid JSON: {e}") from e
        if not isinstance(reply, dict) or reply.get("id") != req_id:
            raise BridgeProtocolError(
                f"reply id {reply.get('id')!r} does not match request id {req_id}"
            )
        if not reply.get("ok"):
            raise BridgeProtocolError(f"bridge error for {op!r}: {reply.get('error', 'unknown')}")
        return reply

    def _hello(self) -> None:
        reply = self._request("hello")
        try:
            self.model_name = str(reply["model"])
            self.vocab_size = int(reply["vocab_size"])
            self.max_context = int(reply["max_context"])
            eos = int(reply["eos"])
            version = reply["protocol"]
        except (KeyError, TypeError, ValueError) as e:
            raise BridgeProtocolError(f"malformed hello reply: {e}") from e
        if version != PROTOCOL_VERSION:
            raise BridgeProtocolError(f"unsupported bridge protocol {version!r}")
        if self.max_context < 1:
            raise BridgeProtocolError(f"bridge declared max_context {self.max_context}")
        self.vocabulary = Vocabulary(size=self.vocab_size, eos_id=eos)

    def dist(self, ctx: Sequence[int]) -> QuantizedDistribution:
        """Next-token frequencies for a context; validated before use."""
        reply = self._request("dist", ctx=list(ctx))
        freqs = reply.get("freqs")
        if not isinstance(freqs, list) or len(freqs) != self.vocab_size:
            raise BridgeProtocolError(
                f"freqs reply has length {len(freqs) if isinstance(freqs, list) else 'none'},"
                f" expected {self.vocab_size}"
            )
        if not all(isinstance(f, int) for f in freqs):
            raise BridgeProtocolError("freqs must be integers")
        arr = np.asarray(freqs, dtype=np.int64)
        if arr.min() < 1:
            raise BridgeProtocolError("freqs reply contains a zero count")
        if int(arr.sum()) != QUANT_TOTAL:
            raise BridgeProtocolError(
                f"freqs reply sums to {int(arr.sum())}, expected {QUANT_TOTAL}"
            )
        return QuantizedDistribution(arr, validate=False)

    def tokenize(self, text: str) -> tuple[list[int], bool]:
        reply = self._request("tok", text=text)
        ids = reply.get("ids")
        if not isinstance(ids, list) or not all(isinstance(i, int) for i in ids):
            raise BridgeProtocolError("tok reply has no integer id list")
        return ids, bool(reply.get("lossy", False))

    def detokenize(self, ids: Sequence[int]) -> str:
        reply = self._request("detok", ids=list(ids))
        text = reply.get("text")
        if not isinstance(text, str):
            raise BridgeProtocolError("detok reply has no text")
        return text

    def close(self) -> None:
        if self._close is not None:
            self._close()
            self._close = None

    def __enter__(self) -> "BridgeConnection":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _line_sender(stream):
    def send(line: str) -> None:
        stream.write(line + "\n")
        stream.flush()

    return send


def _line_receiver(stream):
    def recv() -> Optional[str]:
        line = stream.readline()
        return None if line == "" else line.rstrip("\n")

    return recv


class BridgeModel(Model):
    """Probability model forwarding contexts to a bridge connection.

    Keeps a local context window (trailing max_context tokens, matching
    the bridge's own truncation rule) and is single-stream like any other
    adaptive model. Exposes no raw probabilities: nothing but integers
    ever crosses the wire.
    """

    def __init__(self, connection: BridgeConnection):
        self._connection = connection
        self.vocab = connection.vocabulary
        self.model_id = f"bridge:{connection.model_name}"
        self._window = connection.max_context
        self._ctx: list[int] = [self.vocab.eos_id]

    def distribution(self, ctx: Sequence[int]) -> QuantizedDistribution:
        self._check_ctx(ctx)
        return self._connection.dist(list(ctx)[-self._window:])

    def next_distribution(self) -> QuantizedDistribution:
        return self._connection.dist(self._ctx)

    def observe(self, token: int) -> None:
        self._ctx.append(token)
        if len(self._ctx) > self._window:
            del self._ctx[: len(self._ctx) - self._window]
