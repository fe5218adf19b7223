"""Bridge wire-protocol client against a deterministic fake server."""

import json
import pathlib
import socket
import socketserver
import subprocess
import sys
import threading

import pytest

import fake_bridge
from lmac.bridge import BridgeConnection, BridgeModel
from lmac.coder import decode_stream, encode_stream
from lmac.errors import BridgeProtocolError, BridgeTransportError, TokenizerLossyError
from lmac.models import ModelSpec
from lmac.tokenizers import BridgeTokenizer, bridge_tokenize

FAKE = pathlib.Path(__file__).parent / "fake_bridge.py"


def endpoint(variant="good") -> str:
    cmd = f"{sys.executable} {FAKE}"
    return cmd if variant == "good" else f"{cmd} --variant {variant}"


class TestHandshake:
    def test_session_descriptor(self):
        with BridgeConnection.open(endpoint()) as conn:
            assert conn.model_name == "fake-lm"
            assert conn.vocab_size == 28
            assert conn.max_context == 16
            assert conn.vocabulary.eos_id == 27

    def test_dead_endpoint_is_transport_error(self):
        with pytest.raises(BridgeTransportError):
            BridgeConnection.open(f"{sys.executable} -c pass")

    def test_unknown_command_is_transport_error(self):
        with pytest.raises(BridgeTransportError):
            BridgeConnection.open("definitely-not-a-binary-zz")


class TestProtocolValidation:
    def test_dist_contract(self):
        with BridgeConnection.open(endpoint()) as conn:
            d = conn.dist([0, 1, 2])
            assert d.size == 28
            assert int(d.freqs.sum()) == 1 << 16
            assert d.freqs.min() >= 1

    def test_same_context_identical(self):
        with BridgeConnection.open(endpoint()) as conn:
            a = conn.dist([3, 4])
            b = conn.dist([3, 4])
            assert a == b

    def test_bad_sum_rejected(self):
        with BridgeConnection.open(endpoint("bad-sum")) as conn:
            with pytest.raises(BridgeProtocolError, match="sums"):
                conn.dist([0])

    def test_wrong_reply_id_rejected(self):
        with pytest.raises(BridgeProtocolError, match="id"):
            BridgeConnection.open(endpoint("wrong-id"))

    def test_unknown_op_error_reply(self):
        with BridgeConnection.open(endpoint()) as conn:
            with pytest.raises(BridgeProtocolError, match="bad-op"):
                conn._request("nope")


class TestBridgeTokenizer:
    def test_round_trip(self):
        with BridgeConnection.open(endpoint()) as conn:
            tok = BridgeTokenizer(conn)
            stream = tok.tokenize(b"hello world")
            assert tok.detokenize(stream) == b"hello world"

    def test_empty(self):
        with BridgeConnection.open(endpoint()) as conn:
            assert bridge_tokenize(conn, "").ids == []

    def test_lossy_reported(self):
        with BridgeConnection.open(endpoint("lossy")) as conn:
            with pytest.raises(TokenizerLossyError):
                bridge_tokenize(conn, "hello")

    def test_unmappable_text_flagged(self):
        with BridgeConnection.open(endpoint()) as conn:
            with pytest.raises(TokenizerLossyError):
                bridge_tokenize(conn, "UPPER case")


class TestBridgeModel:
    def test_behaves_like_its_distributions(self):
        with BridgeConnection.open(endpoint()) as conn:
            model = BridgeModel(conn)
            d0 = model.next_distribution()
            assert list(d0.freqs) == fake_bridge.freqs_for([27])
            model.observe(4)
            assert list(model.next_distribution().freqs) == fake_bridge.freqs_for([27, 4])

    def test_stream_round_trip_across_fresh_processes(self):
        text = "the quick brown fox jumps over the lazy dog"
        with BridgeConnection.open(endpoint()) as conn:
            ids = bridge_tokenize(conn, text).ids
            bits = encode_stream(BridgeModel(conn), ids)
        with BridgeConnection.open(endpoint()) as conn2:
            out = decode_stream(BridgeModel(conn2), bits)
            assert conn2.detokenize(out) == text

    def test_replay_is_byte_identical(self):
        text = "compression is prediction plus arithmetic"

        def run():
            with BridgeConnection.open(endpoint()) as conn:
                ids = bridge_tokenize(conn, text).ids
                return encode_stream(BridgeModel(conn), ids).data

        assert run() == run()

    def test_model_spec_integration(self):
        spec = ModelSpec.parse(f"bridge:{endpoint()}")
        try:
            vocab = spec.vocabulary()
            assert vocab.size == 28
            model = spec.make()
            assert model.model_id == "bridge:fake-lm"
        finally:
            spec.close()


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            req = json.loads(raw.decode("utf-8"))
            payload = fake_bridge.handle(req, "good")
            reply = {"id": req.get("id", 0), "ok": "error" not in payload, **payload}
            self.wfile.write((json.dumps(reply) + "\n").encode("utf-8"))
            self.wfile.flush()


class TestTcpEndpoint:
    def test_socket_transport(self):
        server = socketserver.ThreadingTCPServer(("127.0.0.1", 0), _LineHandler)
        port = server.server_address[1]
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            with BridgeConnection.open(f"tcp:127.0.0.1:{port}") as conn:
                assert conn.model_name == "fake-lm"
                d = conn.dist([1, 2, 3])
                assert int(d.freqs.sum()) == 1 << 16
        finally:
            server.shutdown()
            server.server_close()

    def test_unreachable_socket(self):
        with pytest.raises(BridgeTransportError):
            BridgeConnection.open("tcp:127.0.0.1:1")
