"""Container format: bit-exact pack/unpack and corruption detection."""

import pytest

from lmac.coder import BitString
from lmac.container import MAGIC, Container, pack, unpack
from lmac.errors import ContainerFormatError


def sample(payload_bits=b"\xa5\x10", model="ngram:3", tokenizer=0x00, length=1234):
    return Container(
        model_spec=model,
        tokenizer_id=tokenizer,
        original_length=length,
        payload=BitString(payload_bits, len(payload_bits) * 8),
    )


class TestPackUnpack:
    def test_round_trip(self):
        doc = pack(sample())
        back = unpack(doc)
        assert back.model_spec == "ngram:3"
        assert back.tokenizer_id == 0x00
        assert back.original_length == 1234
        assert back.payload.data == b"\xa5\x10"

    def test_header_layout(self):
        doc = pack(sample(model="uniform", length=7))
        assert doc[:4] == MAGIC
        assert doc[4] == 0x01  # version
        assert doc[5] == 0x00  # tokenizer id
        assert int.from_bytes(doc[6:8], "big") == len(b"uniform")
        assert doc[8:15] == b"uniform"
        assert int.from_bytes(doc[15:23], "big") == 7

    def test_empty_payload(self):
        back = unpack(pack(sample(payload_bits=b"", length=0)))
        assert back.payload.bit_length == 0

    def test_unicode_model_spec(self):
        back = unpack(pack(sample(model="bridge:π server")))
        assert back.model_spec == "bridge:π server"


class TestCorruption:
    def test_bad_magic(self):
        with pytest.raises(ContainerFormatError):
            unpack(b"NOPE" + b"\x00" * 20)

    def test_bad_version(self):
        doc = bytearray(pack(sample()))
        doc[4] = 0x02
        with pytest.raises(ContainerFormatError):
            unpack(bytes(doc))

    def test_truncated_header(self):
        doc = pack(sample())
        with pytest.raises(ContainerFormatError):
            unpack(doc[:6])
        with pytest.raises(ContainerFormatError):
            unpack(doc[:10])

    def test_model_spec_too_long(self):
        with pytest.raises(ContainerFormatError):
            pack(sample(model="x" * 70000))
