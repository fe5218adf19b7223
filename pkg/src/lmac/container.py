"""The compressed container format.

Layout (bit-exact):

    magic "LMAC" | version 0x01 | tokenizer-id byte
    | model-spec length (2 bytes, big-endian) | model-spec UTF-8
    | original byte length (8 bytes, big-endian)
    | arithmetic-code payload, zero-padded to a byte boundary

Ratio computations use payload bits only; the header is bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coder import BitString
from .errors import ContainerFormatError

MAGIC = b"LMAC"
VERSION = 0x01


@dataclass(frozen=True)
class Container:
    model_spec: str
    tokenizer_id: int
    original_length: int
    payload: BitString


def pack(container: Container) -> bytes:
    spec_bytes = container.model_spec.encode("utf-8")
    if len(spec_bytes) > 0xFFFF:
        raise ContainerFormatError("model spec too long for the container header")
    if not 0 <= container.tokenizer_id <= 0xFF:
        raise ContainerFormatError(f"bad tokenizer id {container.tokenizer_id}")
    header = (
        MAGIC
        + bytes([VERSION, container.tokenizer_id])
        + len(spec_bytes).to_bytes(2, "big")
        + spec_bytes
        + container.original_length.to_bytes(8, "big")
    )
    return header + container.payload.data


def unpack(data: bytes) -> Container:
    if len(data) < 4 or data[:4] != MAGIC:
        raise ContainerFormatError("not a compressed container (bad magic)")
    if len(data) < 8:
        raise ContainerFormatError("truncated container header")
    version = data[4]
    if version != VERSION:
        raise ContainerFormatError(f"unsupported container version {version}")
    tokenizer_id = data[5]
    spec_len = int.from_bytes(data[6:8], "big")
    spec_end = 8 + spec_len
    if len(data) < spec_end + 8:
        raise ContainerFormatError("truncated container header")
    try:
        model_spec = data[8:spec_end].decode("utf-8")
    except UnicodeDecodeError as e:
        raise ContainerFormatError(f"model spec is not UTF-8: {e}") from None
    original_length = int.from_bytes(data[spec_end:spec_end + 8], "big")
    payload_bytes = data[spec_end + 8:]
    payload = BitString(payload_bytes, len(payload_bytes) * 8)
    return Container(
        model_spec=model_spec,
        tokenizer_id=tokenizer_id,
        original_length=original_length,
        payload=payload,
    )
