"""Message framing and nominal size accounting.

Wire format per message: kind(1 byte) || canonically encoded field list
(see encoding.py).  Each message class declares its cost profile as a tuple
of parameter kinds; the nominal bit widths follow the standard accounting
for this protocol family (group element 1024, identity 160, hash 160,
random number 128, symmetric/asymmetric encryption block 1024) regardless
of the actual curve encoding in use.
"""

from __future__ import annotations

from typing import ClassVar, Protocol, runtime_checkable

from .curve import CurveParams
from .encoding import EncodingError, decode_concat, encode_concat

# Nominal per-field widths in bits.
PARAM_BITS: dict[str, int] = {
    "point": 1024,
    "identity": 160,
    "hash": 160,
    "nonce": 128,
    "sym": 1024,
    "sig": 1024,
}


@runtime_checkable
class WireMessage(Protocol):
    KIND: ClassVar[str]
    COST_FIELDS: ClassVar[tuple[str, ...]]

    def wire_fields(self, cp: CurveParams) -> list: ...


_REGISTRY: dict[str, type] = {}
_KIND_IDS: dict[str, int] = {}


def register_message(cls: type) -> type:
    """Class decorator: make a message serializable and give it a kind id."""
    kind = cls.KIND
    if kind in _REGISTRY:
        raise ValueError(f"duplicate message kind {kind!r}")
    _REGISTRY[kind] = cls
    _KIND_IDS[kind] = len(_KIND_IDS) + 1
    return cls


def nominal_bits(msg: WireMessage) -> int:
    return sum(PARAM_BITS[k] for k in msg.COST_FIELDS)


def serialize(cp: CurveParams, msg: WireMessage) -> bytes:
    return bytes([_KIND_IDS[msg.KIND]]) + encode_concat(msg.wire_fields(cp), cp)


def deserialize(cp: CurveParams, data: bytes):
    if not data:
        raise EncodingError("empty message")
    kind_id = data[0]
    for kind, kid in _KIND_IDS.items():
        if kid == kind_id:
            cls = _REGISTRY[kind]
            return cls.from_wire(decode_concat(data[1:]), cp)
    raise EncodingError(f"unknown message kind id {kind_id}")
