"""Operation counting for cost accounting.

The harness binds a per-party counter around each protocol step; every
public crypto-suite call then increments exactly one counter (the innermost
active one).  Internal arithmetic (curve ops inside signatures, key
derivation inside AEAD) never reaches these counters, matching the
cost-table convention that a signature is one operation, not a hash plus
point multiplications.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field, fields


@dataclass
class OpCounts:
    """Primitive-operation tallies for one party during one run.

    `xor`..`vsign` mirror the comparison-table columns; `kdf`, `mac` and
    `vcert` are bookkeeping for operations the tables do not itemize
    (point-to-key derivation, keyed MACs, certificate checks).
    """

    xor: int = 0
    hash: int = 0
    mul: int = 0
    mul_pre: int = 0  # subset of mul that is message-independent
    esym: int = 0
    dsym: int = 0
    gsign: int = 0
    vsign: int = 0
    kdf: int = 0
    mac: int = 0
    vcert: int = 0

    def add(self, other: "OpCounts") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def total(self) -> int:
        return sum(getattr(self, f.name) for f in fields(self) if f.name != "mul_pre")


@dataclass
class _CounterState:
    stack: list[OpCounts] = field(default_factory=list)
    unattributed: int = 0


_state: contextvars.ContextVar[_CounterState | None] = contextvars.ContextVar(
    "roamauth_opcounts", default=None
)


def _get_state() -> _CounterState:
    st = _state.get()
    if st is None:
        st = _CounterState()
        _state.set(st)
    return st


@contextlib.contextmanager
def counting(counter: OpCounts):
    """Attribute suite operations to `counter` within the block."""
    st = _get_state()
    st.stack.append(counter)
    try:
        yield counter
    finally:
        st.stack.pop()


def record(op: str, *, pre: bool = False) -> None:
    st = _get_state()
    if not st.stack:
        st.unattributed += 1
        return
    counter = st.stack[-1]
    setattr(counter, op, getattr(counter, op) + 1)
    if op == "mul" and pre:
        counter.mul_pre += 1


def reset_unattributed() -> None:
    _get_state().unattributed = 0


def unattributed_ops() -> int:
    return _get_state().unattributed
