"""Transactions, outputs and output references.

A transaction is identified by the SHA-256 digest of its canonical binary
encoding. The encoding is length-prefixed, big-endian and follows field
declaration order, so identical transactions hash identically across runs
and processes.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Any

U32_MAX = 2**32 - 1
U64_MAX = 2**64 - 1

TxId = str  # 64 lowercase hex chars; hex order equals byte order


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class TxSyntaxError(ValueError):
    """A transaction violates a structural rule.

    ``kind`` is one of ``duplicate_input``, ``empty_outputs``, ``zero_value``,
    ``overflow`` or ``missing_unlock``.
    """

    KINDS = ("duplicate_input", "empty_outputs", "zero_value", "overflow", "missing_unlock")

    def __init__(self, kind: str, detail: str = ""):
        assert kind in self.KINDS, kind
        self.kind = kind
        super().__init__(f"{kind}: {detail}" if detail else kind)


@dataclass(frozen=True, order=True)
class OutputRef:
    tx_id: TxId
    index: int

    def to_json(self) -> dict[str, Any]:
        return {"tx": self.tx_id, "index": self.index}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> OutputRef:
        return cls(str(obj["tx"]).lower(), int(obj["index"]))


@dataclass(frozen=True)
class Output:
    value: int
    condition: bytes = b""

    def to_json(self) -> dict[str, Any]:
        return {"value": self.value, "condition": self.condition.hex()}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Output:
        return cls(int(obj["value"]), bytes.fromhex(obj.get("condition", "")))


@dataclass(frozen=True)
class Transaction:
    inputs: tuple[OutputRef, ...]
    outputs: tuple[Output, ...]
    unlock: bytes = b""
    timestamp: int = 0

    def __post_init__(self):
        # accept lists from callers, store tuples so instances stay hashable
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    @cached_property
    def id(self) -> TxId:
        return transaction_id(self)

    @property
    def is_genesis(self) -> bool:
        return not self.inputs

    def output_ref(self, index: int) -> OutputRef:
        return OutputRef(self.id, index)

    def output_refs(self) -> list[OutputRef]:
        return [OutputRef(self.id, i) for i in range(len(self.outputs))]

    def output_sum(self) -> int:
        return sum(o.value for o in self.outputs)

    def to_json(self) -> dict[str, Any]:
        return {
            "inputs": [i.to_json() for i in self.inputs],
            "outputs": [o.to_json() for o in self.outputs],
            "unlock": self.unlock.hex(),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Transaction:
        return cls(
            inputs=tuple(OutputRef.from_json(i) for i in obj.get("inputs", [])),
            outputs=tuple(Output.from_json(o) for o in obj["outputs"]),
            unlock=bytes.fromhex(obj.get("unlock", "")),
            timestamp=int(obj.get("timestamp", 0)),
        )


def _blob(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def canonical_encode(tx: Transaction) -> bytes:
    parts = [struct.pack(">I", len(tx.inputs))]
    for ref in tx.inputs:
        parts.append(bytes.fromhex(ref.tx_id))
        parts.append(struct.pack(">I", ref.index))
    parts.append(struct.pack(">I", len(tx.outputs)))
    for out in tx.outputs:
        parts.append(struct.pack(">Q", out.value))
        parts.append(_blob(out.condition))
    parts.append(_blob(tx.unlock))
    parts.append(struct.pack(">Q", tx.timestamp))
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ValueError("truncated transaction encoding")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())


def canonical_decode(data: bytes) -> Transaction:
    r = _Reader(data)
    inputs = []
    for _ in range(r.u32()):
        tx_id = r.take(32).hex()
        inputs.append(OutputRef(tx_id, r.u32()))
    outputs = []
    for _ in range(r.u32()):
        value = r.u64()
        outputs.append(Output(value, r.blob()))
    unlock = r.blob()
    timestamp = r.u64()
    if r.pos != len(data):
        raise ValueError("trailing bytes after transaction encoding")
    return Transaction(tuple(inputs), tuple(outputs), unlock, timestamp)


def transaction_id(tx: Transaction) -> TxId:
    return sha256_hex(canonical_encode(tx))


def validate_syntax(tx: Transaction) -> None:
    """Raise :class:`TxSyntaxError` unless ``tx`` is structurally valid.

    Value balance needs the consumed outputs and is checked by the ledger.
    """
    if len(set(tx.inputs)) != len(tx.inputs):
        raise TxSyntaxError("duplicate_input")
    if not tx.outputs:
        raise TxSyntaxError("empty_outputs")
    total = 0
    for i, out in enumerate(tx.outputs):
        if out.value <= 0:
            raise TxSyntaxError("zero_value", f"output {i}")
        total += out.value
        if out.value > U64_MAX or total > U64_MAX:
            raise TxSyntaxError("overflow", f"output {i}")
    for ref in tx.inputs:
        if len(ref.tx_id) != 64 or not 0 <= ref.index <= U32_MAX:
            raise ValueError(f"malformed output reference {ref}")
    if tx.inputs and not tx.unlock:
        raise TxSyntaxError("missing_unlock")
    if not 0 <= tx.timestamp <= U64_MAX:
        raise TxSyntaxError("overflow", "timestamp")


def make_genesis(outputs: list[Output], timestamp: int = 0) -> Transaction:
    if not outputs:
        raise ValueError("genesis needs at least one output")
    tx = Transaction((), tuple(outputs), b"", timestamp)
    validate_syntax(tx)
    return tx
