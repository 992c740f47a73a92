"""The ledger DAG: an append-only store of possibly conflicting transactions.

Each stored transaction carries a label set, the conflicts found in its past
cone (itself included). Label sets are inherited from parents on insertion
and pushed through the future cone when an existing transaction becomes a
conflict. Transactions referencing outputs that have not arrived yet wait in
a bounded pending buffer and are retried when their parents show up.
"""

from __future__ import annotations

import enum
import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .conflicts import ConflictStructures
from .tx import Output, OutputRef, Transaction, TxId, validate_syntax

log = logging.getLogger(__name__)

BOT = None  # the label of every non-conflict, and of the genesis


class AddStatus(enum.Enum):
    ADDED = "added"
    ADDED_AS_CONFLICT = "added_as_conflict"
    BUFFERED = "buffered"
    REJECTED = "rejected"
    DUPLICATE = "duplicate"


class RejectReason(enum.Enum):
    PAST_CONE_DOUBLE_SPEND = "past_cone_double_spend"
    VALUE_IMBALANCE = "value_imbalance"
    UNLOCK_FAILURE = "unlock_failure"
    UNKNOWN_OUTPUT = "unknown_output"
    PARENT_REJECTED = "parent_rejected"
    PRUNED = "pruned"


@dataclass
class AddResult:
    status: AddStatus
    tx_id: TxId
    directly_conflicting: frozenset[TxId] = frozenset()
    reason: RejectReason | None = None
    # outcomes of buffered transactions this arrival unblocked
    released: list[AddResult] = field(default_factory=list)

    @property
    def stored(self) -> bool:
        return self.status in (AddStatus.ADDED, AddStatus.ADDED_AS_CONFLICT)

    def walk(self) -> Iterator[AddResult]:
        yield self
        for r in self.released:
            yield from r.walk()


@dataclass
class LedgerState:
    unspent: dict[OutputRef, Output]

    def value_sum(self) -> int:
        return sum(o.value for o in self.unspent.values())


class LedgerDag:
    def __init__(self, genesis: Transaction, max_pending: int = 100_000):
        validate_syntax(genesis)
        if not genesis.is_genesis:
            raise ValueError("genesis must not have inputs")
        self.genesis_id: TxId = genesis.id
        self.max_pending = max_pending
        self._txs: dict[TxId, Transaction] = {genesis.id: genesis}
        self._parents: dict[TxId, frozenset[TxId]] = {genesis.id: frozenset()}
        self._children: dict[TxId, set[TxId]] = {genesis.id: set()}
        self._consumers: dict[OutputRef, set[TxId]] = {}
        self._label_sets: dict[TxId, frozenset[TxId]] = {genesis.id: frozenset()}
        self.pending: OrderedDict[TxId, Transaction] = OrderedDict()
        self._waiting: dict[TxId, set[TxId]] = {}
        self.rejected: dict[TxId, RejectReason] = {}
        self.evicted = 0
        self.conflicts = ConflictStructures(genesis.id)
        self._lock = threading.RLock()

    # -- basic access ----------------------------------------------------------

    def __contains__(self, tx_id: TxId) -> bool:
        return tx_id in self._txs

    def __len__(self) -> int:
        return len(self._txs)

    def tx(self, tx_id: TxId) -> Transaction:
        return self._txs[tx_id]

    def transaction_ids(self) -> list[TxId]:
        return list(self._txs)

    def parents(self, tx_id: TxId) -> frozenset[TxId]:
        return self._parents[tx_id]

    def children(self, tx_id: TxId) -> set[TxId]:
        return self._children[tx_id]

    def consumers(self, ref: OutputRef) -> set[TxId]:
        return set(self._consumers.get(ref, ()))

    def output(self, ref: OutputRef) -> Output:
        return self._txs[ref.tx_id].outputs[ref.index]

    def _known(self, tx_id: TxId) -> None:
        if tx_id not in self._txs:
            raise KeyError(f"unknown transaction {tx_id}")

    def is_conflict(self, tx_id: TxId) -> bool:
        return tx_id in self.conflicts.conflicts

    def label(self, tx_id: TxId) -> TxId | None:
        self._known(tx_id)
        return tx_id if self.is_conflict(tx_id) else BOT

    def direct_conflicts(self, tx_id: TxId) -> set[TxId]:
        """Stored transactions sharing at least one input with ``tx_id``."""
        out: set[TxId] = set()
        for ref in self._txs[tx_id].inputs:
            out |= self._consumers.get(ref, set())
        out.discard(tx_id)
        return out

    # -- cones and label sets ------------------------------------------------

    def past_cone(self, tx_id: TxId) -> set[TxId]:
        with self._lock:
            self._known(tx_id)
            return _reach(self._parents, tx_id)

    def future_cone(self, tx_id: TxId) -> set[TxId]:
        with self._lock:
            self._known(tx_id)
            return _reach(self._children, tx_id)

    def conflict_label_set(self, tx_id: TxId) -> frozenset[TxId]:
        """Labels in the past cone of ``tx_id`` other than the bottom label."""
        return self._label_sets[tx_id]

    def max_contained_label_set(self, tx_id: TxId) -> set[TxId | None]:
        with self._lock:
            self._known(tx_id)
            return {BOT} | self._label_sets[tx_id]

    def max_contained_branch(self, tx_id: TxId) -> frozenset[TxId]:
        # every conflict in a conflict-free past cone belongs to the branch
        with self._lock:
            self._known(tx_id)
            return self._label_sets[tx_id]

    def are_conflicting(self, x: TxId, y: TxId) -> bool:
        with self._lock:
            self._known(x)
            self._known(y)
            if x == y:
                return False
            ly = self._label_sets[y]
            return any(self.direct_conflicts(c) & ly for c in self._label_sets[x])

    def ledger_state(self, txs: Iterable[TxId]) -> LedgerState:
        with self._lock:
            txs = set(txs)
            for t in txs:
                self._known(t)
                if not self._parents[t] <= txs:
                    raise ValueError(f"transaction set is not past-closed at {t}")
            spent = {ref for t in txs for ref in self._txs[t].inputs}
            unspent = {}
            for t in txs:
                for i, out in enumerate(self._txs[t].outputs):
                    ref = OutputRef(t, i)
                    if ref not in spent:
                        unspent[ref] = out
            return LedgerState(unspent)

    # -- insertion ---------------------------------------------------------------

    def add_transaction(self, tx: Transaction) -> AddResult:
        validate_syntax(tx)
        with self._lock:
            root = self._attempt(tx)
            stack = [root]
            while stack:
                res = stack.pop()
                if not res.stored:
                    continue
                for pid in sorted(self._waiting.pop(res.tx_id, ())):
                    waiting = self.pending.get(pid)
                    if waiting is None or not {r.tx_id for r in waiting.inputs} <= self._txs.keys():
                        continue
                    del self.pending[pid]
                    self._unwait(pid, waiting)
                    sub = self._attempt(waiting)
                    res.released.append(sub)
                    stack.append(sub)
            return root

    def _attempt(self, tx: Transaction) -> AddResult:
        tid = tx.id
        if tid in self._txs or tid in self.pending:
            return AddResult(AddStatus.DUPLICATE, tid)
        if tid in self.rejected:
            return AddResult(AddStatus.REJECTED, tid, reason=self.rejected[tid])
        producers = {ref.tx_id for ref in tx.inputs}
        if producers & self.rejected.keys():
            return self._reject(tid, RejectReason.PARENT_REJECTED)
        missing = producers - self._txs.keys()
        if missing:
            self._buffer(tx, missing)
            return AddResult(AddStatus.BUFFERED, tid)
        reason = self._check(tx)
        if reason is not None:
            return self._reject(tid, reason)
        return self._insert(tx)

    def _buffer(self, tx: Transaction, missing: set[TxId]) -> None:
        self.pending[tx.id] = tx
        for m in missing:
            self._waiting.setdefault(m, set()).add(tx.id)
        while len(self.pending) > self.max_pending:
            old_id, old = self.pending.popitem(last=False)
            self._unwait(old_id, old)
            self.evicted += 1
            log.warning("pending buffer full, evicted %s", old_id)

    def _unwait(self, tx_id: TxId, tx: Transaction) -> None:
        for ref in tx.inputs:
            group = self._waiting.get(ref.tx_id)
            if group is not None:
                group.discard(tx_id)
                if not group:
                    del self._waiting[ref.tx_id]

    def _reject(self, tx_id: TxId, reason: RejectReason) -> AddResult:
        """Record a rejection and drop buffered descendants along with it."""
        root = AddResult(AddStatus.REJECTED, tx_id, reason=reason)
        self.rejected[tx_id] = reason
        stack = [root]
        while stack:
            res = stack.pop()
            for pid in sorted(self._waiting.pop(res.tx_id, ())):
                waiting = self.pending.pop(pid, None)
                if waiting is None:
                    continue
                self._unwait(pid, waiting)
                self.rejected[pid] = RejectReason.PARENT_REJECTED
                sub = AddResult(AddStatus.REJECTED, pid, reason=RejectReason.PARENT_REJECTED)
                res.released.append(sub)
                stack.append(sub)
        return root

    def _check(self, tx: Transaction) -> RejectReason | None:
        consumed = []
        for ref in tx.inputs:
            producer = self._txs[ref.tx_id]
            if ref.index >= len(producer.outputs):
                return RejectReason.UNKNOWN_OUTPUT
            consumed.append(producer.outputs[ref.index])
        if any(out.condition != tx.unlock for out in consumed):
            return RejectReason.UNLOCK_FAILURE
        if sum(o.value for o in consumed) != tx.output_sum():
            return RejectReason.VALUE_IMBALANCE

        parents = {ref.tx_id for ref in tx.inputs}
        inherited = frozenset().union(*(self._label_sets[p] for p in parents))
        for c in inherited:
            if self.direct_conflicts(c) & inherited:
                return RejectReason.PAST_CONE_DOUBLE_SPEND
        rivals = set()
        for ref in tx.inputs:
            rivals |= self._consumers.get(ref, set())
        if rivals and _reaches_any(self._parents, parents, rivals):
            return RejectReason.PAST_CONE_DOUBLE_SPEND
        return None

    def _insert(self, tx: Transaction) -> AddResult:
        tid = tx.id
        parents = frozenset(ref.tx_id for ref in tx.inputs)
        rivals: set[TxId] = set()
        for ref in tx.inputs:
            rivals |= self._consumers.get(ref, set())

        self._txs[tid] = tx
        self._parents[tid] = parents
        self._children[tid] = set()
        for p in parents:
            self._children[p].add(tid)
        for ref in tx.inputs:
            self._consumers.setdefault(ref, set()).add(tid)
        self._label_sets[tid] = frozenset().union(*(self._label_sets[p] for p in parents))

        if not rivals:
            return AddResult(AddStatus.ADDED, tid)
        for c in sorted((rivals | {tid}) - self.conflicts.conflicts):
            self._push_label(c)
        self.conflicts.register_conflict(self, tid, rivals)
        self.conflicts.update_conflict_graph(tid, rivals)
        return AddResult(AddStatus.ADDED_AS_CONFLICT, tid, frozenset(rivals))

    def _push_label(self, c: TxId) -> None:
        for t in _reach(self._children, c):
            self._label_sets[t] = self._label_sets[t] | {c}

    # -- removal, used by pruning ------------------------------------------------

    def _remove(self, tx_ids: Iterable[TxId]) -> None:
        for t in tx_ids:
            tx = self._txs.pop(t)
            for p in self._parents.pop(t):
                if p in self._children:
                    self._children[p].discard(t)
            self._children.pop(t, None)
            self._label_sets.pop(t, None)
            for ref in tx.inputs:
                group = self._consumers.get(ref)
                if group is not None:
                    group.discard(t)
                    if not group:
                        del self._consumers[ref]

    def _drop_label(self, c: TxId) -> None:
        for t in _reach(self._children, c):
            self._label_sets[t] = self._label_sets[t] - {c}

    def snapshot(self) -> dict:
        return {
            "txs": dict(self._txs),
            "parents": dict(self._parents),
            "children": {k: set(v) for k, v in self._children.items()},
            "consumers": {k: set(v) for k, v in self._consumers.items()},
            "label_sets": dict(self._label_sets),
            "conflicts": self.conflicts.copy(),
        }

    def restore(self, snap: dict) -> None:
        self._txs = snap["txs"]
        self._parents = snap["parents"]
        self._children = snap["children"]
        self._consumers = snap["consumers"]
        self._label_sets = snap["label_sets"]
        self.conflicts = snap["conflicts"]


def _reach(step: dict, start: TxId) -> set[TxId]:
    seen = {start}
    stack = [start]
    while stack:
        for v in step[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _reaches_any(step: dict, starts: Iterable[TxId], targets: set[TxId]) -> bool:
    seen: set[TxId] = set()
    stack = list(starts)
    while stack:
        v = stack.pop()
        if v in targets:
            return True
        if v in seen:
            continue
        seen.add(v)
        stack.extend(step[v])
    return False
