"""Reality ledgers, confirmation and pruning.

Once a branch is confirmed, every transaction conflicting with it can be
dropped for good. Pruning removes those transactions from the ledger DAG and
shrinks the Conflict DAG and Conflict Graph accordingly; conflicts that lose
all their rivals become ordinary transactions again.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .branches import Branch, BranchView, NotABranch
from .ledger import LedgerDag, RejectReason
from .tx import OutputRef, TxId, TxSyntaxError, validate_syntax
from .weights import WeightFn, topological_order

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class PruneConfig:
    theta: Fraction = Fraction(2, 3)

    def __post_init__(self):
        theta = Fraction(self.theta)
        if not HALF < theta <= 1:
            raise ValueError(f"confirmation threshold must lie in (1/2, 1], got {theta}")
        object.__setattr__(self, "theta", theta)


class ConsistencyViolation(ValueError):
    """``constraint`` numbers: 1 syntax, 2 value balance, 3 unlock, 4 spendable inputs."""

    def __init__(self, tx_id: TxId, constraint: int, detail: str = ""):
        self.tx_id = tx_id
        self.constraint = constraint
        super().__init__(f"{tx_id}: constraint {constraint} {detail}".rstrip())


def reality_ledger(ledger: LedgerDag, branch: Iterable[TxId]) -> set[TxId]:
    """Transactions whose conflict label sets lie inside ``branch``."""
    b = frozenset(branch)
    if not BranchView(ledger.conflicts).is_branch(b):
        raise NotABranch("not a branch")
    return {t for t in ledger.transaction_ids() if ledger.conflict_label_set(t) <= b}


def validate_consistent(ledger: LedgerDag, txs: Iterable[TxId]) -> None:
    """Check that ``txs`` is a conflict-free ledger, replaying it from the genesis."""
    txs = set(txs)
    spent: set[OutputRef] = set()
    genesis = ledger.genesis_id
    for t in topological_order(ledger):
        if t not in txs:
            continue
        tx = ledger.tx(t)
        try:
            validate_syntax(tx)
        except (TxSyntaxError, ValueError) as e:
            raise ConsistencyViolation(t, 1, str(e)) from e
        if t == genesis:
            continue
        consumed = []
        for ref in tx.inputs:
            if ref.tx_id not in txs or ref in spent:
                raise ConsistencyViolation(t, 4, f"input {ref.tx_id}:{ref.index} not spendable")
            producer = ledger.tx(ref.tx_id)
            if ref.index >= len(producer.outputs):
                raise ConsistencyViolation(t, 4, "output index out of range")
            consumed.append(producer.outputs[ref.index])
        if sum(o.value for o in consumed) != tx.output_sum():
            raise ConsistencyViolation(t, 2)
        if any(o.condition != tx.unlock for o in consumed):
            raise ConsistencyViolation(t, 3)
        spent.update(tx.inputs)


def minimal_confirmed_branch(ledger: LedgerDag, w: WeightFn, theta: Fraction) -> Branch:
    """All conflicts at or above the threshold; they form a branch because
    weights never grow downward and two rivals cannot both exceed one half."""
    theta = PruneConfig(theta).theta
    b = frozenset(c for c in ledger.conflicts.conflicts if w(c) >= theta)
    if not BranchView(ledger.conflicts).is_branch(b):
        raise NotABranch("confirmed conflicts do not form a branch; weights break the axioms")
    return b


@dataclass
class PruneReport:
    branch: list[TxId] = field(default_factory=list)
    removed_txs: list[TxId] = field(default_factory=list)
    demoted_conflicts: list[TxId] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "branch": self.branch,
            "removed_txs": self.removed_txs,
            "demoted_conflicts": self.demoted_conflicts,
        }, indent=2)


def prune(ledger: LedgerDag, branch: Iterable[TxId]) -> PruneReport:
    """Drop everything that conflicts with the confirmed ``branch``.

    Either the whole operation applies or the ledger is left untouched.
    """
    b = frozenset(branch)
    cs = ledger.conflicts
    if not BranchView(cs).is_branch(b):
        raise NotABranch("cannot prune against a non-branch", BranchView(cs).conflicting_pair(b))
    report = PruneReport(branch=sorted(b))
    if not b:
        return report
    snap = ledger.snapshot()
    try:
        _prune(ledger, b, report)
    except BaseException:
        ledger.restore(snap)
        raise
    for t in report.removed_txs:
        ledger._reject(t, RejectReason.PRUNED)
    return report


def _prune(ledger: LedgerDag, b: Branch, report: PruneReport) -> None:
    cs = ledger.conflicts
    genesis = cs.genesis
    minimal = cs.minimal(b)
    losers: set[TxId] = set()
    for m in minimal:
        losers |= cs.neighbours[m]
    for y in losers:
        for z in list(cs.neighbours[y]):
            cs.neighbours[y].discard(z)
            cs.neighbours[z].discard(y)
    isolated = {c for c in cs.conflicts if not cs.neighbours[c]}

    doomed: set[TxId] = set()
    for y in cs.maximal(losers):
        doomed |= ledger.future_cone(y)
    ledger._remove(doomed)

    # A survivor whose only double-spend partners were removed is no longer a
    # conflict even if it still inherits Conflict Graph edges from ancestors.
    stranded = {c for c in cs.conflicts - isolated - doomed if not ledger.direct_conflicts(c)}
    for s in stranded:
        for z in list(cs.neighbours[s]):
            cs.neighbours[z].discard(s)
        cs.neighbours[s].clear()

    dropped = isolated | stranded
    # plan reattachments on the unmodified Conflict DAG first
    plan = {}
    for c in cs.conflicts - dropped:
        if cs.parents[c] & dropped:
            plan[c] = _surviving_ancestors(cs, cs.parents[c], dropped)
    for c in dropped:
        for ch in list(cs.children[c]):
            cs._remove_dag_edge(ch, c)
        for p in list(cs.parents[c]):
            cs._remove_dag_edge(c, p)
    for c, ups in plan.items():
        for u in ups:
            cs._add_dag_edge(c, u)
    for c in cs.conflicts - dropped:
        cs.parents[c] -= {genesis}
        _trim_parents(cs, c)
        if not cs.parents[c]:
            cs._add_dag_edge(c, genesis)
        else:
            cs.children[genesis].discard(c)

    for c in dropped:
        if c not in doomed:
            ledger._drop_label(c)
        cs.conflicts.discard(c)
        del cs.parents[c], cs.children[c], cs.neighbours[c]

    report.removed_txs = sorted(doomed)
    report.demoted_conflicts = sorted(dropped - doomed)


def _surviving_ancestors(cs, start: set[TxId], dropped: set[TxId]) -> set[TxId]:
    out: set[TxId] = set()
    stack = list(start)
    seen: set[TxId] = set()
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        if v in dropped:
            stack.extend(cs.parents[v])
        else:
            out.add(v)
    return out


def _trim_parents(cs, c: TxId) -> None:
    """Keep only the closest parents after a reattachment."""
    ps = cs.parents[c]
    if len(ps) < 2:
        return
    extra = set()
    for p in ps:
        extra |= cs.past_cone(p) - {p}
    for p in ps & extra:
        cs._remove_dag_edge(c, p)
