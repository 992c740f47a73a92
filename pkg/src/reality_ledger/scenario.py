"""Scenarios, seeded replay and the end-to-end pipeline.

A scenario file is JSON lines: an optional ``{"meta": {...}}`` header, then
the genesis, then one transaction per line in a valid arrival order.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .branches import BranchView
from .conflicts import ConflictStructures, rebuild_from_ledger
from .ledger import LedgerDag
from .pruning import (PruneConfig, PruneReport, prune, reality_ledger, validate_consistent)
from .selection import select_reality_branch_walk, select_reality_conflict_graph
from .tx import Output, OutputRef, Transaction, TxId, make_genesis
from .weights import WeightFn, topological_order, weight_for_strategy


class ValidationFailure(RuntimeError):
    pass


class EquivalenceFailure(RuntimeError):
    pass


@dataclass
class Scenario:
    genesis: Transaction
    txs: list[Transaction]
    meta: dict[str, Any] = field(default_factory=dict)

    def to_jsonl(self) -> str:
        lines = [{"meta": self.meta}, self.genesis.to_json()] + [t.to_json() for t in self.txs]
        return "".join(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n" for obj in lines)

    @classmethod
    def from_jsonl(cls, text: str) -> Scenario:
        objs = [json.loads(line) for line in text.splitlines() if line.strip()]
        meta = {}
        if objs and "meta" in objs[0]:
            meta = objs.pop(0)["meta"]
        if not objs:
            raise ValueError("scenario has no genesis")
        txs = [Transaction.from_json(o) for o in objs]
        if not txs[0].is_genesis:
            raise ValueError("first transaction of a scenario must be the genesis")
        return cls(txs[0], txs[1:], meta)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def load(cls, path: str | Path) -> Scenario:
        return cls.from_jsonl(Path(path).read_text())

    @property
    def names(self) -> dict[str, TxId]:
        return self.meta.get("names", {})

    def genesis_value(self) -> int:
        return self.genesis.output_sum()


# -- generation ---------------------------------------------------------------

def _owner(o: int) -> bytes:
    return bytes([o + 1])


def _split(rng: random.Random, total: int, owners: int) -> list[Output]:
    if total >= 2 and rng.random() < 0.5:
        a = rng.randint(1, total - 1)
        parts = [a, total - a]
    else:
        parts = [total]
    return [Output(v, _owner(rng.randrange(owners))) for v in parts]


def generate_scenario(seed: int, n_txs: int, conflict_rate: float, max_parents: int = 3,
                      owners: int = 3, max_conflicts: int | None = None) -> Scenario:
    """A random valid scenario; identical for identical arguments.

    Candidates are vetted by the engine itself, so no listed transaction
    spends from a conflicting past.
    """
    if n_txs < 1 or max_parents < 1 or owners < 1:
        raise ValueError("n_txs, max_parents and owners must be positive")
    if not 0 <= conflict_rate <= 1:
        raise ValueError("conflict_rate must lie in [0, 1]")
    if conflict_rate > 0 and n_txs < 2:
        raise ValueError("a double spend needs at least two transactions")
    rng = random.Random(seed)
    n_gen = max(2, min(16, n_txs // 6 + 1))
    genesis = make_genesis([Output(rng.randint(50, 1000), _owner(i % owners)) for i in range(n_gen)])
    ledger = LedgerDag(genesis)
    txs: list[Transaction] = []
    clock = 0

    def refs_of(t: Transaction) -> list[OutputRef]:
        return t.output_refs()

    all_refs = refs_of(genesis)
    attempts = 0
    while len(txs) < n_txs:
        attempts += 1
        if attempts > 200 * n_txs:
            raise ValueError("could not generate a scenario with these parameters")
        consumed = [r for r in all_refs if ledger.consumers(r)]
        unspent = [r for r in all_refs if not ledger.consumers(r)]
        room = max_conflicts is None or len(ledger.conflicts.conflicts) + 2 <= max_conflicts
        double = bool(consumed) and room and rng.random() < conflict_rate
        first = rng.choice(consumed if double else unspent) if (consumed if double else unspent) else None
        if first is None:
            continue
        cond = ledger.output(first).condition
        pool = [r for r in unspent if r != first and ledger.output(r).condition == cond]
        extra = rng.sample(pool, min(len(pool), rng.randint(0, max_parents - 1)))
        inputs = [first] + extra
        total = sum(ledger.output(r).value for r in inputs)
        clock += rng.randint(0, 3)
        tx = Transaction(tuple(inputs), tuple(_split(rng, total, owners)), cond, clock)
        if tx.id in ledger or ledger._check(tx) is not None:
            continue
        res = ledger.add_transaction(tx)
        if not res.stored:
            continue
        txs.append(tx)
        all_refs.extend(refs_of(tx))

    meta = {
        "seed": seed, "n_txs": n_txs, "conflict_rate": conflict_rate, "max_parents": max_parents,
        "conflicts": len(ledger.conflicts.conflicts),
        "conflict_pairs": _direct_pairs(ledger),
        "depth": _depth(ledger),
    }
    return Scenario(genesis, txs, meta)


def independent_pairs_scenario(n_pairs: int) -> Scenario:
    """``n_pairs`` double spends with nothing in common: the Branch DAG has 3**n_pairs vertices."""
    genesis = make_genesis([Output(10 + i, b"\x01") for i in range(n_pairs)])
    txs = []
    for i in range(n_pairs):
        ref = genesis.output_ref(i)
        for side in (0, 1):
            txs.append(Transaction((ref,), (Output(10 + i, bytes([2 + side])),), b"\x01", side))
    return Scenario(genesis, txs, {"n_pairs": n_pairs, "conflicts": 2 * n_pairs,
                                   "conflict_pairs": n_pairs, "depth": 1})


def _direct_pairs(ledger: LedgerDag) -> int:
    return sum(len(ledger.direct_conflicts(c)) for c in ledger.conflicts.conflicts) // 2


def _depth(ledger: LedgerDag) -> int:
    d: dict[TxId, int] = {}
    for t in topological_order(ledger):
        d[t] = max((d[p] + 1 for p in ledger.parents(t)), default=0)
    return max(d.values())


# -- synthetic static weights -----------------------------------------------------

def random_reality(cs: ConflictStructures, rng: random.Random) -> frozenset[TxId]:
    """Greedy maximal branch with random choices among the eligible conflicts."""
    current: set[TxId] = set()
    while True:
        kids = BranchView(cs).children(current)
        if not kids:
            return frozenset(current)
        current = set(rng.choice(sorted(kids, key=sorted)))


def _monotone(cs: ConflictStructures, raw: dict[TxId, Fraction]) -> dict[TxId, Fraction]:
    out: dict[TxId, Fraction] = {}
    for c in conflict_dag_order(cs):
        ps = [out[p] for p in cs.parents[c] if p != cs.genesis]
        out[c] = min([raw[c]] + ps)
    return out


def random_static_assignment(ledger: LedgerDag, rng: random.Random) -> dict[TxId, Fraction]:
    """Random weights that satisfy the axioms by construction.

    Members of one random reality get at most 1/2; every other conflict gets
    at most 1/(2k) with k the number of distinct label sets, which bounds any
    pairwise conflicting set. Coarse grids make ties common on purpose.
    """
    cs = ledger.conflicts
    reality = random_reality(cs, rng)
    k = max(1, len({ledger.conflict_label_set(t) for t in ledger.transaction_ids()}))
    raw = {}
    for c in sorted(cs.conflicts):
        if c in reality:
            raw[c] = Fraction(rng.randint(0, 4), 8)
        else:
            raw[c] = Fraction(rng.randint(0, 2), 4 * k)
    return _monotone(cs, raw)


def forced_confirmation_assignment(ledger: LedgerDag, reality: frozenset[TxId]) -> dict[TxId, Fraction]:
    """Weight one on the given branch and zero on every other conflict."""
    return {c: Fraction(1 if c in reality else 0) for c in ledger.conflicts.conflicts}


# -- digests ----------------------------------------------------------------------------

def _h(lines: list[str]) -> str:
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def conflict_dag_order(cs: ConflictStructures) -> list[TxId]:
    """Conflicts in topological order from the genesis, ties broken by id."""
    indeg = {c: len(cs.parents[c]) for c in cs.conflicts}
    heap = []
    for c in cs.children[cs.genesis]:
        indeg[c] -= 1
        if indeg[c] == 0:
            heap.append(c)
    heapq.heapify(heap)
    out = []
    while heap:
        c = heapq.heappop(heap)
        out.append(c)
        for ch in cs.children[c]:
            indeg[ch] -= 1
            if indeg[ch] == 0:
                heapq.heappush(heap, ch)
    return out


def structural_digests(ledger: LedgerDag) -> dict[str, str]:
    cs = ledger.conflicts
    led = [f"{t}|{','.join(sorted(ledger.parents(t)))}|{ledger.label(t) or '-'}"
           for t in topological_order(ledger)]
    dag = [f"{c}|{','.join(sorted(cs.parents[c]))}" for c in conflict_dag_order(cs)]
    graph = sorted("-".join(sorted(e)) for e in cs.graph_edges())
    return {"ledger": _h(led), "conflict_dag": _h(dag), "conflict_graph": _h(graph)}


# -- replay ------------------------------------------------------------------------------

def replay_ledger(scenario: Scenario, perm_seed: int | None = None) -> LedgerDag:
    """Feed the scenario in a seeded shuffle (listed order when ``perm_seed`` is None)."""
    ledger = LedgerDag(scenario.genesis)
    order = list(scenario.txs)
    if perm_seed is not None:
        random.Random(perm_seed).shuffle(order)
    for tx in order:
        ledger.add_transaction(tx)
    return ledger


@dataclass
class ReplayReport:
    n_txs: int
    n_conflicts: int
    n_graph_edges: int
    n_pending: int
    n_rejected: int
    genesis_value: int
    digests: dict[str, str]
    realities: dict[str, dict[str, Any]]
    ledger: LedgerDag | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if k != "ledger"}


def reality_summary(ledger: LedgerDag, w: WeightFn) -> dict[str, Any]:
    s3 = select_reality_branch_walk(ledger.conflicts, w)
    s4 = select_reality_conflict_graph(ledger.conflicts, w)
    if s3.reality != s4.reality:
        raise EquivalenceFailure(f"{w.strategy}: branch walk {sorted(s3.reality)} "
                                 f"!= conflict graph {sorted(s4.reality)}")
    txs = reality_ledger(ledger, s3.reality)
    return {
        "branch_id": BranchView(ledger.conflicts).branch_id(s3.reality),
        "conflicts": sorted(s3.reality),
        "steps": s3.steps,
        "weight": str(w.branch_weight(s3.reality)),
        "n_txs": len(txs),
        "value_sum": ledger.ledger_state(txs).value_sum(),
        "ops": {"branch_walk": s3.ops, "conflict_graph": s4.ops},
    }


def replay(scenario: Scenario, perm_seed: int | None = None,
           strategies: tuple[str, ...] = ("min-hash", "min-timestamp")) -> ReplayReport:
    ledger = replay_ledger(scenario, perm_seed)
    realities = {s: reality_summary(ledger, weight_for_strategy(ledger, s)) for s in strategies}
    return ReplayReport(
        n_txs=len(ledger),
        n_conflicts=len(ledger.conflicts.conflicts),
        n_graph_edges=len(ledger.conflicts.graph_edges()),
        n_pending=len(ledger.pending),
        n_rejected=len(ledger.rejected),
        genesis_value=scenario.genesis_value(),
        digests=structural_digests(ledger),
        realities=realities,
        ledger=ledger,
    )


# -- pipeline ---------------------------------------------------------------------------

def triangle_problems(ledger: LedgerDag) -> list[str]:
    """Differences between the maintained structures and a rebuild from scratch."""
    problems = []
    fresh = rebuild_from_ledger(ledger)
    cs = ledger.conflicts
    if fresh.conflicts != cs.conflicts:
        problems.append("conflict sets differ")
    if fresh.dag_edges() != cs.dag_edges():
        problems.append("Conflict DAG edges differ")
    if fresh.graph_edges() != cs.graph_edges():
        problems.append("Conflict Graph edges differ")
    for t in ledger.transaction_ids():
        expect = frozenset(ledger.past_cone(t) & fresh.conflicts)
        if ledger.conflict_label_set(t) != expect:
            problems.append(f"label set of {t} differs")
            break
    return problems


@dataclass
class PipelineResult:
    replay: ReplayReport
    strategy: str
    theta: Fraction
    reality: list[TxId]
    confirmed: bool
    prune: PruneReport | None
    survivors: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "replay": self.replay.to_dict(),
            "strategy": self.strategy,
            "theta": str(self.theta),
            "reality": self.reality,
            "confirmed": self.confirmed,
            "prune": json.loads(self.prune.to_json()) if self.prune else None,
            "survivors": self.survivors,
        }


def run_pipeline(scenario: Scenario, strategy: str | WeightFn, theta: Fraction | str,
                 perm_seed: int | None = None, dot_dir: str | Path | None = None) -> PipelineResult:
    """Replay, select with both algorithms, and prune when the choice is confirmed.

    Raises :class:`EquivalenceFailure` when the two selections differ and
    :class:`ValidationFailure` when the pruned ledger is inconsistent.
    """
    theta = PruneConfig(Fraction(theta)).theta
    ledger = replay_ledger(scenario, perm_seed)
    w = strategy if isinstance(strategy, WeightFn) else weight_for_strategy(ledger, strategy)
    summary = reality_summary(ledger, w)
    rep = ReplayReport(len(ledger), len(ledger.conflicts.conflicts),
                       len(ledger.conflicts.graph_edges()), len(ledger.pending),
                       len(ledger.rejected), scenario.genesis_value(),
                       structural_digests(ledger), {w.strategy: summary}, ledger)
    reality = frozenset(summary["conflicts"])
    if dot_dir is not None:
        from .dot import write_all
        write_all(ledger, dot_dir, names=scenario.names, reality=reality)

    confirmed = w.branch_weight(reality) >= theta
    report = None
    if confirmed:
        expected = reality_ledger(ledger, reality)
        report = prune(ledger, reality)
        survivors = set(ledger.transaction_ids())
        problems = triangle_problems(ledger)
        if problems:
            raise ValidationFailure("; ".join(problems))
        if survivors != expected:
            raise ValidationFailure("pruned ledger differs from the reality ledger")
        if ledger.conflicts.conflicts:
            raise ValidationFailure("conflicts remain after pruning a reality")
        validate_consistent(ledger, survivors)
        if ledger.ledger_state(survivors).value_sum() != scenario.genesis_value():
            raise ValidationFailure("value not conserved")
        if dot_dir is not None:
            from .dot import ledger_dot
            Path(dot_dir, "ledger_pruned.dot").write_text(ledger_dot(ledger, names=scenario.names))
    return PipelineResult(rep, w.strategy, theta, sorted(reality), confirmed, report, len(ledger))
