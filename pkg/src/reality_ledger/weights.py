"""Weight functions on transactions and their extension to branches.

Weights are exact :class:`fractions.Fraction` values in ``[0, 1]`` so the
consistency axiom (weights of pairwise conflicting transactions sum to at
most one) and argmax ties are decided exactly.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .branches import BranchView, NotABranch
from .conflicts import ConflictStructures
from .ledger import LedgerDag
from .tx import TxId

ONE = Fraction(1)
ZERO = Fraction(0)


class AxiomViolation(ValueError):
    def __init__(self, axiom: str, witness: tuple, detail: str = ""):
        self.axiom = axiom
        self.witness = witness
        super().__init__(f"{axiom} violated by {witness}" + (f": {detail}" if detail else ""))


@dataclass
class WeightFn:
    values: dict[TxId, Fraction]
    strategy: str

    def __call__(self, tx_id: TxId) -> Fraction:
        return self.values[tx_id]

    def branch_weight(self, branch: Iterable[TxId]) -> Fraction:
        return min((self.values[c] for c in branch), default=ONE)

    def to_json(self) -> dict[str, str]:
        return {k: str(v) for k, v in sorted(self.values.items())}


def branch_weight(w: WeightFn, branch: Iterable[TxId], cs: ConflictStructures) -> Fraction:
    """Minimum weight over the branch members; one for the main branch."""
    branch = frozenset(branch)
    view = BranchView(cs)
    if not view.is_branch(branch):
        raise NotABranch("not a branch", view.conflicting_pair(branch))
    return w.branch_weight(branch)


def topological_order(ledger: LedgerDag) -> list[TxId]:
    """Genesis first, parents before children, ties broken by id."""
    indeg = {t: len(ledger.parents(t)) for t in ledger.transaction_ids()}
    heap = [t for t, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        t = heapq.heappop(heap)
        out.append(t)
        for ch in ledger.children(t):
            indeg[ch] -= 1
            if indeg[ch] == 0:
                heapq.heappush(heap, ch)
    return out


def _propagate(ledger: LedgerDag, seed: Mapping[TxId, Fraction]) -> dict[TxId, Fraction]:
    """Cap each transaction by its parents' weights, walking down from genesis.

    Conflicts start from ``seed``; everything else only inherits.
    """
    w: dict[TxId, Fraction] = {}
    for t in topological_order(ledger):
        if t == ledger.genesis_id:
            w[t] = ONE
            continue
        inherited = min(w[p] for p in ledger.parents(t))
        w[t] = min(seed[t], inherited) if t in seed else inherited
    return w


def _min_rule(ledger: LedgerDag, key: Callable[[TxId], object], strategy: str) -> WeightFn:
    cs = ledger.conflicts
    seed = {}
    for c in cs.conflicts:
        rivals = cs.neighbours[c] | {c}
        seed[c] = ONE if min(rivals, key=key) == c else ZERO
    return WeightFn(_propagate(ledger, seed), strategy)


def min_hash_weight(ledger: LedgerDag) -> WeightFn:
    """A conflict wins (weight one) if its id is the smallest among its rivals."""
    return _min_rule(ledger, lambda c: c, "min-hash")


def min_timestamp_weight(ledger: LedgerDag) -> WeightFn:
    return _min_rule(ledger, lambda c: (ledger.tx(c).timestamp, c), "min-timestamp")


def static_weight(ledger: LedgerDag, assignments: Mapping[TxId, Fraction | str | int],
                  check: bool = True) -> WeightFn:
    """Weights injected from outside (e.g. an external consensus).

    ``assignments`` must cover every conflict; other transactions take the
    minimum over their parents unless assigned explicitly.
    """
    seed = {k: Fraction(v) for k, v in assignments.items()}
    missing = ledger.conflicts.conflicts - seed.keys()
    if missing:
        raise ValueError(f"no weight for conflicts {sorted(missing)}")
    for k in seed:
        if k not in ledger:
            raise KeyError(f"unknown transaction {k}")
    values = _propagate(ledger, {k: v for k, v in seed.items() if k != ledger.genesis_id})
    # explicit values override the inherited cap so that the axiom check can see them
    for k, v in seed.items():
        values[k] = v
    w = WeightFn(values, "static")
    if check:
        check_axioms(ledger, w)
    return w


def load_static_weights(ledger: LedgerDag, path: str | Path) -> WeightFn:
    raw = json.loads(Path(path).read_text())
    return static_weight(ledger, {k.lower(): Fraction(v) for k, v in raw.items()})


def weight_for_strategy(ledger: LedgerDag, strategy: str) -> WeightFn:
    if strategy == "min-hash":
        return min_hash_weight(ledger)
    if strategy == "min-timestamp":
        return min_timestamp_weight(ledger)
    if strategy.startswith("static:"):
        return load_static_weights(ledger, strategy.split(":", 1)[1])
    raise ValueError(f"unknown weight strategy {strategy!r}")


def check_axioms(ledger: LedgerDag, w: WeightFn) -> None:
    """Raise :class:`AxiomViolation` unless ``w`` is unitary, monotone and consistent."""
    g = ledger.genesis_id
    if w(g) != ONE:
        raise AxiomViolation("unitarity", (g,), f"w(genesis) = {w(g)}")
    for t in ledger.transaction_ids():
        if not ZERO <= w(t) <= ONE:
            raise AxiomViolation("range", (t,), str(w(t)))
        for p in ledger.parents(t):
            if w(t) > w(p):
                raise AxiomViolation("monotonicity", (t, p), f"{w(t)} > {w(p)}")
    clique = heaviest_conflicting_set(ledger, w)
    total = sum((w(t) for t in clique), ZERO)
    if total > ONE:
        raise AxiomViolation("consistency", tuple(sorted(clique)), f"sum {total} > 1")


def heaviest_conflicting_set(ledger: LedgerDag, w: WeightFn) -> list[TxId]:
    """A pairwise conflicting set of transactions with the largest weight sum.

    Transactions with equal label sets conflict with exactly the same
    transactions and never with each other, so one representative (the
    heaviest) per label set is enough. The search is a plain branch and bound.
    """
    best_of: dict[frozenset, TxId] = {}
    for t in ledger.transaction_ids():
        ls = ledger.conflict_label_set(t)
        if not ls or w(t) == ZERO:
            continue
        cur = best_of.get(ls)
        if cur is None or (w(t), cur) > (w(cur), t):
            best_of[ls] = t
    classes = sorted(best_of, key=lambda ls: (-w(best_of[ls]), best_of[ls]))
    direct = {c: ledger.direct_conflicts(c) for ls in classes for c in ls}

    def clash(a: frozenset, b: frozenset) -> bool:
        return any(direct[c] & b for c in a)

    adj = {a: {b for b in classes if b is not a and clash(a, b)} for a in classes}
    best: list = [ZERO, []]

    def search(chosen: list, total: Fraction, cands: list) -> None:
        if total > best[0]:
            best[0], best[1] = total, list(chosen)
        if best[0] > ONE:
            return
        bound = total + sum((w(best_of[c]) for c in cands), ZERO)
        if bound <= best[0]:
            return
        for i, c in enumerate(cands):
            chosen.append(c)
            search(chosen, total + w(best_of[c]), [d for d in cands[i + 1:] if d in adj[c]])
            chosen.pop()
            if best[0] > ONE:
                return

    search([], ZERO, classes)
    return [best_of[c] for c in best[1]]
