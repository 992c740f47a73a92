"""Picking one reality from a weight function.

Both procedures are greedy and share one tie-break: among equally heavy
candidates the smallest conflict id wins. Each keeps an operation counter
(candidate scans plus edge visits) so tests can check the quadratic bound
without relying on wall-clock time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .branches import Branch, BranchView
from .conflicts import ConflictStructures
from .tx import TxId
from .weights import ONE, WeightFn


@dataclass
class Selection:
    reality: Branch
    steps: list[TxId] = field(default_factory=list)
    ops: int = 0


def _best(cands, score) -> TxId:
    return min(cands, key=lambda c: (-score(c), c))


def select_reality_branch_walk(cs: ConflictStructures, w: WeightFn,
                               check_children: bool = False) -> Selection:
    """Walk down the Branch DAG, always to the heaviest child.

    The child set of the current branch is kept incrementally: a conflict is
    a candidate once all its Conflict DAG parents are in the branch, and it is
    dropped for good once it conflicts with a member.
    """
    genesis = cs.genesis
    missing = {c: sum(1 for p in cs.parents[c] if p != genesis) for c in cs.conflicts}
    candidates = {c for c, n in missing.items() if n == 0}
    blocked: set[TxId] = set()
    current: set[TxId] = set()
    current_weight = ONE
    sel = Selection(frozenset())
    view = BranchView(cs) if check_children else None

    while True:
        sel.ops += len(candidates)
        candidates -= blocked
        if view is not None:
            assert {frozenset(current | {c}) for c in candidates} == view.children(current)
        if not candidates:
            break
        c = _best(candidates, lambda d: min(current_weight, w(d)))
        candidates.discard(c)
        current.add(c)
        current_weight = min(current_weight, w(c))
        sel.steps.append(c)
        for n in cs.neighbours[c]:
            sel.ops += 1
            blocked.add(n)
        for ch in cs.children[c]:
            sel.ops += 1
            missing[ch] -= 1
            if missing[ch] == 0 and ch not in blocked:
                candidates.add(ch)

    sel.reality = frozenset(current)
    return sel


def select_reality_conflict_graph(cs: ConflictStructures, w: WeightFn) -> Selection:
    """Greedy independent set on the Conflict Graph.

    Only conflicts that are maximal (no remaining Conflict DAG parent) among
    the still-undecided set ``U`` are eligible, which keeps the result
    past-closed.
    """
    genesis = cs.genesis
    undecided = set(cs.conflicts)
    above = {c: sum(1 for p in cs.parents[c] if p != genesis) for c in cs.conflicts}
    eligible = {c for c, n in above.items() if n == 0}
    chosen: set[TxId] = set()
    sel = Selection(frozenset())

    while undecided:
        sel.ops += len(eligible)
        c = _best(eligible, w)
        chosen.add(c)
        sel.steps.append(c)
        gone = {c}
        for n in cs.neighbours[c]:
            sel.ops += 1
            if n in undecided:
                gone.add(n)
        for r in gone:
            undecided.discard(r)
            eligible.discard(r)
            for ch in cs.children[r]:
                sel.ops += 1
                if ch in undecided:
                    above[ch] -= 1
                    if above[ch] == 0:
                        eligible.add(ch)

    # the greedy order already keeps the result past-closed; assert, do not repair
    assert all(p == genesis or p in chosen for c in chosen for p in cs.parents[c])
    sel.reality = frozenset(chosen)
    return sel
