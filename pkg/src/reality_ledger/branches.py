"""Branches and a lazy view of the Branch DAG.

A branch is a conflict-free, past-closed set of conflicts and is handled as
a plain ``frozenset`` of conflict ids. The Branch DAG can be exponentially
large in the number of conflicts, so it is never stored: :class:`BranchView`
answers child queries from the Conflict DAG and Conflict Graph on demand.
Full materialization and brute-force reality enumeration exist for small
instances and for checking the lazy path.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .conflicts import ConflictStructures
from .tx import TxId, sha256_hex

Branch = frozenset  # frozenset[TxId]

MAIN_BRANCH: Branch = frozenset()


class NotABranch(ValueError):
    def __init__(self, message: str, witness: tuple[TxId, TxId] | None = None):
        super().__init__(message)
        self.witness = witness


class TooLarge(RuntimeError):
    pass


class BranchView:
    def __init__(self, cs: ConflictStructures):
        self.cs = cs

    def _check_ids(self, s: Iterable[TxId]) -> set[TxId]:
        s = set(s)
        unknown = s - self.cs.conflicts
        if unknown:
            raise KeyError(f"not conflicts: {sorted(unknown)}")
        return s

    def conflicting_pair(self, s: Iterable[TxId]) -> tuple[TxId, TxId] | None:
        s = set(s)
        for c in sorted(s):
            clash = self.cs.neighbours[c] & s
            if clash:
                return c, min(clash)
        return None

    def is_branch(self, s: Iterable[TxId]) -> bool:
        s = self._check_ids(s)
        if self.conflicting_pair(s) is not None:
            return False
        genesis = self.cs.genesis
        return all(p == genesis or p in s for c in s for p in self.cs.parents[c])

    def _require_branch(self, b: Iterable[TxId]) -> Branch:
        b = frozenset(b)
        if not self.is_branch(b):
            raise NotABranch("not a branch", self.conflicting_pair(b))
        return b

    def past_cone(self, c: TxId) -> Branch:
        return frozenset(self.cs.past_cone(c))

    def expand(self, conflicts: Iterable[TxId]) -> Branch:
        out: set[TxId] = set()
        for c in conflicts:
            out |= self.cs.past_cone(c)
        return frozenset(out)

    def aggregate(self, branches: Iterable[Iterable[TxId]]) -> Branch:
        union = frozenset().union(*(frozenset(b) for b in branches))
        self._check_ids(union)
        pair = self.conflicting_pair(union)
        if pair is not None:
            raise NotABranch(f"{pair[0]} conflicts with {pair[1]}", pair)
        return union

    def minimal_conflicts(self, b: Iterable[TxId]) -> list[TxId]:
        b = self._require_branch(b)
        return sorted(self.cs.minimal(b))

    def branch_id(self, b: Iterable[TxId]) -> str:
        """Hash of the concatenated minimal-conflict ids in ascending order.

        A branch generated by a single conflict takes that conflict's id.
        """
        mins = self.minimal_conflicts(b)
        if len(mins) == 1:
            return mins[0]
        return sha256_hex(b"".join(bytes.fromhex(c) for c in mins))

    def children(self, b: Iterable[TxId]) -> set[Branch]:
        b = self._require_branch(b)
        genesis = self.cs.genesis
        blocked: set[TxId] = set()
        for r in b:
            blocked |= self.cs.neighbours[r]
        out = set()
        for c in self.cs.conflicts - b:
            if c in blocked:
                continue
            if all(p == genesis or p in b for p in self.cs.parents[c]):
                out.add(b | {c})
        return out

    def is_reality(self, b: Iterable[TxId]) -> bool:
        return not self.children(b)

    def materialize(self, limit: int = 10_000) -> dict[Branch, set[Branch]]:
        """Breadth-first closure of the main branch under :meth:`children`."""
        dag: dict[Branch, set[Branch]] = {}
        queue = deque([MAIN_BRANCH])
        while queue:
            b = queue.popleft()
            if b in dag:
                continue
            if len(dag) >= limit:
                raise TooLarge(f"Branch DAG has more than {limit} vertices")
            kids = self.children(b)
            dag[b] = kids
            queue.extend(k for k in kids if k not in dag)
        return dag

    def maximal_independent_sets(self, max_conflicts: int = 20) -> list[frozenset[TxId]]:
        if len(self.cs.conflicts) > max_conflicts:
            raise TooLarge(f"{len(self.cs.conflicts)} conflicts exceed {max_conflicts}")
        return maximal_independent_sets(self.cs.conflicts, self.cs.neighbours)

    def realities_bruteforce(self, max_conflicts: int = 20) -> set[Branch]:
        return {self.expand(mis) for mis in self.maximal_independent_sets(max_conflicts)}


def maximal_independent_sets(vertices: Iterable[TxId], neighbours: dict[TxId, set[TxId]]) -> list[frozenset[TxId]]:
    """All maximal independent sets, by Bron-Kerbosch on the complement graph."""
    vertices = set(vertices)
    out: list[frozenset[TxId]] = []

    def non_adjacent(v: TxId) -> set[TxId]:
        return vertices - neighbours.get(v, set()) - {v}

    def expand(r: set[TxId], p: set[TxId], x: set[TxId]) -> None:
        if not p and not x:
            out.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda u: len(p & non_adjacent(u)))
        for v in sorted(p - non_adjacent(pivot)):
            nv = non_adjacent(v)
            expand(r | {v}, p & nv, x & nv)
            p = p - {v}
            x = x | {v}

    expand(set(), set(vertices), set())
    return out
