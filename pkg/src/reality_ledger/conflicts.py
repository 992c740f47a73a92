"""Conflict set, Conflict DAG and Conflict Graph.

The Conflict DAG is kept over ``C ∪ {genesis}`` with edges stored child to
parent (the spending direction). The Conflict Graph is an undirected
adjacency map over ``C``. Both are updated incrementally when a new
double spend arrives; :func:`rebuild_from_ledger` recomputes them straight
from the definitions and serves as the reference for the incremental path.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import TYPE_CHECKING, Iterable

from .tx import TxId

if TYPE_CHECKING:
    from .ledger import LedgerDag


class ConflictStructures:
    def __init__(self, genesis: TxId):
        self.genesis = genesis
        self.conflicts: set[TxId] = set()
        self.parents: dict[TxId, set[TxId]] = {genesis: set()}
        self.children: dict[TxId, set[TxId]] = {genesis: set()}
        self.neighbours: dict[TxId, set[TxId]] = {}

    def copy(self) -> ConflictStructures:
        other = ConflictStructures(self.genesis)
        other.conflicts = set(self.conflicts)
        other.parents = {k: set(v) for k, v in self.parents.items()}
        other.children = {k: set(v) for k, v in self.children.items()}
        other.neighbours = {k: set(v) for k, v in self.neighbours.items()}
        return other

    def __eq__(self, other):
        if not isinstance(other, ConflictStructures):
            return NotImplemented
        return (self.genesis == other.genesis and self.conflicts == other.conflicts
                and self.dag_edges() == other.dag_edges()
                and self.graph_edges() == other.graph_edges())

    # -- plain graph plumbing ------------------------------------------------

    def _add_vertex(self, c: TxId) -> None:
        self.conflicts.add(c)
        self.parents.setdefault(c, set())
        self.children.setdefault(c, set())
        self.neighbours.setdefault(c, set())

    def _add_dag_edge(self, child: TxId, parent: TxId) -> None:
        self.parents[child].add(parent)
        self.children[parent].add(child)

    def _remove_dag_edge(self, child: TxId, parent: TxId) -> None:
        self.parents[child].discard(parent)
        self.children[parent].discard(child)

    def _add_graph_edge(self, u: TxId, v: TxId) -> None:
        if u == v:
            return
        self.neighbours[u].add(v)
        self.neighbours[v].add(u)

    def dag_edges(self) -> set[tuple[TxId, TxId]]:
        return {(c, p) for c, ps in self.parents.items() for p in ps}

    def graph_edges(self) -> set[frozenset[TxId]]:
        return {frozenset((u, v)) for u, ns in self.neighbours.items() for v in ns}

    def is_conflict(self, x: TxId) -> bool:
        return x in self.conflicts

    def _check_known(self, c: TxId) -> None:
        if c not in self.parents:
            raise KeyError(f"{c} is not a vertex of the Conflict DAG")

    # -- order queries on the Conflict DAG -------------------------------------

    def past_cone(self, c: TxId) -> set[TxId]:
        """Conflicts ``d`` with ``c <=_C d``; the genesis is left out."""
        self._check_known(c)
        seen = {c}
        stack = [c]
        while stack:
            for p in self.parents[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        seen.discard(self.genesis)
        return seen

    def future_cone(self, c: TxId) -> set[TxId]:
        self._check_known(c)
        seen = {c}
        stack = [c]
        while stack:
            for ch in self.children[stack.pop()]:
                if ch not in seen:
                    seen.add(ch)
                    stack.append(ch)
        seen.discard(self.genesis)
        return seen

    def minimal(self, subset: Iterable[TxId]) -> set[TxId]:
        """Elements of ``subset`` with no other element of it below them."""
        s = set(subset)
        covered: set[TxId] = set()
        for d in s:
            covered |= self.past_cone(d) - {d}
        return s - covered

    def maximal(self, subset: Iterable[TxId]) -> set[TxId]:
        s = set(subset)
        covered: set[TxId] = set()
        for d in s:
            covered |= self.future_cone(d) - {d}
        return s - covered

    def depth(self, c: TxId) -> int:
        return len(self.past_cone(c))

    # -- closest conflicts in ledger cones -----------------------------------

    def closest_past_conflicts(self, ledger: LedgerDag, z: TxId) -> set[TxId]:
        """Minimal conflicts (or the genesis) in the strict ledger past of ``z``.

        The search does not go through conflicts; the survivors of the walk
        are then filtered down to the minimal ones using label sets.
        """
        found = _stop_at_conflicts(ledger.parents, z, self.conflicts | {self.genesis})
        real = {c for c in found if c != self.genesis}
        if not real:
            return {self.genesis}
        # d < c in the ledger order  <=>  c is in d's label set
        return {c for c in real
                if not any(d != c and c in ledger.conflict_label_set(d) for d in real)}

    def closest_future_conflicts(self, ledger: LedgerDag, z: TxId) -> set[TxId]:
        found = _stop_at_conflicts(ledger.children, z, self.conflicts)
        return {c for c in found
                if not any(d != c and d in ledger.conflict_label_set(c) for d in found)}

    # -- incremental updates ---------------------------------------------------

    def register_conflict(self, ledger: LedgerDag, x: TxId, ys: Iterable[TxId]) -> None:
        """Insert ``x`` and its direct conflicts ``ys`` into the Conflict DAG.

        ``x`` must be a ledger leaf already stored in ``ledger``, and the label
        sets of the ledger must already account for the new conflicts.
        """
        ys = set(ys)
        if ledger.children(x):
            raise ValueError(f"{x} is not a leaf of the ledger DAG")
        direct = ledger.direct_conflicts(x)
        if not ys or not ys <= direct:
            raise ValueError("ys must be non-empty and directly conflicting with x")

        for c in ys | {x}:
            self._add_vertex(c)
        for y in sorted(ys | {x}):
            for v in self.closest_past_conflicts(ledger, y):
                self._add_dag_edge(y, v)
            for v in self.closest_future_conflicts(ledger, y):
                self._add_dag_edge(v, y)
        for y in sorted(ys):
            below = self.future_cone(y) - {y}
            for p in list(self.parents[y]):
                for c in list(self.children[p]):
                    if c in below:
                        self._remove_dag_edge(c, p)

    def update_conflict_graph(self, x: TxId, ys: Iterable[TxId]) -> None:
        """Add the Conflict Graph edges created by ``x`` arriving.

        Runs after :meth:`register_conflict` for the same ``(x, ys)``.
        """
        ys = set(ys)
        if x not in self.conflicts or not ys <= self.conflicts:
            raise ValueError("register_conflict must run first")
        for y in ys:
            for z in self.future_cone(y):
                self._add_graph_edge(x, z)
        # ancestors first, so inherited neighbour sets are complete
        for y in sorted(ys | {x}, key=lambda c: (self.depth(c), c)):
            for p in self.parents[y]:
                if p == self.genesis:
                    continue
                for z in list(self.neighbours[p]):
                    self._add_graph_edge(y, z)


def _stop_at_conflicts(step, z: TxId, stops: set[TxId]) -> set[TxId]:
    """Walk from ``z`` via ``step``; collect stop vertices, do not pass them."""
    found: set[TxId] = set()
    seen = {z}
    queue = deque(step(z))
    while queue:
        v = queue.popleft()
        if v in seen:
            continue
        seen.add(v)
        if v in stops:
            found.add(v)
        else:
            queue.extend(step(v))
    return found


def rebuild_from_ledger(ledger: LedgerDag) -> ConflictStructures:
    """Build the Conflict DAG and Graph directly from their definitions.

    Uses explicit past-cone traversals and double-spend detection over the
    stored transactions; none of the incrementally maintained state is read.
    """
    genesis = ledger.genesis_id
    out = ConflictStructures(genesis)

    spenders: dict = {}
    for tx_id in ledger.transaction_ids():
        for ref in ledger.tx(tx_id).inputs:
            spenders.setdefault(ref, set()).add(tx_id)
    direct: dict[TxId, set[TxId]] = {}
    for group in spenders.values():
        if len(group) > 1:
            for u, v in itertools.permutations(group, 2):
                direct.setdefault(u, set()).add(v)
    conflicts = set(direct)
    for c in conflicts:
        out._add_vertex(c)

    past = {c: _traverse(ledger.parents, c) for c in conflicts}
    strict_past = {c: (past[c] & conflicts) - {c} for c in conflicts}
    for c in conflicts:
        above = strict_past[c]
        if not above:
            out._add_dag_edge(c, genesis)
            continue
        for p in above:
            if not any(p in strict_past[w] for w in above if w != p):
                out._add_dag_edge(c, p)

    for u, v in itertools.combinations(sorted(conflicts), 2):
        pu, pv = past[u] & conflicts, past[v] & conflicts
        if any(direct[a] & pv for a in pu):
            out._add_graph_edge(u, v)
    return out


def _traverse(step, start: TxId) -> set[TxId]:
    seen = {start}
    stack = [start]
    while stack:
        for v in step(stack.pop()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen
