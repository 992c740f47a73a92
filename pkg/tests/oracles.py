"""Reference implementations that read only raw transactions.

Nothing here touches label sets or the maintained conflict structures, so
agreement with the engine is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import networkx as nx


def spend_graph(ledger) -> nx.DiGraph:
    """Edges spender -> producer, built from inputs alone."""
    g = nx.DiGraph()
    for t in ledger.transaction_ids():
        g.add_node(t)
        for ref in ledger.tx(t).inputs:
            g.add_edge(t, ref.tx_id)
    return g


def past(g: nx.DiGraph, x) -> set:
    return nx.descendants(g, x) | {x}


def future(g: nx.DiGraph, x) -> set:
    return nx.ancestors(g, x) | {x}


def direct_pairs(ledger) -> set[frozenset]:
    ids = ledger.transaction_ids()
    out = set()
    for a, b in itertools.combinations(ids, 2):
        if set(ledger.tx(a).inputs) & set(ledger.tx(b).inputs):
            out.add(frozenset((a, b)))
    return out


def conflicts(ledger) -> set:
    return set().union(*direct_pairs(ledger)) if direct_pairs(ledger) else set()


def conflicting(ledger, g, pairs, x, y) -> bool:
    if x == y:
        return False
    px, py = past(g, x), past(g, y)
    return any(frozenset((a, b)) in pairs for a in px for b in py if a != b)


def conflict_dag_edges(ledger) -> set[tuple]:
    """Transitive reduction of the spending order restricted to conflicts and genesis."""
    g = spend_graph(ledger)
    cs = conflicts(ledger) | {ledger.genesis_id}
    closure = nx.transitive_closure_dag(g)
    sub = nx.DiGraph()
    sub.add_nodes_from(cs)
    for a in cs:
        for b in cs:
            if a != b and closure.has_edge(a, b):
                sub.add_edge(a, b)
    red = nx.transitive_reduction(sub)
    return set(red.edges())


def conflict_graph_edges(ledger) -> set[frozenset]:
    g = spend_graph(ledger)
    pairs = direct_pairs(ledger)
    cs = sorted(conflicts(ledger))
    return {frozenset((a, b)) for a, b in itertools.combinations(cs, 2)
            if conflicting(ledger, g, pairs, a, b)}


def is_branch_by_definition(ledger, s) -> bool:
    g = spend_graph(ledger)
    pairs = direct_pairs(ledger)
    cs = conflicts(ledger)
    for a, b in itertools.combinations(s, 2):
        if conflicting(ledger, g, pairs, a, b):
            return False
    return all(past(g, c) & cs <= set(s) for c in s)


def realities_from_mis(ledger) -> set[frozenset]:
    g = spend_graph(ledger)
    cs = conflicts(ledger)
    cg = nx.Graph()
    cg.add_nodes_from(cs)
    cg.add_edges_from(tuple(e) for e in conflict_graph_edges(ledger))
    out = set()
    for clique in nx.find_cliques(nx.complement(cg)) if cs else [[]]:
        out.add(frozenset(set().union(*(past(g, c) & cs for c in clique)) if clique else set()))
    return out


def axiom_violations(ledger, w) -> list[str]:
    """Unitarity, monotonicity over every comparable pair, and pairwise consistency."""
    g = spend_graph(ledger)
    pairs = direct_pairs(ledger)
    bad = []
    if w(ledger.genesis_id) != 1:
        bad.append("unitarity")
    ids = ledger.transaction_ids()
    for x in ids:
        for y in past(g, x):
            if w(x) > w(y):
                bad.append(f"monotonicity {x[:8]} {y[:8]}")
    labels = {x: frozenset(past(g, x) & set().union(*pairs)) if pairs else frozenset() for x in ids}
    for x, y in itertools.combinations(ids, 2):
        if labels[x] and labels[y] and w(x) + w(y) > Fraction(1):
            if conflicting(ledger, g, pairs, x, y):
                bad.append(f"consistency {x[:8]} {y[:8]}")
    return bad
