"""Graphviz DOT export of the ledger and conflict structures."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from .branches import BranchView, TooLarge
from .ledger import LedgerDag
from .scenario import conflict_dag_order
from .tx import TxId
from .weights import topological_order

PALETTE = ["gold", "aquamarine", "tomato", "orchid", "lightskyblue", "orange",
           "palegreen", "pink", "khaki", "plum", "lightsalmon", "lightcyan"]


def _name(t: TxId, names: dict[str, TxId] | None) -> str:
    if names:
        for k, v in names.items():
            if v == t:
                return k
    return t[:8]


NAMED_COLOURS = {"yellow", "aquamarine", "red", "purple", "blue", "orange"}


def _colours(conflicts: Iterable[TxId], names: dict[str, TxId] | None = None) -> dict[TxId, str]:
    """Palette colours by id order; fixture conflicts named after a colour keep it."""
    out = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(sorted(conflicts))}
    for name, t in (names or {}).items():
        if name in NAMED_COLOURS and t in out:
            out[t] = name
    return out


def _q(s: str) -> str:
    return '"' + s.replace('"', r'\"') + '"'


def ledger_dot(ledger: LedgerDag, names: dict[str, TxId] | None = None,
               highlight: Iterable[TxId] = ()) -> str:
    """Ledger DAG with each conflict filled in its own colour."""
    colour = _colours(ledger.conflicts.conflicts, names)
    highlight = set(highlight)
    lines = ["digraph ledger {", "  rankdir=RL;", "  node [shape=box, style=filled, fillcolor=white];"]
    for t in topological_order(ledger):
        attrs = [f"label={_q(_name(t, names))}"]
        if t in colour:
            attrs.append(f"fillcolor={colour[t]}")
        if t in highlight:
            attrs.append("penwidth=3")
        lines.append(f"  {_q(t)} [{', '.join(attrs)}];")
    for t in topological_order(ledger):
        for p in sorted(ledger.parents(t)):
            lines.append(f"  {_q(t)} -> {_q(p)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def utxo_dot(ledger: LedgerDag, names: dict[str, TxId] | None = None) -> str:
    """Input/output level view: transaction -> input -> output -> producer."""
    lines = ["digraph utxo {", "  rankdir=RL;"]
    for t in topological_order(ledger):
        tx = ledger.tx(t)
        lines.append(f"  {_q(t)} [shape=box, label={_q(_name(t, names))}];")
        for i, out in enumerate(tx.outputs):
            o = f"{t}:out{i}"
            lines.append(f"  {_q(o)} [shape=ellipse, label={_q(str(out.value))}];")
            lines.append(f"  {_q(o)} -> {_q(t)};")
        for j, ref in enumerate(tx.inputs):
            i_node = f"{t}:in{j}"
            lines.append(f"  {_q(i_node)} [shape=point];")
            lines.append(f"  {_q(t)} -> {_q(i_node)};")
            lines.append(f"  {_q(i_node)} -> {_q(f'{ref.tx_id}:out{ref.index}')};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def conflict_dag_dot(ledger: LedgerDag, names: dict[str, TxId] | None = None) -> str:
    cs = ledger.conflicts
    colour = _colours(cs.conflicts, names)
    lines = ["digraph conflict_dag {", "  rankdir=RL;", "  node [style=filled];",
             f"  {_q(cs.genesis)} [label={_q(_name(cs.genesis, names))}, fillcolor=white];"]
    order = conflict_dag_order(cs)
    for c in order:
        lines.append(f"  {_q(c)} [label={_q(_name(c, names))}, fillcolor={colour[c]}];")
    for c in order:
        for p in sorted(cs.parents[c]):
            lines.append(f"  {_q(c)} -> {_q(p)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def conflict_graph_dot(ledger: LedgerDag, names: dict[str, TxId] | None = None) -> str:
    cs = ledger.conflicts
    colour = _colours(cs.conflicts, names)
    lines = ["graph conflict_graph {", "  node [style=filled];"]
    for c in sorted(cs.conflicts):
        lines.append(f"  {_q(c)} [label={_q(_name(c, names))}, fillcolor={colour[c]}];")
    for u, v in sorted(tuple(sorted(e)) for e in cs.graph_edges()):
        lines.append(f"  {_q(u)} -- {_q(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def branch_dag_dot(ledger: LedgerDag, names: dict[str, TxId] | None = None,
                   limit: int = 2000) -> str:
    """Materialized Branch DAG; raises :class:`TooLarge` past ``limit`` vertices."""
    dag = BranchView(ledger.conflicts).materialize(limit)

    def label(b) -> str:
        return "{" + ", ".join(sorted(_name(c, names) for c in b)) + "}"

    key = {b: f"B{i}" for i, b in enumerate(sorted(dag, key=lambda b: (len(b), sorted(b))))}
    lines = ["digraph branch_dag {", "  rankdir=RL;", "  node [shape=box];"]
    for b, k in key.items():
        shape = ", peripheries=2" if not dag[b] else ""
        lines.append(f"  {k} [label={_q(label(b))}{shape}];")
    for b in key:
        for child in sorted(dag[b], key=sorted):
            lines.append(f"  {key[child]} -> {key[b]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_all(ledger: LedgerDag, out_dir: str | Path, names: dict[str, TxId] | None = None,
              reality: Iterable[TxId] = ()) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "ledger.dot": ledger_dot(ledger, names, highlight=reality),
        "utxo.dot": utxo_dot(ledger, names),
        "conflict_dag.dot": conflict_dag_dot(ledger, names),
        "conflict_graph.dot": conflict_graph_dot(ledger, names),
    }
    try:
        files["branch_dag.dot"] = branch_dag_dot(ledger, names)
    except TooLarge:
        pass
    written = []
    for name, text in files.items():
        (out / name).write_text(text)
        written.append(out / name)
    return written
