"""Matplotlib figures written next to the JSON reports."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

from .dot import _colours, _name  # noqa: E402
from .ledger import LedgerDag  # noqa: E402
from .tx import TxId  # noqa: E402
from .weights import WeightFn  # noqa: E402


def _depths(ledger: LedgerDag) -> dict[TxId, int]:
    cs = ledger.conflicts
    return {c: cs.depth(c) for c in cs.conflicts} | {cs.genesis: 0}


def plot_conflict_structures(ledger: LedgerDag, path: str | Path,
                             names: dict[str, TxId] | None = None,
                             reality: Iterable[TxId] = ()) -> Path:
    """Conflict DAG (layered by depth) beside the Conflict Graph."""
    cs = ledger.conflicts
    reality = set(reality)
    colour = _colours(cs.conflicts, names)
    labels = {c: _name(c, names) for c in cs.conflicts | {cs.genesis}}

    dag = nx.DiGraph()
    depth = _depths(ledger)
    for c in sorted(cs.conflicts | {cs.genesis}):
        dag.add_node(c, layer=depth[c])
    dag.add_edges_from(sorted(cs.dag_edges()))
    graph = nx.Graph()
    graph.add_nodes_from(sorted(cs.conflicts))
    graph.add_edges_from(sorted(tuple(sorted(e)) for e in cs.graph_edges()))

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 5))
    pos = nx.multipartite_layout(dag, subset_key="layer")
    nx.draw_networkx(dag, pos, ax=ax1, labels=labels, font_size=7, node_size=900,
                     node_color=[colour.get(c, "white") for c in dag.nodes],
                     edgecolors=["black" if c in reality else "grey" for c in dag.nodes])
    ax1.set_title("Conflict DAG")
    if graph.number_of_nodes():
        gpos = nx.circular_layout(graph)
        nx.draw_networkx(graph, gpos, ax=ax2, labels={c: labels[c] for c in graph.nodes},
                         font_size=7, node_size=900, node_color=[colour[c] for c in graph.nodes],
                         edgecolors=["black" if c in reality else "grey" for c in graph.nodes])
    ax2.set_title("Conflict Graph")
    for ax in (ax1, ax2):
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_weights(ledger: LedgerDag, w: WeightFn, path: str | Path,
                 names: dict[str, TxId] | None = None, reality: Iterable[TxId] = (),
                 theta: float | None = None) -> Path:
    """Bar chart of conflict weights; members of the selected reality are dark."""
    reality = set(reality)
    cs = sorted(ledger.conflicts.conflicts, key=lambda c: (-w(c), c))
    fig, ax = plt.subplots(figsize=(max(4, 0.4 * len(cs) + 2), 3.5))
    ax.bar(range(len(cs)), [float(w(c)) for c in cs],
           color=["tab:blue" if c in reality else "lightgrey" for c in cs])
    ax.set_xticks(range(len(cs)), [_name(c, names) for c in cs], rotation=60, fontsize=7)
    if theta is not None:
        ax.axhline(theta, color="tab:red", linestyle="--", label=f"theta = {theta:g}")
        ax.legend()
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("weight")
    ax.set_title(f"Conflict weights ({w.strategy})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_complexity(rows: list[dict], path: str | Path, k: int) -> Path:
    """Operation counts of both selection procedures against k * |C|^2."""
    sizes = [r["conflicts"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(sizes, [r["ops_branch_walk"] for r in rows], "o-", label="branch walk")
    ax.plot(sizes, [r["ops_conflict_graph"] for r in rows], "s-", label="conflict graph")
    ax.plot(sizes, [k * n * n for n in sizes], "k--", label=f"{k}|C|^2")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("|C|")
    ax.set_ylabel("elementary operations")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
