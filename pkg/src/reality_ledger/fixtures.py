"""Small hand-built ledgers used as worked examples.

``fig3`` is a conflict-free five-transaction DAG. ``fig4`` has six conflicts
named after their colours (yellow, aquamarine, red, purple, blue, orange)
plus three ordinary transactions. ``fig6`` is ``fig4`` with static weights
under which yellow, aquamarine and blue win in that order.
"""

from __future__ import annotations

from fractions import Fraction

from .scenario import Scenario
from .tx import Output, OutputRef, Transaction, make_genesis

OWNER = b"\x01"


def _tx(inputs: list[OutputRef], values: list[int], timestamp: int = 0) -> Transaction:
    return Transaction(tuple(inputs), tuple(Output(v, OWNER) for v in values), OWNER, timestamp)


def fig3() -> Scenario:
    g = make_genesis([Output(10, OWNER), Output(10, OWNER)])
    t1 = _tx([g.output_ref(0)], [6, 4])
    t2 = _tx([g.output_ref(1)], [7, 3])
    t3 = _tx([t1.output_ref(0), t2.output_ref(0)], [13])
    t4 = _tx([t3.output_ref(0), t1.output_ref(1)], [17])
    t5 = _tx([t2.output_ref(1)], [3])
    txs = [t1, t2, t3, t4, t5]
    names = {"genesis": g.id} | {f"t{i + 1}": t.id for i, t in enumerate(txs)}
    return Scenario(g, txs, {"fixture": "fig3", "names": names})


def fig4() -> Scenario:
    g = make_genesis([Output(v, OWNER) for v in (10, 20, 30, 40, 50)])
    g0, g1, g2, g3, g4 = g.output_refs()
    yellow = _tx([g0], [4, 6], 1)
    red = _tx([g0, g1, g2], [60], 2)
    aquamarine = _tx([g1, g3], [25, 35], 3)
    purple = _tx([yellow.output_ref(0), g3], [44], 4)
    blue = _tx([aquamarine.output_ref(0)], [25], 5)
    orange = _tx([aquamarine.output_ref(0), yellow.output_ref(1), g2], [61], 6)
    # ordinary transactions hanging below conflicts, and one on its own
    after_aquamarine = _tx([aquamarine.output_ref(1)], [35], 7)
    after_blue = _tx([blue.output_ref(0)], [25], 8)
    white = _tx([g4], [50], 9)
    named = {
        "yellow": yellow, "red": red, "aquamarine": aquamarine, "purple": purple,
        "blue": blue, "orange": orange, "after_aquamarine": after_aquamarine,
        "after_blue": after_blue, "white": white,
    }
    names = {"genesis": g.id} | {k: t.id for k, t in named.items()}
    return Scenario(g, list(named.values()), {"fixture": "fig4", "names": names})


FIG6_WEIGHTS = {
    "yellow": Fraction(7, 10),
    "aquamarine": Fraction(2, 5),
    "purple": Fraction(1, 5),
    "blue": Fraction(3, 10),
    "orange": Fraction(1, 10),
    "red": Fraction(1, 10),
}


def fig6() -> Scenario:
    sc = fig4()
    sc.meta["fixture"] = "fig6"
    sc.meta["weights"] = {sc.names[k]: str(v) for k, v in FIG6_WEIGHTS.items()}
    return sc


FIXTURES = {"fig3": fig3, "fig4": fig4, "fig6": fig6}
