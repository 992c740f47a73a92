import hashlib
import itertools
import random

import pytest

import oracles
from reality_ledger.branches import MAIN_BRANCH, BranchView, NotABranch, TooLarge
from reality_ledger.scenario import generate_scenario, independent_pairs_scenario, replay_ledger


def named(n, *names):
    return frozenset(n[x] for x in names)


FIG4_BRANCHES = [(), ("yellow",), ("aquamarine",), ("red",), ("yellow", "aquamarine"),
                 ("yellow", "purple"), ("aquamarine", "blue"), ("yellow", "aquamarine", "blue"),
                 ("yellow", "aquamarine", "orange")]
FIG4_REALITIES = [("red",), ("yellow", "purple"), ("yellow", "aquamarine", "blue"),
                  ("yellow", "aquamarine", "orange")]


def test_fig4_branch_dag_has_nine_vertices(fig4_ledger, n):
    dag = BranchView(fig4_ledger.conflicts).materialize()
    assert set(dag) == {named(n, *b) for b in FIG4_BRANCHES}


def test_fig4_every_subset_against_definition(fig4_ledger, n):
    view = BranchView(fig4_ledger.conflicts)
    cs = sorted(fig4_ledger.conflicts.conflicts)
    expected = {named(n, *b) for b in FIG4_BRANCHES}
    for k in range(len(cs) + 1):
        for s in itertools.combinations(cs, k):
            s = frozenset(s)
            assert view.is_branch(s) == (s in expected) == oracles.is_branch_by_definition(fig4_ledger, s)


def test_fig4_four_realities(fig4_ledger, n):
    view = BranchView(fig4_ledger.conflicts)
    expected = {named(n, *r) for r in FIG4_REALITIES}
    dag = view.materialize()
    assert {b for b, kids in dag.items() if not kids} == expected
    assert view.realities_bruteforce() == expected
    assert oracles.realities_from_mis(fig4_ledger) == expected
    assert all(view.is_reality(r) for r in expected)


def test_fig4_depth_one_children(fig4_ledger, n):
    view = BranchView(fig4_ledger.conflicts)
    assert view.children(MAIN_BRANCH) == {named(n, "yellow"), named(n, "aquamarine"), named(n, "red")}


def test_is_branch_rejects_open_past_and_unknown(fig4_ledger, n):
    view = BranchView(fig4_ledger.conflicts)
    assert view.is_branch(MAIN_BRANCH)
    assert not view.is_branch(named(n, "purple"))
    with pytest.raises(KeyError):
        view.is_branch({n["white"]})


def test_aggregate(fig4_ledger, n):
    view = BranchView(fig4_ledger.conflicts)
    y, a = view.past_cone(n["yellow"]), view.past_cone(n["aquamarine"])
    assert view.aggregate([MAIN_BRANCH, y]) == y
    assert view.aggregate([y, a]) == named(n, "yellow", "aquamarine")
    with pytest.raises(NotABranch) as err:
        view.aggregate([y, view.past_cone(n["red"])])
    assert set(err.value.witness) == {n["yellow"], n["red"]}


def test_minimal_conflicts_and_branch_id(fig4_ledger, n):
    view = BranchView(fig4_ledger.conflicts)
    assert view.minimal_conflicts(MAIN_BRANCH) == []
    assert view.branch_id(MAIN_BRANCH) == hashlib.sha256(b"").hexdigest()
    assert view.minimal_conflicts(view.past_cone(n["orange"])) == [n["orange"]]
    # a branch generated by one conflict carries that conflict's id
    assert view.branch_id(view.past_cone(n["orange"])) == n["orange"]
    b = named(n, "yellow", "aquamarine", "blue")
    mins = sorted([n["yellow"], n["blue"]])
    assert view.minimal_conflicts(b) == mins
    assert view.branch_id(b) == hashlib.sha256(bytes.fromhex(mins[0] + mins[1])).hexdigest()
    with pytest.raises(NotABranch):
        view.minimal_conflicts(named(n, "red", "yellow"))


def test_no_conflicts_single_vertex(fig3_scenario):
    view = BranchView(replay_ledger(fig3_scenario).conflicts)
    assert view.materialize() == {MAIN_BRANCH: set()}
    assert view.realities_bruteforce() == {MAIN_BRANCH}


def test_one_pair_two_realities():
    view = BranchView(replay_ledger(independent_pairs_scenario(1)).conflicts)
    assert len(view.realities_bruteforce()) == 2


@pytest.mark.parametrize("t", [3, 4])
def test_independent_pairs_lower_bound(t):
    view = BranchView(replay_ledger(independent_pairs_scenario(t)).conflicts)
    dag = view.materialize()
    assert len(dag) >= 2 ** t
    assert len(dag) == 3 ** t
    with pytest.raises(TooLarge):
        view.materialize(limit=2 ** t)


def test_lazy_children_match_materialized_random():
    for seed in range(20):
        led = replay_ledger(generate_scenario(seed, 60, 0.3, max_conflicts=12))
        view = BranchView(led.conflicts)
        dag = view.materialize()
        for b, kids in dag.items():
            assert view.children(b) == kids
            assert view.is_branch(b)
            assert view.expand(view.minimal_conflicts(b)) == b
        leaves = {b for b, kids in dag.items() if not kids}
        assert leaves == view.realities_bruteforce() == oracles.realities_from_mis(led)


def test_subset_iff_reachable():
    led = replay_ledger(generate_scenario(5, 50, 0.3, max_conflicts=8))
    dag = BranchView(led.conflicts).materialize()

    def reach(b):
        seen, stack = {b}, [b]
        while stack:
            for k in dag[stack.pop()]:
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        return seen

    for b1 in dag:
        r = reach(b1)
        for b2 in dag:
            assert (b1 <= b2) == (b2 in r)


def test_branch_id_ignores_member_order(fig4_ledger, n):
    view = BranchView(fig4_ledger.conflicts)
    members = [n["yellow"], n["aquamarine"], n["orange"]]
    ids = set()
    for _ in range(5):
        random.shuffle(members)
        ids.add(view.branch_id(members))
    assert len(ids) == 1
