import itertools
import random
from fractions import Fraction

import pytest

import oracles
from reality_ledger.branches import MAIN_BRANCH, BranchView, NotABranch
from reality_ledger.fixtures import FIG6_WEIGHTS
from reality_ledger.ledger import LedgerDag
from reality_ledger.scenario import (generate_scenario, random_static_assignment, replay_ledger)
from reality_ledger.tx import Output, Transaction, make_genesis
from reality_ledger.weights import (AxiomViolation, branch_weight, check_axioms,
                                    heaviest_conflicting_set, min_hash_weight,
                                    min_timestamp_weight, static_weight, weight_for_strategy)

OWNER = b"\x01"


def pair_ledger(ts=(1, 2)):
    g = make_genesis([Output(10, OWNER)])
    led = LedgerDag(g)
    x = Transaction((g.output_ref(0),), (Output(10, b"\x02"),), OWNER, ts[0])
    y = Transaction((g.output_ref(0),), (Output(10, b"\x03"),), OWNER, ts[1])
    led.add_transaction(x)
    led.add_transaction(y)
    return led, x.id, y.id


def fig6(fig4_ledger, n):
    return static_weight(fig4_ledger, {n[k]: v for k, v in FIG6_WEIGHTS.items()})


def test_conflict_free_ledger_weighs_one(fig3_scenario):
    led = replay_ledger(fig3_scenario)
    for w in (min_hash_weight(led), min_timestamp_weight(led)):
        assert set(w.values.values()) == {1}


def test_min_hash_picks_smaller_id():
    led, x, y = pair_ledger()
    w = min_hash_weight(led)
    winner = min(x, y)
    assert w(winner) == 1 and w(max(x, y)) == 0


def test_min_timestamp_picks_earlier_then_id():
    led, x, y = pair_ledger((5, 3))
    w = min_timestamp_weight(led)
    assert w(y) == 1 and w(x) == 0
    led, x, y = pair_ledger((4, 4))
    assert min_timestamp_weight(led)(min(x, y)) == 1


def test_provisional_winner_is_capped_by_parents(fig4_ledger, n):
    w = min_hash_weight(fig4_ledger)
    for c in fig4_ledger.conflicts.conflicts:
        assert all(w(c) <= w(p) for p in fig4_ledger.parents(c))


def test_builtin_weights_satisfy_axioms():
    for seed in range(25):
        led = replay_ledger(generate_scenario(seed, 80, 0.3, max_conflicts=30))
        for w in (min_hash_weight(led), min_timestamp_weight(led)):
            check_axioms(led, w)
            if seed < 6:
                assert oracles.axiom_violations(led, w) == []


def test_static_all_zero_is_valid(fig4_ledger):
    w = static_weight(fig4_ledger, {c: 0 for c in fig4_ledger.conflicts.conflicts})
    assert w(fig4_ledger.genesis_id) == 1


def test_static_consistency_violation():
    led, x, y = pair_ledger()
    with pytest.raises(AxiomViolation) as err:
        static_weight(led, {x: Fraction(7, 10), y: Fraction(6, 10)})
    assert err.value.axiom == "consistency"
    assert set(err.value.witness) == {x, y}


def test_static_monotonicity_and_unitarity_violations(fig4_ledger, n):
    ws = {n[k]: v for k, v in FIG6_WEIGHTS.items()}
    with pytest.raises(AxiomViolation) as err:
        static_weight(fig4_ledger, ws | {n["purple"]: Fraction(9, 10)})
    assert err.value.axiom == "monotonicity"
    with pytest.raises(AxiomViolation) as err:
        static_weight(fig4_ledger, ws | {n["genesis"]: Fraction(1, 2)})
    assert err.value.axiom == "unitarity"
    with pytest.raises(ValueError):
        static_weight(fig4_ledger, {n["yellow"]: 1})


def test_fig6_weights_are_valid(fig4_ledger, n):
    w = fig6(fig4_ledger, n)
    assert w(n["yellow"]) == Fraction(7, 10)
    assert w(n["after_blue"]) == Fraction(3, 10)
    assert oracles.axiom_violations(fig4_ledger, w) == []


def test_branch_weight(fig4_ledger, n):
    w = fig6(fig4_ledger, n)
    cs = fig4_ledger.conflicts
    assert branch_weight(w, MAIN_BRANCH, cs) == 1
    assert branch_weight(w, BranchView(cs).past_cone(n["yellow"]), cs) == Fraction(7, 10)
    ya = {n["yellow"], n["aquamarine"]}
    assert branch_weight(w, ya, cs) == min(FIG6_WEIGHTS["yellow"], FIG6_WEIGHTS["aquamarine"])
    with pytest.raises(NotABranch):
        branch_weight(w, {n["yellow"], n["red"]}, cs)


def test_branch_weight_properties():
    rng = random.Random(3)
    for seed in range(8):
        led = replay_ledger(generate_scenario(seed, 50, 0.3, max_conflicts=10))
        cs = led.conflicts
        w = static_weight(led, random_static_assignment(led, rng))
        view = BranchView(cs)
        dag = view.materialize()
        for b1 in dag:
            for b2 in dag:
                if b1 <= b2:
                    assert w.branch_weight(b1) >= w.branch_weight(b2)
                if view.conflicting_pair(b1 | b2):
                    assert w.branch_weight(b1) + w.branch_weight(b2) <= 1
        for c in cs.conflicts:
            assert w.branch_weight(view.past_cone(c)) == w(c)


def test_random_static_assignments_are_valid():
    rng = random.Random(0)
    for seed in range(20):
        led = replay_ledger(generate_scenario(seed, 120, 0.3, max_conflicts=30))
        static_weight(led, random_static_assignment(led, rng))


def test_heaviest_conflicting_set_is_pairwise_conflicting(fig4_ledger, n):
    w = fig6(fig4_ledger, n)
    best = heaviest_conflicting_set(fig4_ledger, w)
    for a in best:
        for b in best:
            assert a == b or fig4_ledger.are_conflicting(a, b)
    # brute force over every subset of at least two of the ten transactions
    ids = fig4_ledger.transaction_ids()
    top = Fraction(0)
    for mask in range(1 << len(ids)):
        s = [t for i, t in enumerate(ids) if mask >> i & 1]
        if len(s) < 2:
            continue
        if all(fig4_ledger.are_conflicting(a, b) for a, b in itertools.combinations(s, 2)):
            top = max(top, sum((w(t) for t in s), Fraction(0)))
    assert sum(w(t) for t in best) == top == Fraction(4, 5)


def test_unknown_strategy_and_stale_ids(fig4_ledger):
    with pytest.raises(ValueError):
        weight_for_strategy(fig4_ledger, "longest-chain")
    w = min_hash_weight(fig4_ledger)
    with pytest.raises(KeyError):
        w("ab" * 32)
