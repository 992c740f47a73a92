import json
from fractions import Fraction

import pytest

from reality_ledger.fixtures import FIG6_WEIGHTS, fig4, fig6
from reality_ledger.scenario import (EquivalenceFailure, Scenario, generate_scenario, replay,
                                     replay_ledger, run_pipeline, structural_digests)
from reality_ledger.tx import Output, Transaction, make_genesis
from reality_ledger.weights import WeightFn, static_weight


def test_generation_is_deterministic():
    a = generate_scenario(42, 100, 0.2).to_jsonl()
    b = generate_scenario(42, 100, 0.2).to_jsonl()
    assert a == b
    assert a != generate_scenario(43, 100, 0.2).to_jsonl()


def test_zero_conflict_rate_means_no_conflicts():
    rep = replay(generate_scenario(1, 80, 0.0))
    assert rep.n_conflicts == 0
    assert rep.realities["min-hash"]["conflicts"] == []


def test_infeasible_parameters():
    for args in [(1, 1, 0.5), (1, 0, 0.0), (1, 10, 1.5), (1, 10, -0.1)]:
        with pytest.raises(ValueError):
            generate_scenario(*args)


def test_listed_order_leaves_nothing_pending():
    for seed in range(10):
        sc = generate_scenario(seed, 150, 0.3)
        led = replay_ledger(sc)
        assert not led.pending and not led.rejected
        assert len(led) == len(sc.txs) + 1


def test_jsonl_roundtrip(tmp_path):
    sc = generate_scenario(3, 30, 0.3)
    path = tmp_path / "s.jsonl"
    sc.save(path)
    again = Scenario.load(path)
    assert again.genesis == sc.genesis and again.txs == sc.txs and again.meta == sc.meta
    assert set(sc.meta) >= {"seed", "conflict_pairs", "depth"}


def test_jsonl_without_header_and_bad_first_line():
    g = make_genesis([Output(5, b"\x01")])
    t = Transaction((g.output_ref(0),), (Output(5, b"\x01"),), b"\x01")
    text = json.dumps(g.to_json()) + "\n" + json.dumps(t.to_json()) + "\n"
    assert Scenario.from_jsonl(text).txs == [t]
    with pytest.raises(ValueError):
        Scenario.from_jsonl(json.dumps(t.to_json()))
    with pytest.raises(ValueError):
        Scenario.from_jsonl("")


def test_two_transaction_reverse_order():
    g = make_genesis([Output(5, b"\x01")])
    a = Transaction((g.output_ref(0),), (Output(5, b"\x01"),), b"\x01")
    b = Transaction((a.output_ref(0),), (Output(5, b"\x01"),), b"\x01")
    forward = Scenario(g, [a, b])
    backward = Scenario(g, [b, a])
    assert structural_digests(replay_ledger(forward)) == structural_digests(replay_ledger(backward))


def test_digests_permutation_invariant():
    sc = generate_scenario(8, 200, 0.25)
    ref = replay(sc)
    for p in range(15):
        rep = replay(sc, perm_seed=p)
        assert rep.digests == ref.digests
        assert rep.realities == ref.realities


def test_fig6_replay_with_static_weights(tmp_path, n):
    sc = fig6()
    wfile = tmp_path / "w.json"
    wfile.write_text(json.dumps({n[k]: str(v) for k, v in FIG6_WEIGHTS.items()}))
    rep = replay(sc, perm_seed=3, strategies=(f"static:{wfile}",))
    got = rep.realities[f"static:{wfile}"]
    assert set(got["conflicts"]) == {n["yellow"], n["aquamarine"], n["blue"]}
    assert got["value_sum"] == 150


def test_pipeline_conflict_free(fig3_scenario):
    res = run_pipeline(fig3_scenario, "min-hash", Fraction(3, 4))
    assert res.reality == [] and res.confirmed
    assert res.prune.removed_txs == []


def test_pipeline_double_spend_with_static_weights():
    g = make_genesis([Output(10, b"\x01")])
    x = Transaction((g.output_ref(0),), (Output(10, b"\x01"),), b"\x01", 1)
    y = Transaction((g.output_ref(0),), (Output(10, b"\x01"),), b"\x01", 2)
    below = Transaction((y.output_ref(0),), (Output(10, b"\x01"),), b"\x01", 3)
    sc = Scenario(g, [x, y, below])
    led = replay_ledger(sc)
    w = static_weight(led, {x.id: Fraction(9, 10), y.id: Fraction(1, 10)})
    res = run_pipeline(sc, w, Fraction(4, 5))
    assert res.confirmed and res.reality == [x.id]
    assert res.prune.removed_txs == sorted([y.id, below.id])
    assert res.survivors == 2


def test_pipeline_unconfirmed_skips_prune(n):
    sc = fig6()
    led = replay_ledger(sc)
    w = static_weight(led, {n[k]: v for k, v in FIG6_WEIGHTS.items()})
    res = run_pipeline(sc, w, Fraction(3, 4))
    assert not res.confirmed and res.prune is None


def test_pipeline_reports_disagreement(monkeypatch):
    from reality_ledger import scenario as mod
    from reality_ledger.selection import Selection

    monkeypatch.setattr(mod, "select_reality_conflict_graph",
                        lambda cs, w: Selection(frozenset()))
    with pytest.raises(EquivalenceFailure):
        run_pipeline(fig4(), "min-hash", Fraction(3, 4))


def test_pipeline_writes_dot(tmp_path):
    run_pipeline(fig4(), "min-hash", Fraction(3, 4), dot_dir=tmp_path)
    names = {p.name for p in tmp_path.iterdir()}
    assert {"ledger.dot", "utxo.dot", "conflict_dag.dot", "conflict_graph.dot",
            "branch_dag.dot"} <= names
    assert (tmp_path / "conflict_graph.dot").read_text().count(" -- ") == 9
    assert (tmp_path / "branch_dag.dot").read_text().count("peripheries=2") == 4


def test_weightfn_json(fig4_ledger):
    w = WeightFn({fig4_ledger.genesis_id: Fraction(1)}, "static")
    assert w.to_json() == {fig4_ledger.genesis_id: "1"}
