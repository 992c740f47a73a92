"""Command line driver.

Exit codes: 0 success, 1 bad input, 2 a validation check failed, 3 the two
selection procedures disagreed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .fixtures import FIG6_WEIGHTS, FIXTURES
from .pruning import ConsistencyViolation
from .scenario import (EquivalenceFailure, Scenario, ValidationFailure, generate_scenario,
                       independent_pairs_scenario, replay, replay_ledger, run_pipeline)
from .selection import select_reality_branch_walk, select_reality_conflict_graph
from .weights import AxiomViolation, min_hash_weight, weight_for_strategy

OPS_CONSTANT = 4


def _emit(obj: dict, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    sc = generate_scenario(args.seed, args.txs, args.conflict_rate, args.max_parents,
                           max_conflicts=args.max_conflicts)
    sc.save(args.out)
    return 0


def cmd_fixture(args) -> int:
    sc = FIXTURES[args.name]()
    sc.save(args.out)
    if args.weights_out:
        if args.name not in ("fig4", "fig6"):
            raise ValueError("only fig4 and fig6 carry weights")
        Path(args.weights_out).write_text(json.dumps(
            {sc.names[k]: str(v) for k, v in FIG6_WEIGHTS.items()}, indent=2, sort_keys=True))
    return 0


def _figures(ledger, fig_dir, names, strategy, reality, theta=None) -> list[str]:
    from .plotting import plot_conflict_structures, plot_weights
    out = Path(fig_dir)
    out.mkdir(parents=True, exist_ok=True)
    w = weight_for_strategy(ledger, strategy)
    paths = [plot_conflict_structures(ledger, out / "conflicts.png", names, reality),
             plot_weights(ledger, w, out / f"weights_{strategy.split(':')[0]}.png", names,
                          reality, None if theta is None else float(theta))]
    return [str(p) for p in paths]


def cmd_replay(args) -> int:
    sc = Scenario.load(args.scenario)
    strategies = tuple(args.strategy or ["min-hash", "min-timestamp"])
    rep = replay(sc, args.perm_seed, strategies)
    out = rep.to_dict()
    if args.fig_dir:
        first = strategies[0]
        out["figures"] = _figures(rep.ledger, args.fig_dir, sc.names, first,
                                  rep.realities[first]["conflicts"])
    _emit(out, args.report)
    if rep.n_pending:
        print(f"{rep.n_pending} transactions still pending", file=sys.stderr)
        return 2
    return 0


def cmd_pipeline(args) -> int:
    sc = Scenario.load(args.scenario)
    theta = Fraction(args.theta)
    fig_ledger = replay_ledger(sc, args.perm_seed) if args.fig_dir else None
    res = run_pipeline(sc, args.strategy, theta, args.perm_seed, args.dot_dir)
    out = res.to_dict()
    if fig_ledger is not None:
        out["figures"] = _figures(fig_ledger, args.fig_dir, sc.names, args.strategy,
                                  res.reality, theta)
    _emit(out, args.report)
    return 0


def cmd_complexity(args) -> int:
    rows = []
    ok = True
    for n in args.sizes:
        ledger = replay_ledger(independent_pairs_scenario(n // 2))
        w = min_hash_weight(ledger)
        a = select_reality_branch_walk(ledger.conflicts, w)
        b = select_reality_conflict_graph(ledger.conflicts, w)
        c = len(ledger.conflicts.conflicts)
        bound = args.k * c * c
        row = {"conflicts": c, "ops_branch_walk": a.ops, "ops_conflict_graph": b.ops,
               "bound": bound, "branch_dag_vertices": 3 ** (c // 2),
               "within_bound": a.ops <= bound and b.ops <= bound}
        ok &= row["within_bound"]
        if a.reality != b.reality:
            raise EquivalenceFailure(f"selections differ at |C| = {c}")
        rows.append(row)
    out = {"k": args.k, "rows": rows}
    if args.fig_dir:
        from .plotting import plot_complexity
        Path(args.fig_dir).mkdir(parents=True, exist_ok=True)
        out["figures"] = [str(plot_complexity(rows, Path(args.fig_dir) / "complexity.png", args.k))]
    _emit(out, args.report)
    return 0 if ok else 2


def _sizes(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reality-ledger", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random scenario")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--txs", type=int, required=True)
    g.add_argument("--conflict-rate", type=float, required=True)
    g.add_argument("--max-parents", type=int, default=3)
    g.add_argument("--max-conflicts", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fixture", help="write a worked-example scenario")
    f.add_argument("--name", choices=sorted(FIXTURES), required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--weights-out", help="also write the example's static weights")
    f.set_defaults(func=cmd_fixture)

    r = sub.add_parser("replay", help="replay a scenario in a shuffled order")
    r.add_argument("--scenario", required=True)
    r.add_argument("--perm-seed", type=int)
    r.add_argument("--strategy", action="append",
                   help="min-hash, min-timestamp or static:<file.json>; repeatable")
    r.add_argument("--report")
    r.add_argument("--fig-dir")
    r.set_defaults(func=cmd_replay)

    pl = sub.add_parser("pipeline", help="replay, select, confirm and prune")
    pl.add_argument("--scenario", required=True)
    pl.add_argument("--strategy", default="min-hash")
    pl.add_argument("--theta", default="3/4")
    pl.add_argument("--perm-seed", type=int)
    pl.add_argument("--dot-dir")
    pl.add_argument("--fig-dir")
    pl.add_argument("--report")
    pl.set_defaults(func=cmd_pipeline)

    c = sub.add_parser("complexity", help="operation counts on independent double spends")
    c.add_argument("--sizes", type=_sizes, default=[10, 20, 40, 80])
    c.add_argument("--k", type=int, default=OPS_CONSTANT)
    c.add_argument("--report")
    c.add_argument("--fig-dir")
    c.set_defaults(func=cmd_complexity)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EquivalenceFailure as e:
        print(f"equivalence failure: {e}", file=sys.stderr)
        return 3
    except (ValidationFailure, ConsistencyViolation, AxiomViolation) as e:
        print(f"validation failure: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
