"""Command-line entry point ``wpf``.

Every command prints a JSON document (sorted keys, two-space indent) or
writes it to ``--out``.  Nothing time-dependent is included, so equal seeds
give byte-identical output.
"""

from __future__ import annotations

import argparse
import ast
import json
import sys

import numpy as np

from wpf import models
from wpf.algebra import AlgebraError, VarietySpec
from wpf.attacks import counting_certificate, make_adversary
from wpf.blackbox import ProtocolViolation, from_json, lambda_contains, wrap
from wpf.games import (
    GameConfig,
    GameError,
    end_to_end_theorem_demo,
    estimate_negligibility_curve,
    make_family,
    parse_range,
    run_average_game,
    run_worstcase_game,
    write_curve_csv,
)
from wpf.qsim import SimulationError, check_oracle_report, order_find_qpe
from wpf.slp import RelationPair, SlpError, format_slp, parse_slp, run, shortest_slp_bfs, to_free


def _plain(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (tuple, set, frozenset)):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_plain) + "\n"


def _emit(doc, out=None):
    text = dumps(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _element(text: str):
    """Carrier element literal: ``3``, ``(1, 0)`` or ``1,0``."""
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        raise argparse.ArgumentTypeError(f"not an element literal: {text!r}") from None


def _read_slp(path: str):
    with open(path) as fh:
        return parse_slp(fh.read())


def _blackbox(args):
    if args.bb:
        with open(args.bb) as fh:
            return from_json(json.load(fh))
    if not args.source:
        raise GameError("give --bb FILE or --source REF")
    alg = models.algebra_from_ref(args.source)
    return wrap(alg, args.n, args.seed, not args.permissive, args.source)


def _bb_args(p):
    p.add_argument("--bb", help="black-box description written by `wpf wrap`")
    p.add_argument("--source", help="algebra reference such as zn-star:15")
    p.add_argument("--n", type=int, help="encoding width in bits (default: minimal)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--permissive", action="store_true", help="answer malformed queries with 0 instead of failing")


def _game_args(p, pi_default="1"):
    p.add_argument("--family", required=True)
    p.add_argument("--params", default="")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--pi", default=pi_default)
    p.add_argument("--tau", default="0")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--adversary", default="inf:exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma")
    p.add_argument("--permissive", action="store_true")
    p.add_argument("--out")


def _cfg(args, k=None):
    return GameConfig(args.k if k is None else k, args.pi, args.tau, args.trials, args.seed,
                      args.adversary, not args.permissive)


# --------------------------------------------------------------------------
# handlers


def cmd_game(args):
    f = make_family(args.family, args.params)
    if args.mode == "avg":
        rep = run_average_game(f, _cfg(args), args.gamma)
    else:
        rep = run_worstcase_game(f, _cfg(args), args.instance_budget, args.per_instance_trials, args.gamma)
    _emit(rep.to_dict(), args.out)


def cmd_demo(args):
    f = make_family(args.family, args.params)
    rep = end_to_end_theorem_demo(f, args.gamma, _cfg(args), args.instance_budget)
    _emit(rep.to_dict(), args.out)


def cmd_curve(args):
    f = make_family(args.family, args.params)
    rows = estimate_negligibility_curve(f, _cfg(args, k=1), parse_range(args.k_list), args.gamma)
    if args.csv:
        write_curve_csv(rows, args.csv)
    _emit({"family": f.describe(), "adversary": args.adversary, "rows": rows}, args.out)


def cmd_slp(args):
    alg = models.algebra_from_ref(args.algebra)
    if args.action == "free":
        u = _read_slp(args.slp)
        v = VarietySpec.parse(args.variety)
        _emit({"slp": format_slp(u), "variety": str(v), "normal_form": str(to_free(u, v))}, args.out)
        return
    gens = tuple(_element(t) for t in args.gens)
    if args.action == "search":
        target = _element(args.target)
        u = shortest_slp_bfs(alg, gens, target, args.budget)
        doc = {"algebra": args.algebra, "gens": gens, "target": target, "found": u is not None,
               "slp": None if u is None else format_slp(u), "length": None if u is None else len(u)}
    else:
        u = _read_slp(args.slp)
        doc = {"algebra": args.algebra, "gens": gens, "slp": format_slp(u), "value": run(u, alg, gens)}
    _emit(doc, args.out)


def cmd_wrap(args):
    bb = _blackbox(args)
    doc = bb.describe()
    doc["carrier"] = [bb.bits(c) for c in bb.elements()]
    _emit(doc, args.out)


def cmd_query(args):
    bb = _blackbox(args)
    ops = [bb.parse_bits(t) for t in args.operands]
    res = bb.query(args.symbol, *ops)
    _emit({"blackbox": bb.describe(), "symbol": args.symbol, "operands": args.operands,
           "result": bb.bits(res), "queries": bb.queries}, args.out)


def cmd_lambda(args):
    bb = _blackbox(args)
    g = tuple(bb.parse_bits(t) for t in args.gens)
    pair = RelationPair(_read_slp(args.left), _read_slp(args.right))
    v = VarietySpec.parse(args.variety)
    ok = lambda_contains(v, len(g), bb, g, pair)
    _emit({"blackbox": bb.describe(), "variety": str(v), "gens": args.gens, "contains": ok,
           "queries": bb.queries}, args.out)


def cmd_attack(args):
    f = make_family(args.family, args.params)
    d = f.index_of(args.index) if args.index else f.indices[0]
    rng = np.random.default_rng(args.seed)
    bb = wrap(f.algebra_at(d), f.xi(d), args.seed, True, f.ref(d))
    if args.gamma:
        mapping, _ = f.gammas[args.gamma]
        bb = bb.reduct(list(mapping.values()), {old: new for new, old in mapping.items()})
    m = 1 if args.kind == "inf" else (args.m or f.xi(d) + 1)
    elems = bb.elements()
    g = tuple(elems[int(i)] for i in rng.integers(len(elems), size=m))
    default = "inf:exact" if args.kind == "inf" else "fin:bfs"
    adv = make_adversary(args.oracle or default)
    if adv.attack != args.kind:
        raise GameError(f"oracle {args.oracle!r} does not fit the {args.kind} attack")
    outcome = adv(bb, g, (), rng)
    doc = {"blackbox": bb.describe(), "index": f.label(d), "gens": [bb.bits(h) for h in g],
           "outcome": outcome.to_dict()}
    if args.variety:
        v = VarietySpec.parse(args.variety)
        doc["verified"] = outcome.success and lambda_contains(v, m, bb, g, outcome.result)
    if args.kind == "fin":
        doc["certificate"] = counting_certificate(bb, g)
    _emit(doc, args.out)


def cmd_qsim(args):
    if args.action == "check-oracle":
        reports = []
        for ref in args.algebra:
            bb = wrap(models.algebra_from_ref(ref), args.n, args.seed, True, ref)
            reports.append(check_oracle_report(bb))
        _emit({"reports": reports, "ok": all(r["ok"] for r in reports)}, args.out)
        return
    ref = f"zn-star:{args.modulus}"
    bb = wrap(models.units_group(args.modulus), None, args.seed, True, ref)
    res = order_find_qpe(bb, bb.encode(args.base % args.modulus), args.qubits, args.shots, seed=args.seed)
    doc = res.to_dict()
    doc.update({"modulus": args.modulus, "base": args.base})
    _emit(doc, args.out)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wpf", description="Weak pseudo-freeness games over black-box algebras.")
    sub = ap.add_subparsers(dest="command", required=True)

    game = sub.add_parser("game", help="run the average-case or worst-case game")
    game.add_argument("mode", choices=["avg", "worst"])
    _game_args(game)
    game.add_argument("--instance-budget", type=int, default=10**6)
    game.add_argument("--per-instance-trials", type=int)
    game.set_defaults(func=cmd_game)

    demo = sub.add_parser("demo", help="attack group reducts of expanded groups")
    demo.add_argument("what", choices=["theorem"])
    _game_args(demo)
    demo.add_argument("--instance-budget", type=int, default=10**6)
    demo.set_defaults(func=cmd_demo, gamma=None)

    curve = sub.add_parser("curve", help="average-game estimate per security level")
    _game_args(curve)
    curve.add_argument("--k-list", required=True, help="e.g. 1..5 or 2,3,4")
    curve.add_argument("--csv", help="also write the table as CSV")
    curve.set_defaults(func=cmd_curve)

    slp = sub.add_parser("slp", help="straight-line program utilities")
    slp.add_argument("action", choices=["search", "eval", "free"])
    slp.add_argument("--algebra", default="zn-add:2")
    slp.add_argument("--gens", nargs="*", default=[])
    slp.add_argument("--target")
    slp.add_argument("--slp", help="program file")
    slp.add_argument("--variety", default="all-groups")
    slp.add_argument("--budget", type=int)
    slp.add_argument("--out")
    slp.set_defaults(func=cmd_slp)

    w = sub.add_parser("wrap", help="describe a black-box instance")
    _bb_args(w)
    w.add_argument("--out")
    w.set_defaults(func=cmd_wrap)

    q = sub.add_parser("query", help="one oracle query")
    _bb_args(q)
    q.add_argument("symbol")
    q.add_argument("operands", nargs="*")
    q.add_argument("--out")
    q.set_defaults(func=cmd_query)

    lam = sub.add_parser("lambda-check", help="is a program pair a nontrivial relation?")
    _bb_args(lam)
    lam.add_argument("--variety", required=True)
    lam.add_argument("--gens", nargs="+", required=True)
    lam.add_argument("--left", required=True)
    lam.add_argument("--right", required=True)
    lam.add_argument("--out")
    lam.set_defaults(func=cmd_lambda)

    att = sub.add_parser("attack", help="run one attack on one instance")
    att.add_argument("kind", choices=["inf", "fin"])
    att.add_argument("--family", required=True)
    att.add_argument("--params", default="")
    att.add_argument("--index", help="index label, e.g. 15 for zn-star or 3 for elem-abelian")
    att.add_argument("--gamma")
    att.add_argument("--seed", type=int, default=0)
    att.add_argument("-m", type=int, help="tuple length for the finite attack")
    att.add_argument("--oracle", help="adversary spec, e.g. inf:qpe:qubits=8,shots=8")
    att.add_argument("--variety", help="also verify the pair against this variety")
    att.add_argument("--out")
    att.set_defaults(func=cmd_attack)

    qs = sub.add_parser("qsim", help="quantum oracle simulation")
    qs.add_argument("action", choices=["check-oracle", "order"])
    qs.add_argument("--algebra", nargs="+", default=["zn-add:5", "zn-add:6", "elem-abelian:2^2", "elem-abelian:2^3"])
    qs.add_argument("--n", type=int)
    qs.add_argument("--modulus", type=int, default=15)
    qs.add_argument("--base", type=int, default=2)
    qs.add_argument("--qubits", type=int, default=8)
    qs.add_argument("--shots", type=int, default=200)
    qs.add_argument("--seed", type=int, default=0)
    qs.add_argument("--out")
    qs.set_defaults(func=cmd_qsim)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (AlgebraError, SlpError, GameError, SimulationError, ProtocolViolation, ValueError, KeyError) as exc:
        print(f"wpf: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
