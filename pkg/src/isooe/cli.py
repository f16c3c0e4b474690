"""Command-line front end.

Exit codes: 0 success, 1 invariant violation (report carries a
counterexample), 2 usage error.  JSON reports carry ``"schema": "1"`` and
the run configuration; CSV reports start with a ``# config`` comment line.
Reports are deterministic: the same arguments give byte-identical output.

CSV columns
    tower analyze:       level,size,bipartite,normal,gap
    coloring correlate:  word,n,exact,mc,stderr,samples
"""

from __future__ import annotations

import argparse
import json
import sys

from . import coloring, keyed, schreier, treeiso
from .words import GroupPreset, ReducedWord

SCHEMA = "1"


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= keyed.MASK:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _natural(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _exponents(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"exponents must be comma-separated integers: {text!r}") from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def _emit_json(config: dict, body: dict) -> None:
    print(_dump({"schema": SCHEMA, "config": config, **body}))


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _load_action(path: str, flag: str) -> schreier.CosetAction:
    try:
        with open(path, encoding="utf-8") as fh:
            action = schreier.CosetAction.from_json(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{flag}: cannot read action from {path}: {exc}") from None
    if not action.transitive:
        raise UsageError(f"{flag}: action in {path} is not transitive")
    return action


def cmd_schreier_analyze(args) -> int:
    action = _load_action(args.file, "FILE")
    config = {**_config(args), "action": action.to_json()}
    try:
        report = schreier.lemma_even_crosscheck(action)
    except schreier.EquivalenceViolation as exc:
        _emit_json(config, {"ok": False, "counterexample": {"action": action.to_json(), "error": str(exc)}})
        return 1
    _emit_json(config, {"ok": True, "report": report.to_json()})
    return 0


def cmd_schreier_bruteforce(args) -> int:
    result = schreier.bruteforce_lemma(args.points, args.trials, args.seed, args.rank)
    _emit_json(_config(args), {"ok": result["violations"] == 0, "result": result})
    return 0 if result["violations"] == 0 else 1


def cmd_tower_analyze(args) -> int:
    if len(args.exponents) != 2:
        raise UsageError("--exponents: give one exponent per generator of F_2, e.g. 1,1")
    try:
        levels = schreier.tower(args.base, args.step, args.depth, args.exponents)
    except ValueError as exc:
        raise UsageError(f"--exponents: {exc}") from None
    print("# config " + json.dumps({"schema": SCHEMA, **_config(args)}, sort_keys=True))
    print("level,size,bipartite,normal,gap")
    any_bipartite = False
    for j, action in enumerate(levels):
        bip = schreier.is_bipartite(action)
        any_bipartite |= bip
        lam, _ = schreier.spectral_gap(action)
        print(f"{j},{action.n},{str(bip).lower()},{str(schreier.is_normal(action)).lower()},{1.0 - lam:.17g}")
    if any_bipartite:
        print("bipartite level in tower: the parity criteria require non-bipartite quotients", file=sys.stderr)
        return 1
    return 0


def cmd_iso_verify(args) -> int:
    result = treeiso.verify_invariants(args.rank, args.radius, args.samples, args.seed)
    _emit_json(_config(args), result)
    return 0 if result["ok"] else 1


def cmd_oe_verify(args) -> int:
    action = _load_action(args.subgroup, "--subgroup")
    if action.rank != args.rank:
        raise UsageError(f"--subgroup: action has {action.rank} generators but --rank is {args.rank}")
    if args.radius < 2 * args.max_len + 2:
        raise UsageError(f"--radius: orbit search to --max-len {args.max_len} needs radius >= {2 * args.max_len + 2}")
    result = treeiso.verify_construction(action, args.radius, args.max_len, args.samples, args.seed)
    _emit_json({**_config(args), "action": action.to_json()}, result)
    return 0 if result["ok"] else 1


def _fmt(x) -> str:
    return "" if x is None else f"{x:.17g}"


def cmd_coloring_correlate(args) -> int:
    if args.mc > 0 and args.seed is None:
        raise UsageError("--seed is required when --mc > 0")
    if args.word is not None:
        try:
            words = [ReducedWord.parse(args.word, coloring.F2)]
        except ValueError as exc:
            raise UsageError(f"--word: {exc}") from None
    else:
        a = ReducedWord.parse("a", coloring.F2)
        words = [coloring.F2.identity()]
        for _ in range(args.n_max):
            words.append(words[-1] * a)
    seeds = keyed.derive_seeds(args.seed, len(words)) if args.mc > 0 else [0] * len(words)
    print("# config " + json.dumps({"schema": SCHEMA, **_config(args)}, sort_keys=True))
    print("word,n,exact,mc,stderr,samples")
    for w, s in zip(words, seeds):
        row = coloring.mc_correlation(args.action, w, args.i, args.j, args.mc, int(s))
        print(f"{row.word},{row.n},{_fmt(row.exact)},{_fmt(row.mc)},{_fmt(row.stderr)},{row.samples}")
    return 0


def cmd_coloring_verify(args) -> int:
    result = coloring.verify_invariants(args.samples, args.seed, args.max_len)
    _emit_json(_config(args), result)
    return 0 if result["ok"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isooe", description="Isometric orbit equivalence toolkit for free groups.")
    top = parser.add_subparsers(dest="command", required=True)

    sch = top.add_parser("schreier", help="finite coset actions").add_subparsers(dest="sub", required=True)
    p = sch.add_parser("analyze", help="parity criteria, normality and spectral gap of an action file")
    p.add_argument("file", metavar="FILE")
    p.set_defaults(func=cmd_schreier_analyze)
    p = sch.add_parser("bruteforce-lemma", help="cross-check the parity criteria on random actions")
    p.add_argument("--points", type=_positive, required=True, help="largest number of points")
    p.add_argument("--trials", type=_natural, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--rank", type=_positive, default=2)
    p.set_defaults(func=cmd_schreier_bruteforce)

    tow = top.add_parser("tower", help="towers of cyclic quotients").add_subparsers(dest="sub", required=True)
    p = tow.add_parser("analyze")
    p.add_argument("--base", type=_positive, required=True)
    p.add_argument("--step", type=_positive, required=True)
    p.add_argument("--depth", type=_positive, required=True)
    p.add_argument("--exponents", type=_exponents, required=True, help="e1,e2")
    p.set_defaults(func=cmd_tower_analyze)

    iso = top.add_parser("iso", help="truncated tree isometries").add_subparsers(dest="sub", required=True)
    p = iso.add_parser("verify", help="cocycle invariants on Haar samples")
    p.add_argument("--rank", type=_positive, required=True)
    p.add_argument("--radius", type=_natural, required=True)
    p.add_argument("--samples", type=_natural, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.set_defaults(func=cmd_iso_verify)

    oe = top.add_parser("oe", help="the quotient/diagonal construction").add_subparsers(dest="sub", required=True)
    p = oe.add_parser("verify", help="intertwining and distance preservation")
    p.add_argument("--rank", type=_positive, required=True)
    p.add_argument("--radius", type=_natural, required=True)
    p.add_argument("--subgroup", required=True, help="action JSON file")
    p.add_argument("--max-len", type=_natural, required=True)
    p.add_argument("--samples", type=_natural, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.set_defaults(func=cmd_oe_verify)

    col = top.add_parser("coloring", help="rainbow colourings").add_subparsers(dest="sub", required=True)
    p = col.add_parser("correlate", help="exact and Monte Carlo root-colour correlations")
    p.add_argument("--action", choices=("star", "twisted"), required=True)
    p.add_argument("--word", help="single word; omit for the series a^n, n = 0..--n-max")
    p.add_argument("--i", type=int, choices=coloring.COLORS, required=True, help="root colour before")
    p.add_argument("--j", type=int, choices=coloring.COLORS, required=True, help="root colour after")
    p.add_argument("--n-max", type=_natural, default=20)
    p.add_argument("--mc", type=_natural, default=0, help="Monte Carlo samples (0 = exact only)")
    p.add_argument("--seed", type=_seed)
    p.set_defaults(func=cmd_coloring_correlate)
    p = col.add_parser("verify", help="rainbow, equivariance and cocycle checks")
    p.add_argument("--samples", type=_natural, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--max-len", type=_natural, default=6)
    p.set_defaults(func=cmd_coloring_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
