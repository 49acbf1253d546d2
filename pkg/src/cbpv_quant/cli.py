"""Command-line front end: typecheck, eval, sat, compare, distinguish, laws.

A run is configured by an optional `cbpv-quant.toml` key-value file in the
working directory (or `--config PATH`), overridden by flags.  All randomness
is seeded, so identical invocations produce byte-identical reports.

Exit codes: 0 no refutation/distinction, 1 distinguished/refuted (or law
failures), 2 errors or inconclusive-only findings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import Optional

from .config import ConfigError, RunConfig, Runtime, build_runtime, load_config
from .equivalence import (
    Distinguished,
    NoDistinctionFound,
    compare,
    find_distinguishing_formula,
)
from .formulas import parse_formula, print_formula
from .laws import (
    LawParams,
    run_law_suite,
    standard_modalities,
)
from .machine import eval_tree
from .parser import ParseError, parse_program
from .satisfaction import Satisfier, satisfies_exact
from .suites import Pools, enumerate_basic_formulas
from .syntax import CbpvError
from .trees import Leaf, NatFamily, Node, _Unknown
from .typecheck import EMPTY, TypeCheckError, infer_type


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _render_tree(t, out: list[str], indent: int = 0, prefix: str = "") -> None:
    pad = "  " * indent + prefix
    if isinstance(t, _Unknown):
        out.append(pad + "?")
    elif isinstance(t, Leaf):
        term = t.value
        from .syntax import Return

        if isinstance(term, Return):
            out.append(pad + f"ret {term.value}")
        else:
            out.append(pad + f"term {term}")
    else:
        assert isinstance(t, Node)
        out.append(pad + _node_label(t) + ":")
        ch = t.children
        if isinstance(ch, NatFamily):
            for i in range(ch.width):
                _render_tree(ch.child(i), out, indent + 1, f"{i}: ")
        else:
            for c in ch:
                _render_tree(c, out, indent + 1)


def _node_label(t: Node) -> str:
    if t.param is None:
        return t.op
    if t.op.endswith("]"):
        return f"{t.op[:-1]}:={t.param}]"
    return f"{t.op}[{t.param}]"


def _tree_json(t):
    if isinstance(t, _Unknown):
        return {"unknown": True}
    if isinstance(t, Leaf):
        return {"leaf": str(t.value)}
    assert isinstance(t, Node)
    ch = t.children
    if isinstance(ch, NatFamily):
        kids = [_tree_json(ch.child(i)) for i in range(ch.width)]
        return {"op": t.op, "param": t.param, "children": kids, "family_width": ch.width}
    return {"op": t.op, "param": t.param, "children": [_tree_json(c) for c in ch]}


def _interval_json(space, iv):
    return {"lo": space.render(iv.lo), "hi": space.render(iv.hi), "exact": iv.exact}


class Reporter:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.lines: list[str] = []
        self.doc: dict = {}

    def text(self, line: str):
        self.lines.append(line)

    def flush(self) -> str:
        if self.as_json:
            return json.dumps(self.doc, indent=2, sort_keys=True)
        return "\n".join(self.lines)


def _runtime(args) -> Runtime:
    if args.config:
        cfg = load_config(args.config)
    elif os.path.exists("cbpv-quant.toml"):
        cfg = load_config("cbpv-quant.toml")
    else:
        cfg = RunConfig()
    updates = {}
    for key in ("signature", "fuel", "suite_size", "seed", "explore_width", "value_bound"):
        v = getattr(args, key, None)
        if v is not None:
            updates[key] = v
    if getattr(args, "locations", None):
        updates["locations"] = tuple(args.locations.split(","))
    if getattr(args, "errors", None):
        updates["errors"] = tuple(args.errors.split(","))
    if getattr(args, "numerals", None):
        updates["numerals"] = tuple(int(x) for x in args.numerals.split(","))
    if updates:
        cfg = replace(cfg, **updates)
    return build_runtime(cfg)


def _pools(rt: Runtime) -> Pools:
    return Pools(numerals=rt.config.numerals)


# --------------------------------------------------------------------------
# Verbs


def cmd_typecheck(args) -> tuple[int, str]:
    rt = _runtime(args)
    rep = Reporter(args.json)
    term = parse_program(_read_input(args.program), rt.signature)
    ty = infer_type(EMPTY, term, rt.signature)
    rep.text(f"type: {ty}")
    rep.doc = {"type": str(ty)}
    return 0, rep.flush()


def cmd_eval(args) -> tuple[int, str]:
    rt = _runtime(args)
    rep = Reporter(args.json)
    term = parse_program(_read_input(args.program), rt.signature)
    infer_type(EMPTY, term, rt.signature)
    fuel = args.fuel if args.fuel is not None else rt.config.fuel
    tree = eval_tree(term, fuel, rt.signature, rt.width)
    lines: list[str] = []
    _render_tree(tree, lines)
    for line in lines:
        rep.text(line)
    rep.doc = {"fuel": fuel, "tree": _tree_json(tree)}
    return 0, rep.flush()


def cmd_sat(args) -> tuple[int, str]:
    rt = _runtime(args)
    rep = Reporter(args.json)
    term = parse_program(_read_input(args.program), rt.signature)
    phi = parse_formula(_read_input(args.formula), rt.signature, rt.space)
    sat = Satisfier(rt.signature, rt.modalities, rt.space, rt.width)
    fuel = args.fuel if args.fuel is not None else rt.config.fuel
    if args.exact:
        res = satisfies_exact(sat, term, phi, fuel)
    else:
        res = sat.satisfies(term, phi, fuel)
    iv = res.interval
    fragment = "positive" if res.positive_fragment else "general"
    if iv.exact:
        rep.text(f"value = {rt.space.render(iv.lo)}")
    else:
        rep.text(f"lo = {rt.space.render(iv.lo)}, hi = {rt.space.render(iv.hi)}")
        if args.exact:
            rep.text(f"exactness not reached at fuel {res.fuel_used}")
    rep.text(f"fragment = {fragment}")
    rep.doc = {
        "interval": _interval_json(rt.space, iv),
        "fragment": fragment,
        "fuel_used": res.fuel_used,
    }
    return 0, rep.flush()


def cmd_compare(args) -> tuple[int, str]:
    rt = _runtime(args)
    rep = Reporter(args.json)
    sat = Satisfier(rt.signature, rt.modalities, rt.space, rt.width)
    left = parse_program(_read_input(args.left), rt.signature)
    right = parse_program(_read_input(args.right), rt.signature)
    ty = infer_type(EMPTY, left, rt.signature)
    suite_size = args.suite_size if args.suite_size is not None else rt.config.suite_size
    fuel = args.fuel if args.fuel is not None else rt.config.fuel
    suite = enumerate_basic_formulas(ty, suite_size, _pools(rt), rt.modalities)
    directions = ["both"] if not args.both else ["geq", "leq"]
    verdicts = [compare(left, right, suite, fuel, sat, d) for d in directions]
    code = 0
    docs = []
    for d, v in zip(directions, verdicts):
        if isinstance(v, Distinguished):
            code = 1
            rep.text(
                f"distinguished: witness {print_formula(v.formula)} "
                f"left {rt.space.render(v.left.lo)} right {rt.space.render(v.right.lo)} "
                f"({v.direction})"
            )
            docs.append(
                {
                    "verdict": "distinguished",
                    "witness": print_formula(v.formula),
                    "left": _interval_json(rt.space, v.left),
                    "right": _interval_json(rt.space, v.right),
                    "direction": v.direction,
                }
            )
        else:
            kind = "no distinction found" if isinstance(v, NoDistinctionFound) else "refines up to bounds"
            rep.text(f"{kind}: {v.bounds.describe()}")
            docs.append(
                {
                    "verdict": "no-distinction" if isinstance(v, NoDistinctionFound) else "refines",
                    "bounds": v.bounds.__dict__,
                }
            )
            if code == 0 and v.bounds.inconclusive > 0:
                code = 2
    rep.doc = {"results": docs}
    return code, rep.flush()


def cmd_distinguish(args) -> tuple[int, str]:
    rt = _runtime(args)
    rep = Reporter(args.json)
    sat = Satisfier(rt.signature, rt.modalities, rt.space, rt.width)
    left = parse_program(_read_input(args.left), rt.signature)
    right = parse_program(_read_input(args.right), rt.signature)
    fuel = args.fuel if args.fuel is not None else rt.config.fuel
    pools = Pools(numerals=rt.config.numerals, constants=_default_constants(rt))
    found = find_distinguishing_formula(
        left, right, args.max_size, sat, pools, fuel_schedule=(max(2, fuel // 4), fuel)
    )
    if found is None:
        rep.text(f"no distinguishing formula up to size {args.max_size} at fuel {fuel}")
        rep.doc = {"witness": None, "max_size": args.max_size, "fuel": fuel}
        return 0, rep.flush()
    phi, direction = found
    rep.text(f"witness {print_formula(phi)} ({direction})")
    rep.doc = {"witness": print_formula(phi), "direction": direction}
    return 1, rep.flush()


def _default_constants(rt: Runtime):
    space = rt.space
    if space.name == "unit":
        return (0.25, 0.5, 1.0)
    if space.name == "cost":
        return (0.0, 1.0, 3.0)
    return (space.top,)


def cmd_laws(args) -> tuple[int, str]:
    rt = _runtime(args)
    rep = Reporter(args.json)
    params = LawParams(
        samples=args.samples,
        seed=args.seed if args.seed is not None else rt.config.seed,
        depth=args.depth,
        tolerance=rt.config.tolerance,
    )
    mods = standard_modalities(rt.store)
    if args.modality:
        wanted = args.modality.split(",")
        missing = [w for w in wanted if w not in mods]
        if missing:
            raise ConfigError(f"unknown modalities for the law suite: {missing}")
        selected = [mods[w] for w in wanted]
    else:
        selected = list(mods.values())
    report = run_law_suite(
        selected,
        params,
        include_relator=not args.no_relator,
        runtime=rt if not args.no_congruence else None,
        congruence_trials=args.trials,
    )
    docs = []
    for r in report.results:
        rep.text(r.line())
        docs.append(
            {
                "law": r.law,
                "subject": r.subject,
                "runs": r.runs,
                "passed": r.passed,
                "failures": list(r.failures[:3]),
            }
        )
    rep.text("all laws pass" if report.passed else "law failures detected")
    rep.doc = {"results": docs, "passed": report.passed}
    return (0 if report.passed else 1), rep.flush()


# --------------------------------------------------------------------------
# Entry point


def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cbpv-quant",
        description="Quantitative behavioural reasoning for call-by-push-value programs",
    )
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, fuel=True):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--config", help="configuration file (default ./cbpv-quant.toml if present)")
        sp.add_argument("--signature", help="effect signature selector")
        sp.add_argument("--locations", help="store locations, comma-separated")
        sp.add_argument("--errors", help="error labels, comma-separated")
        sp.add_argument("--value-bound", dest="value_bound", type=int)
        sp.add_argument("--explore-width", dest="explore_width", type=int)
        sp.add_argument("--numerals", help="numeral pool, comma-separated")
        sp.add_argument("--seed", type=int)
        if fuel:
            sp.add_argument("--fuel", type=int)

    sp = sub.add_parser("typecheck", help="infer the type of a program")
    sp.add_argument("program")
    common(sp, fuel=False)
    sp.set_defaults(fn=cmd_typecheck)

    sp = sub.add_parser("eval", help="print a program's effect tree")
    sp.add_argument("program")
    common(sp)
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("sat", help="degree to which a program satisfies a formula")
    sp.add_argument("program")
    sp.add_argument("formula")
    sp.add_argument("--exact", action="store_true", help="double the fuel until exact (capped)")
    common(sp)
    sp.set_defaults(fn=cmd_sat)

    sp = sub.add_parser("compare", help="behavioural comparison over a formula suite")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--suite-size", dest="suite_size", type=int)
    sp.add_argument("--both", action="store_true", help="report each direction separately")
    common(sp)
    sp.set_defaults(fn=cmd_compare)

    sp = sub.add_parser("distinguish", help="search for a distinguishing formula")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--max-size", dest="max_size", type=int, default=4)
    common(sp)
    sp.set_defaults(fn=cmd_distinguish)

    sp = sub.add_parser("laws", help="run the modality law suites")
    sp.add_argument("--modality", help="restrict to these modalities, comma-separated")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--trials", type=int, default=100, help="congruence spot-check trials")
    sp.add_argument("--no-relator", action="store_true")
    sp.add_argument("--no-congruence", action="store_true")
    common(sp)
    sp.set_defaults(fn=cmd_laws)
    return p


def run(argv: Optional[list[str]] = None) -> tuple[int, str]:
    """Parse arguments, dispatch, and return (exit code, report text)."""
    args = build_arg_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, TypeCheckError, ConfigError) as e:
        return 2, f"error: {e}"
    except FileNotFoundError as e:
        return 2, f"error: {e}"
    except CbpvError as e:
        return 2, f"error: {e}"


def main(argv: Optional[list[str]] = None) -> int:
    code, report = run(argv)
    print(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
