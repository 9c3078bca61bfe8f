"""Command line front end.

Thirteen subcommands cover parsing, frame validation, model checking,
validity search, complex algebras, prime filter extensions, disjoint
unions, generated subframes, morphism checking, universe enumeration,
frame-class computation, closure audits, and Graphviz export.

Exit codes: 0 success, 1 property failure (lawless frame, invalid
formula, failed morphism or audit), 2 usage or input-format error,
3 size guard tripped.  Output is deterministic: identical inputs and
flags produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algebras import complex_algebra
from .audit import AuditBudget, audit_closure
from .caps import Caps, caps_from_env
from .dot import frame_to_dot
from .duality import pfe_with_unit
from .errors import (
    CycleError,
    FormatError,
    FrameConditionError,
    GtwError,
    KindError,
    KindMismatch,
    MissingLetterError,
    ParseError,
    SignatureError,
    SizeGuard,
)
from .frames import (
    Model,
    check_frame_morphism,
    disjoint_union,
    frame_validates,
    generate_subframe,
    truth_set,
)
from .jsonio import (
    algebra_to_json,
    dumps,
    formula_to_json,
    frame_from_json,
    frame_to_json,
    map_graph_from_json,
    valuation_from_json,
    valuation_to_json,
)
from .order import PosetMap, iter_bits
from .syntax import (
    Signature,
    is_rank1,
    is_rank1_axiom,
    parse,
    parse_axiom_pair,
)
from .universe import build_universe, fr_class

__all__ = ["main"]

_KIND_CHOICES = ("box", "im", "cin", "si")
_USAGE_ERRORS = (ParseError, SignatureError, FormatError, KindError,
                 KindMismatch, MissingLetterError, CycleError, ValueError)


def _build_parser() -> argparse.ArgumentParser:
    caps_flags = argparse.ArgumentParser(add_help=False)
    caps_flags.add_argument("--seed", type=int, default=0,
                            help="seed for any sampled enumeration")
    for flag in ("max-valuations", "max-subset-scan", "max-map-search",
                 "max-cin-size", "max-universe-size"):
        caps_flags.add_argument(f"--{flag}", type=int, default=None,
                                help=f"override the {flag.replace('-', ' ')} cap")

    top = argparse.ArgumentParser(prog="gtw",
                                  description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def cmd(name, help_text, **kw):
        return sub.add_parser(name, help=help_text, parents=[caps_flags], **kw)

    p = cmd("parse", "parse a formula and report its rank-1 status")
    p.add_argument("--sig", required=True, choices=_KIND_CHOICES)
    p.add_argument("--formula", required=True)

    p = cmd("check-frame", "validate a frame file against its kind's laws")
    p.add_argument("--frame", required=True)

    p = cmd("mc", "evaluate a formula in a model and print its truth set")
    p.add_argument("--frame", required=True)
    p.add_argument("--valuation", required=True)
    p.add_argument("--formula", required=True)

    p = cmd("valid", "search all valuations for a counterexample")
    p.add_argument("--frame", required=True)
    p.add_argument("--formula", required=True)

    p = cmd("ca", "print the complex algebra of a frame")
    p.add_argument("--frame", required=True)

    p = cmd("pe", "print the prime filter extension and the unit map")
    p.add_argument("--frame", required=True)
    p.add_argument("--variant", choices=("tau", "sigma"), default="tau")

    p = cmd("du", "form the disjoint union of frame files")
    p.add_argument("--frames", required=True, nargs="+")

    p = cmd("gensub", "generate the subframe closed under the relation")
    p.add_argument("--frame", required=True)
    p.add_argument("--seed-states", required=True,
                   help="comma-separated state indices, e.g. 1,2")

    p = cmd("morph", "check that a map file is a frame morphism")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--from", required=True, dest="src")
    p.add_argument("--to", required=True, dest="dst")

    p = cmd("enum", "enumerate one frame per isomorphism class")
    p.add_argument("--kind", required=True, choices=_KIND_CHOICES)
    p.add_argument("--n", required=True, type=int)

    p = cmd("fr", "frames of a universe validating every axiom in a file")
    p.add_argument("--kind", required=True, choices=_KIND_CHOICES)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--axioms", required=True)

    p = cmd("audit", "audit a frame class for closure properties")
    p.add_argument("--kind", required=True, choices=_KIND_CHOICES)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--axioms", required=True)
    p.add_argument("--variant", choices=("tau", "sigma"), default="tau")
    p.add_argument("--max-checks", type=int, default=None)
    p.add_argument("--union-size-limit", type=int, default=8)
    p.add_argument("--report-dir", default=None,
                   help="also write audit.json, sections.csv, sections.png")

    p = cmd("dot", "print a frame in Graphviz format")
    p.add_argument("--frame", required=True)

    return top


def _caps_for(args) -> Caps:
    overrides = dict(
        max_valuations=args.max_valuations,
        max_subset_scan=args.max_subset_scan,
        max_map_search=args.max_map_search,
        max_cin_size=args.max_cin_size,
    )
    if args.max_universe_size is not None:
        for kind in _KIND_CHOICES:
            overrides[f"universe_{kind}_max"] = args.max_universe_size
    return caps_from_env().with_overrides(**overrides)


def _load(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror or e}") from None
    except json.JSONDecodeError as e:
        raise FormatError(f"{path} is not valid JSON: {e}") from None


def _load_axioms(path: str, sig: Signature) -> tuple:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror or e}") from None
    out = []
    for line in lines:
        text = line.strip()
        if text and not text.startswith("#"):
            out.append(parse(text, sig))
    return tuple(out)


def _emit(doc) -> None:
    sys.stdout.write(dumps(doc))


def _run(args, caps: Caps) -> int:
    command = args.command

    if command == "parse":
        sig = Signature(args.sig)
        if "<->" in args.formula:
            ax = parse_axiom_pair(args.formula, sig)
            _emit({"lhs": formula_to_json(ax.lhs),
                   "rhs": formula_to_json(ax.rhs),
                   "rank1": is_rank1_axiom(ax)})
        else:
            f = parse(args.formula, sig)
            _emit({"ast": formula_to_json(f), "rank1": is_rank1(f)})
        return 0

    if command == "check-frame":
        frame_from_json(_load(args.frame), caps=caps)
        print("ok")
        return 0

    if command == "mc":
        frame = frame_from_json(_load(args.frame), caps=caps)
        v = valuation_from_json(_load(args.valuation), frame, caps=caps)
        f = parse(args.formula, frame.signature)
        ts = truth_set(Model(frame, v), f)
        _emit({"truth_set": list(iter_bits(ts))})
        return 0

    if command == "valid":
        frame = frame_from_json(_load(args.frame), caps=caps)
        f = parse(args.formula, frame.signature)
        res = frame_validates(frame, f, caps=caps)
        if res.valid:
            print("valid")
            return 0
        print("invalid")
        _emit({"valuation": valuation_to_json(res.valuation),
               "state": res.state})
        return 1

    if command == "ca":
        frame = frame_from_json(_load(args.frame), caps=caps)
        _emit(algebra_to_json(complex_algebra(frame, caps=caps)))
        return 0

    if command == "pe":
        frame = frame_from_json(_load(args.frame), caps=caps)
        pe, unit = pfe_with_unit(frame, transform=args.variant, caps=caps)
        _emit({"frame": frame_to_json(pe),
               "eta": [[x, y] for x, y in enumerate(unit)]})
        return 0

    if command == "du":
        frames = [frame_from_json(_load(p), caps=caps) for p in args.frames]
        union, injections = disjoint_union(frames, caps=caps)
        _emit({"frame": frame_to_json(union),
               "injections": [list(m.graph) for m in injections]})
        return 0

    if command == "gensub":
        frame = frame_from_json(_load(args.frame), caps=caps)
        try:
            seeds = [int(s) for s in args.seed_states.split(",") if s.strip()]
        except ValueError:
            raise FormatError("seed states must be integers") from None
        if not seeds or any(not 0 <= s < frame.size for s in seeds):
            raise FormatError("seed states must index frame states")
        sub, inclusion = generate_subframe(frame, sum(1 << s for s in seeds),
                                           caps=caps)
        _emit({"frame": frame_to_json(sub), "inclusion": list(inclusion.graph)})
        return 0

    if command == "morph":
        graph = map_graph_from_json(_load(args.map_path))
        src = frame_from_json(_load(args.src), caps=caps)
        dst = frame_from_json(_load(args.dst), caps=caps)
        fail = check_frame_morphism(PosetMap(src.base, dst.base, graph),
                                    src, dst, caps=caps)
        if fail is None:
            print("morphism")
            return 0
        print(f"not a morphism: {fail}")
        return 1

    if command == "enum":
        u = build_universe(args.kind, args.n, caps=caps, seed=args.seed)
        _emit([frame_to_json(f) for f in u.frames])
        return 0

    if command == "fr":
        u = build_universe(args.kind, args.n, caps=caps, seed=args.seed)
        members = fr_class(_load_axioms(args.axioms, Signature(args.kind)),
                           u, caps=caps)
        _emit([frame_to_json(f) for f in members])
        return 0

    if command == "audit":
        u = build_universe(args.kind, args.n, caps=caps, seed=args.seed)
        axioms = _load_axioms(args.axioms, Signature(args.kind))
        members = fr_class(axioms, u, caps=caps)
        budget = AuditBudget(max_checks=args.max_checks,
                             union_size_limit=args.union_size_limit)
        report = audit_closure(members, u, formulas=axioms, budget=budget,
                               transform=args.variant, caps=caps)
        _emit(report.as_json())
        if args.report_dir is not None:
            from .report import write_report
            write_report(report, args.report_dir)
        return 0 if report.passed else 1

    if command == "dot":
        frame = frame_from_json(_load(args.frame), caps=caps)
        sys.stdout.write(frame_to_dot(frame))
        return 0

    raise AssertionError(f"unhandled command {command!r}")


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    try:
        return _run(args, _caps_for(args))
    except _USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FrameConditionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SizeGuard as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except GtwError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
