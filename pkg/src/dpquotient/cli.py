"""Command-line front end.

Every subcommand builds a JSON-compatible report. `--json` prints it as sorted JSON,
otherwise it is rendered as `key: value` lines. Exit codes: 0 on success, 1 when a
computation fails, 2 on usage errors (argparse).
"""

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from typing import Any

from . import family_cubic, family_quartic
from .classify import (
    AbstractType,
    ElementLabel,
    GroupDescriptor,
    gamma_classification_for_type4,
    proposition_dp2,
)
from .config import NumericOptions, RunOptions
from .errors import DpQuotientError, ParseError
from .iskovskikh import BaseGroup, FixData, IskAction, full_pipeline
from .piclattice import LINE_COUNT, enumerate_lines, intersection_matrix
from .quotient import ScenarioName, rational_text, run_scenario
from .store import canonical_json, open_store
from .weyl import (
    LatticeIsometry,
    centralizer,
    closure_with,
    conjugate_in,
    full_weyl_group,
    index_orbits,
    invariant_basis,
    invariant_rank,
    invariant_rank_on_k_perp,
    minimal_model_search,
    parse_generator,
    parse_generators,
)

logger = logging.getLogger(__name__)

Report = dict[str, Any] | list[Any]
Handler = Callable[[argparse.Namespace, RunOptions], Report]


def _e_images(g: LatticeIsometry) -> dict[str, str]:
    lines = enumerate_lines()
    return {f"E{i}": lines[g.perm[i - 1]].label for i in range(1, 8)}


def cmd_lines(args: argparse.Namespace, run: RunOptions) -> Report:
    lines = enumerate_lines()
    if args.count:
        return {"count": len(lines)}
    report: dict[str, Any] = {"lines": [{"label": ln.label, "class": str(ln.cls)} for ln in lines]}
    if args.matrix:
        report["matrix"] = intersection_matrix().tolist()
    return report


def cmd_group(args: argparse.Namespace, run: RunOptions) -> Report:
    group = closure_with(parse_generators(args.gens), run.closure_options())
    report: dict[str, Any] = {"order": group.order}
    if not args.order:
        report["fixedRank"] = invariant_rank(group)
        report["orbitSizes"] = sorted(len(o) for o in index_orbits(group, range(LINE_COUNT)))
    return report


def cmd_centralizer(args: argparse.Namespace, run: RunOptions) -> Report:
    group = closure_with(parse_generators(args.gens), run.closure_options())
    cent = centralizer(group, full_weyl_group(run.closure_options()))
    return {"order": cent.order, "generators": [_e_images(g) for g in cent.generators]}


def cmd_invariant_rank(args: argparse.Namespace, run: RunOptions) -> Report:
    group = closure_with(parse_generators(args.gens), run.closure_options())
    return {
        "rank": invariant_rank(group),
        "kPerpRank": invariant_rank_on_k_perp(group),
        "basis": [str(c) for c in invariant_basis(group)],
    }


def cmd_conjugate(args: argparse.Namespace, run: RunOptions) -> Report:
    g, h = parse_generator(args.g), parse_generator(args.h)
    witness = conjugate_in(g, h, full_weyl_group(run.closure_options()))
    report: dict[str, Any] = {"conjugate": witness is not None}
    if witness is not None:
        report["witness"] = _e_images(witness)
    return report


def cmd_minmodel(args: argparse.Namespace, run: RunOptions) -> Report:
    gal = closure_with(parse_generators(args.gal), run.closure_options())
    result = minimal_model_search(gal)
    return {
        "k2": result.k2,
        "chain": [[ln.label for ln in step] for step in result.chain],
        "statesVisited": result.states_visited,
    }


def cmd_quotient(args: argparse.Namespace, run: RunOptions) -> Report:
    ledger = run_scenario(ScenarioName.parse(args.scenario))
    return {
        "groupOrder": ledger.group_order,
        "steps": ledger.to_json_obj(),
        "result": rational_text(ledger.result),
    }


def _parse_fix(text: str) -> FixData:
    tokens = {t.strip().lower() for t in text.split(",") if t.strip()}
    unknown = tokens - {"isolated", "curve", "fused", "unfused"}
    if unknown or ("isolated" in tokens) == ("curve" in tokens):
        raise ParseError(f"Cannot parse fixed-point data '{text}'; use isolated|curve,fused|unfused")
    return FixData(isolated_only="isolated" in tokens, fused="fused" in tokens)


def cmd_iskovskikh(args: argparse.Namespace, run: RunOptions) -> Report:
    action = IskAction(
        g0_order=args.g0,
        gb_nontrivial=args.gb,
        base=BaseGroup.parse(args.base),
        fiber_fix=tuple(_parse_fix(f) for f in args.fix or ()),
    )
    verdict = full_pipeline(action)
    return {"modelKind": verdict.model_kind.value, "k2Bound": verdict.k2_bound, "rule": verdict.rule}


def cmd_classify(args: argparse.Namespace, run: RunOptions) -> Report:
    if args.gamma:
        candidate = closure_with(parse_generators(args.gamma), run.closure_options())
        return {"order": candidate.order, "rationalAndMinimal": gamma_classification_for_type4(candidate)}
    if not args.group:
        raise ParseError("classify needs --group (with --types) or --gamma")
    labels = [ElementLabel(t.strip()) for t in (args.types or "").split(",") if t.strip()]
    descriptor = GroupDescriptor(
        AbstractType.parse(args.group),
        {f"class{i}": label for i, label in enumerate(labels, start=1)},
        contains_geiser=args.geiser or ElementLabel.TYPE0 in labels,
        name=args.group,
    )
    return proposition_dp2(descriptor).to_json_obj()


def _family_quartic(args: argparse.Namespace, run: RunOptions) -> Report:
    numeric = NumericOptions(tolerance=args.tolerance)
    if args.table4:
        return family_quartic.verdict_matrix(numeric)
    if args.catalog:
        return [
            {"family": ln.family, "index": ln.index, "label": ln.label}
            for ln in family_quartic.catalog(options=numeric)
        ]
    if args.dictionary:
        if run.store_path:
            store = open_store(run.store_path)
            try:
                with store:
                    return family_quartic.pin_dictionary(store, numeric)
            finally:
                store.dispose()
        return family_quartic.dictionary_certificate(numeric)
    if args.example is None:
        raise ParseError("family quartic needs --example, --table4, --catalog or --dictionary")
    preset = family_quartic.preset(args.example)
    group = family_quartic.FamilyGroup.parse(args.group or "trivial")
    galois = family_quartic.galois_model(preset, numeric)
    x = family_quartic.x_rationality(preset, numeric)
    quotient = family_quartic.quotient_verdict(group, preset, numeric)
    return {
        "example": preset.name,
        "group": group.name,
        "groupOrder": group.order,
        "caseIndex": proposition_dp2(family_quartic.describe(group)).case_index,
        "galois": {"order": galois.group_order, "families": galois.per_family},
        "xRational": x.verdict.value,
        "xRule": x.rule,
        "quotient": quotient.verdict.value,
        "quotientRule": quotient.rule,
    }


def _family_cubic(args: argparse.Namespace, run: RunOptions) -> Report:
    if args.example:
        params = family_cubic.preset(args.example).params
    else:
        if args.A is None or args.B is None or args.C is None:
            raise ParseError("family cubic needs --example or all of --A, --B and --C")
        params = family_cubic.CubicFamilyParams.of(args.A, args.B, args.C, args.field)
    return family_cubic.report(params)


def cmd_family(args: argparse.Namespace, run: RunOptions) -> Report:
    if args.family == "quartic":
        return _family_quartic(args, run)
    return _family_cubic(args, run)


def _render_text(report: Report) -> str:
    if isinstance(report, list):
        return "\n".join(canonical_json(item) for item in report)
    out = []
    for key in sorted(report):
        value = report[key]
        out.append(f"{key}: {value if isinstance(value, (str, int, bool)) else canonical_json(value)}")
    return "\n".join(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpquotient", description=__doc__.splitlines()[0])
    parser.add_argument("--json", action="store_true", help="print the report as JSON")
    parser.add_argument("--cap", type=int, default=RunOptions().cap, help="closure element cap")
    parser.add_argument("--store", metavar="PATH", help="record reports in a sqlite file")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lines", help="the 56 lines")
    p.add_argument("--count", action="store_true")
    p.add_argument("--matrix", action="store_true")
    p.set_defaults(handler=cmd_lines)

    p = sub.add_parser("group", help="closure of generators")
    p.add_argument("--gens", required=True)
    p.add_argument("--order", action="store_true")
    p.set_defaults(handler=cmd_group)

    p = sub.add_parser("centralizer", help="centralizer in W(E7)")
    p.add_argument("--gens", required=True)
    p.set_defaults(handler=cmd_centralizer)

    p = sub.add_parser("invariant-rank", help="rank of the invariant Picard lattice")
    p.add_argument("--gens", required=True)
    p.set_defaults(handler=cmd_invariant_rank)

    p = sub.add_parser("conjugate", help="conjugacy of two elements in W(E7)")
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)
    p.set_defaults(handler=cmd_conjugate)

    p = sub.add_parser("minmodel", help="equivariant minimal model search")
    p.add_argument("--gal", required=True)
    p.set_defaults(handler=cmd_minmodel)

    p = sub.add_parser("quotient", help="K^2 ledger of a quotient scenario")
    p.add_argument("--scenario", required=True)
    p.set_defaults(handler=cmd_quotient)

    p = sub.add_parser("iskovskikh", help="quotients of an Iskovskikh surface")
    p.add_argument("--g0", type=int, default=1)
    p.add_argument("--gb", action="store_true")
    p.add_argument("--base", default="trivial")
    p.add_argument("--fix", action="append", help="isolated|curve,fused|unfused per base element")
    p.set_defaults(handler=cmd_iskovskikh)

    p = sub.add_parser("classify", help="sort a group into the exceptional cases")
    p.add_argument("--group")
    p.add_argument("--types")
    p.add_argument("--geiser", action="store_true")
    p.add_argument("--gamma")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("family", help="the two explicit families")
    p.add_argument("family", choices=("quartic", "cubic"))
    p.add_argument("--example")
    p.add_argument("--group")
    p.add_argument("--table4", action="store_true")
    p.add_argument("--catalog", action="store_true")
    p.add_argument("--dictionary", action="store_true")
    p.add_argument("--tolerance", type=float, default=NumericOptions().tolerance)
    p.add_argument("--A")
    p.add_argument("--B")
    p.add_argument("--C")
    p.add_argument("--field", default="w")
    p.set_defaults(handler=cmd_family)
    return parser


_SIGNED_OPTIONS = frozenset({"--A", "--B", "--C", "--field"})


def _attach_signed_values(argv: Sequence[str]) -> list[str]:
    """Joins a signed value to its option: `--A -1` becomes `--A=-1`"""
    out: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in _SIGNED_OPTIONS:
            following = next(tokens, None)
            if following is None:
                out.append(token)
            elif following.startswith("-") and not following.startswith("--"):
                out.append(f"{token}={following}")
            else:
                out.extend((token, following))
            continue
        out.append(token)
    return out


_GLOBAL_KEYS = {"json", "cap", "store", "verbose", "handler", "command"}


def _record(run: RunOptions, args: argparse.Namespace, report: Report) -> None:
    if not run.store_path:
        return
    key = canonical_json({k: v for k, v in sorted(vars(args).items()) if k not in _GLOBAL_KEYS})
    store = open_store(run.store_path)
    try:
        with store:
            store.put(args.command, key, report)
    finally:
        store.dispose()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_attach_signed_values(sys.argv[1:] if argv is None else argv))
    run = RunOptions(json_output=args.json, cap=args.cap, store_path=args.store, verbose=args.verbose)
    if run.verbose:
        logging.basicConfig(
            level=logging.DEBUG, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
        )
    try:
        report = args.handler(args, run)
        _record(run, args, report)
    except (DpQuotientError, ValueError) as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1
    if run.json_output:
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print(_render_text(report))
    return 0
