"""Command-line interface.

Exit codes: 0 success, 2 unreadable or invalid input, 3 a size cap was
hit, 4 a contract failed (for instance a partition that is not an
equilibrium, or a verification mismatch).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .bounds import lower_bound, upper_bound
from .engine import (
    check_equilibrium,
    enumerate_equilibria,
    make_profile,
    max_steps,
    most_informative,
    reduce_step,
)
from .errors import (
    ContractViolation,
    DegenerateCaseError,
    InputError,
    NarrativeEqError,
    ResourceLimitError,
)
from .naive import persuasion_sets
from .scenario import Game

EXIT_OK, EXIT_PARSE, EXIT_RESOURCE, EXIT_CONTRACT = 0, 2, 3, 4

log = logging.getLogger("narrative_eq")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def parse_cuts(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise InputError(f"partition must be comma-separated cut positions, got {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    scenario = io.load_scenario(args.scenario)
    N = max_steps(scenario)
    reports = most_informative(scenario) if args.most_informative else enumerate_equilibria(scenario)
    _emit(io.dumps(io.equilibria_to_json(scenario, reports, N)), args.out)
    return EXIT_OK


def _bounds_rows(args):
    if args.h_sigma is not None:
        sigmas = [args.h_sigma]
    else:
        sigmas = range(args.K + 1)
    for s in sigmas:
        game = Game.from_sigma(
            args.K, s, rule=io.parse_rule(args.rule), exclude_empty=args.exclude_empty, workers=args.workers
        )
        if args.lower_only:
            yield args.K, s, lower_bound(game), None
            continue
        method = args.upper_method
        if method == "auto":
            method = "union" if game.n_classes <= game.class_cap else "two_step"
        rep = upper_bound(game, method=method)
        yield args.K, s, rep.b_lower, rep.b_upper


def cmd_bounds(args) -> int:
    if args.K < 1:
        raise InputError(f"K must be positive, got {args.K}")
    if args.h_sigma is not None and not 0 <= args.h_sigma <= args.K:
        raise InputError(f"h_sigma must lie in 0..{args.K}")
    rows = list(_bounds_rows(args))
    _emit(io.bounds_csv(rows), args.out)
    if args.svg:
        Path(args.svg).write_text(io.bounds_svg(args.K, [r[2] for r in rows]), encoding="utf-8")
    return EXIT_OK


def cmd_reduce(args) -> int:
    scenario = io.load_scenario(args.scenario)
    game = scenario.game
    profile = make_profile(game, parse_cuts(args.from_))
    report = check_equilibrium(profile, scenario)
    if not report.ic_ok:
        raise ContractViolation(
            "starting profile is not an equilibrium",
            io.violations_to_json(report.violations, profile, game),
        )
    red = reduce_step(profile, scenario)
    for i, step in enumerate(red.trace):
        log.info("reduce step %d: %s cells=%s ic=%s", i, step.kind, step.cells, step.ic_ok)
    _emit(io.dumps(io.reduction_to_json(scenario, red)), args.out)
    return EXIT_OK


def cmd_compare_naive(args) -> int:
    scenario = io.load_scenario(args.scenario)
    game = scenario.game
    if args.partition is not None:
        profiles = [make_profile(game, parse_cuts(args.partition))]
    else:
        profiles = [r.profile for r in most_informative(scenario)]
    reports = []
    for prof in profiles:
        rep = check_equilibrium(prof, scenario)
        if not rep.ic_ok:
            raise ContractViolation(
                "partition is not an equilibrium", io.violations_to_json(rep.violations, prof, game)
            )
        reports.append(io.persuasion_to_json(persuasion_sets(scenario, prof), prof, game))
    _emit(io.dumps({"scenario": io.scenario_to_json(scenario), "comparisons": reports}), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .oracle import brute_force_bounds, brute_force_equilibria

    scenario = io.load_scenario(args.scenario)
    game = scenario.game
    main = [r.profile for r in enumerate_equilibria(scenario)]
    brute = brute_force_equilibria(scenario)
    result = {
        "scenario": io.scenario_to_json(scenario),
        "equilibria": len(main),
        "equilibria_match": main == brute,
    }
    if game.n_classes >= 2:
        fast = upper_bound(game)
        slow = brute_force_bounds(game.history, game.rule, game.tiebreak, game.exclude_empty)
        result["b_lower"] = io.fmt(fast.b_lower)
        result["b_upper"] = io.fmt(fast.b_upper)
        result["bounds_match"] = (fast.b_lower, fast.b_upper, fast.informative_set) == (
            slow.b_lower,
            slow.b_upper,
            slow.informative_set,
        )
    _emit(io.dumps(result), args.out)
    ok = result["equilibria_match"] and result.get("bounds_match", True)
    return EXIT_OK if ok else EXIT_CONTRACT


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="narrative-eq", description="Equilibria of cheap talk with competing narratives.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="enumerate equilibria of a scenario")
    s.add_argument("scenario")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--all", action="store_true", help="every equilibrium (default)")
    mode.add_argument("--most-informative", action="store_true", help="only maximal equilibria")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bounds", help="informativeness thresholds as CSV")
    b.add_argument("--K", type=int, required=True)
    which = b.add_mutually_exclusive_group()
    which.add_argument("--h-sigma", type=int)
    which.add_argument("--all-hsigma", action="store_true", help="one row per success count (default)")
    b.add_argument("--rule", default="MLEU")
    b.add_argument("--exclude-empty", action="store_true", help="drop the model with no relevant data")
    b.add_argument("--lower-only", action="store_true")
    b.add_argument("--upper-method", choices=("auto", "union", "two_step"), default="auto")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--svg", help="also write a plot of the lower threshold")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    r = sub.add_parser("reduce", help="trace the step-reduction algorithm")
    r.add_argument("scenario")
    r.add_argument("--from", dest="from_", required=True, metavar="CUTS", help='cut positions, e.g. "1,4"')
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    c = sub.add_parser("compare-naive", help="persuasion sets against a naive receiver")
    c.add_argument("scenario")
    c.add_argument("--partition", metavar="CUTS", help="equilibrium to compare (default: all maximal ones)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare_naive)

    v = sub.add_parser("verify", help="cross-check against the brute-force oracle")
    v.add_argument("scenario")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ContractViolation, DegenerateCaseError) as exc:
        payload = {"error": str(exc)}
        if getattr(exc, "violations", None):
            payload["violations"] = exc.violations
        print(json.dumps(payload, indent=2, default=str), file=sys.stderr)
        return EXIT_CONTRACT
    except NarrativeEqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
