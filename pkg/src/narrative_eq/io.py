"""Scenario files and serialisation of results.

A scenario file is UTF-8 JSON, for example::

    {"K": 3, "h_sigma": 2, "bias": "1/30",
     "rule": {"name": "MLEU"}, "tiebreak": "default",
     "caps": {"classes": 22}, "worker_count": 1}

``history`` (a bit string) may replace ``h_sigma``; a bare ``h_sigma``
stands for the history with all successes first.  Every rational is
written as a ``"num/den"`` string, so MLEU, MEU and Bayesian outputs carry
no floating point.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping

from .core import DEFAULT_K_CAP, DEFAULT_TIEBREAK, History, Model, TieBreak, as_fraction, format_fraction
from .engine import EquilibriumReport, PartitionProfile, Reduction, check_equilibrium, profile_from_means
from .errors import ContractViolation, InputError
from .naive import PersuasionReport
from .rules import RuleSelector
from .scenario import Game, Scenario

SCENARIO_KEYS = {
    "K", "history", "h_sigma", "bias", "rule", "tiebreak", "exclude_empty", "caps", "worker_count",
}


def _int(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise InputError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def parse_history(data: Mapping[str, Any]) -> History:
    K = data.get("K")
    if "history" in data and "h_sigma" in data:
        raise InputError("give either history or h_sigma, not both")
    if "history" in data:
        raw = data["history"]
        if not isinstance(raw, str):
            raise InputError(f"history must be a bit string, got {raw!r}")
        history = History.from_string(raw)
        if K is not None and _int(K, "K", 1) != history.K:
            raise InputError(f"K={K} does not match the history length {history.K}")
        return history
    if "h_sigma" in data:
        if K is None:
            raise InputError("h_sigma needs K")
        return History.from_sigma(_int(K, "K", 1), _int(data["h_sigma"], "h_sigma"))
    raise InputError("scenario needs a history or h_sigma")


def parse_rule(raw) -> RuleSelector:
    if raw is None:
        return RuleSelector()
    if isinstance(raw, str):
        return RuleSelector(raw)
    if not isinstance(raw, Mapping) or "name" not in raw:
        raise InputError(f"rule must be a name or an object with a name, got {raw!r}")
    unknown = set(raw) - {"name", "weights", "alpha", "tolerance"}
    if unknown:
        raise InputError(f"unknown rule parameters {sorted(unknown)}")
    weights = raw.get("weights")
    if weights is not None:
        if not isinstance(weights, Mapping):
            raise InputError("rule weights must map model strings to rationals")
        weights = {Model.parse(k): as_fraction(v) for k, v in weights.items()}
    kwargs = {}
    if "alpha" in raw:
        kwargs["smooth_alpha"] = raw["alpha"]
    if "tolerance" in raw:
        kwargs["tolerance"] = raw["tolerance"]
    return RuleSelector(raw["name"], weights, **kwargs)


def parse_tiebreak(raw) -> TieBreak:
    if raw is None:
        return DEFAULT_TIEBREAK
    if isinstance(raw, str):
        return TieBreak(raw)
    if isinstance(raw, Mapping) and set(raw) <= {"policy", "order"}:
        order = tuple(Model.parse(m) for m in raw.get("order", ()))
        return TieBreak(raw.get("policy", "explicit"), order)
    if isinstance(raw, list):
        return TieBreak("explicit", tuple(Model.parse(m) for m in raw))
    raise InputError(f"malformed tiebreak {raw!r}")


def parse_game(data: Mapping[str, Any]) -> Game:
    if not isinstance(data, Mapping):
        raise InputError("scenario must be a JSON object")
    unknown = set(data) - SCENARIO_KEYS
    if unknown:
        raise InputError(f"unknown scenario fields {sorted(unknown)}")
    caps = data.get("caps") or {}
    if not isinstance(caps, Mapping) or set(caps) - {"classes", "K"}:
        raise InputError(f"caps must be an object with 'classes' and/or 'K', got {caps!r}")
    exclude_empty = data.get("exclude_empty", False)
    if not isinstance(exclude_empty, bool):
        raise InputError("exclude_empty must be true or false")
    game = Game(
        parse_history(data),
        rule=parse_rule(data.get("rule")),
        tiebreak=parse_tiebreak(data.get("tiebreak")),
        exclude_empty=exclude_empty,
        class_cap=_int(caps["classes"], "caps.classes", 1) if "classes" in caps else None,
        k_cap=_int(caps.get("K", DEFAULT_K_CAP), "caps.K", 1),
        workers=_int(data.get("worker_count", 1), "worker_count", 1),
    )
    if game.K > game.k_cap:
        raise InputError(f"K={game.K} exceeds the cap {game.k_cap}")
    return game


def parse_scenario(data: Mapping[str, Any]) -> Scenario:
    if "bias" not in data:
        raise InputError("scenario needs a bias")
    bias = data["bias"]
    if not isinstance(bias, (str, int)) or isinstance(bias, bool):
        raise InputError(f"bias must be a 'num/den' string, got {bias!r}")
    return Scenario(parse_game(data), as_fraction(bias))


def load_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def load_scenario(path) -> Scenario:
    return parse_scenario(load_json(path))


# -- serialisation ----------------------------------------------------------


def fmt(x):
    """Exact values as ``"num/den"``; smooth-rule floats stay JSON numbers."""
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, int):
        return format_fraction(Fraction(x))
    return x


def scenario_to_json(scenario: Scenario) -> dict:
    game = scenario.game
    rule = {"name": game.rule.kind}
    if game.rule.weights is not None:
        rule["weights"] = {str(m): fmt(w) for m, w in game.rule.weights}
    if game.rule.kind == "Smooth":
        rule["alpha"] = game.rule.smooth_alpha
        rule["tolerance"] = game.rule.tolerance
    out = {
        "K": game.K,
        "history": str(game.history),
        "bias": fmt(scenario.bias),
        "rule": rule,
        "tiebreak": game.tiebreak.policy,
        "exclude_empty": game.exclude_empty,
    }
    if game.tiebreak.policy == "explicit":
        out["tiebreak"] = {"policy": "explicit", "order": [str(m) for m in game.tiebreak.order]}
    return out


def profile_to_json(profile: PartitionProfile, game: Game) -> dict:
    means = game.means
    return {
        "cuts": list(profile.cuts),
        "cells": [[fmt(means[c]) for c in range(lo, hi + 1)] for lo, hi in profile.cells],
        "actions": [fmt(a) for a in profile.actions],
        "steps": profile.steps,
    }


def profile_from_json(obj: Mapping[str, Any], game: Game) -> PartitionProfile:
    """Rebuild a profile from :func:`profile_to_json` output, checking its actions."""
    prof = profile_from_means(game, obj["cells"])
    if "actions" in obj and [fmt(a) for a in prof.actions] != list(obj["actions"]):
        raise ContractViolation(f"recorded actions {obj['actions']} are not the receiver's best responses")
    return prof


def equilibria_to_json(scenario: Scenario, reports: Iterable[EquilibriumReport], N: int) -> dict:
    return {
        "scenario": scenario_to_json(scenario),
        "N": N,
        "equilibria": [profile_to_json(r.profile, scenario.game) for r in reports],
    }


def violations_to_json(violations, profile: PartitionProfile, game: Game) -> list[dict]:
    return [
        {"class_mean": fmt(game.means[c]), "prefers_action": fmt(profile.actions[j])}
        for c, j in violations
    ]


def reduction_to_json(scenario: Scenario, red: Reduction) -> dict:
    game = scenario.game
    steps = []
    for t in red.trace:
        prof = PartitionProfile(game.n_classes, tuple(lo for lo, _ in t.cells[1:]), t.actions)
        entry = {"kind": t.kind, **profile_to_json(prof, game), "ic_ok": t.ic_ok}
        if t.moved_class is not None:
            entry["moved_class_mean"] = fmt(game.means[t.moved_class])
        steps.append(entry)
    return {
        "scenario": scenario_to_json(scenario),
        "trace": steps,
        "result": profile_to_json(red.result.profile, game),
    }


def persuasion_to_json(report: PersuasionReport, profile: PartitionProfile, game: Game) -> dict:
    def names(models):
        return [str(m) for m in sorted(models, key=lambda m: (m.size, m.relevant))]

    return {
        "equilibrium": profile_to_json(profile, game),
        "naive_set": names(report.naive_set),
        "equilibrium_set": names(report.equilibrium_set),
        "subset_ok": report.subset_ok,
        "strict": report.strict,
        "per_model_gain": {
            str(m): {"equilibrium": fmt(eg), "naive": fmt(ng)}
            for m, (eg, ng) in sorted(report.per_model_gain.items(), key=lambda kv: (kv[0].size, kv[0].relevant))
        },
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def verify_round_trip(payload: Mapping[str, Any]) -> list[EquilibriumReport]:
    """Re-parse a ``solve`` payload and re-check every equilibrium in it."""
    scenario = parse_scenario(payload["scenario"])
    reports = []
    for obj in payload["equilibria"]:
        rep = check_equilibrium(profile_from_json(obj, scenario.game), scenario)
        if not rep.ic_ok:
            raise ContractViolation("emitted profile is not an equilibrium", rep.violations)
        reports.append(rep)
    return reports


# -- bound curves -----------------------------------------------------------

CSV_COLUMNS = [
    "K", "h_sigma",
    "b_lower_num", "b_lower_den", "b_upper_num", "b_upper_den",
    "b_lower_approx", "b_upper_approx",
]


def bounds_csv(rows: Iterable[tuple[int, int, Fraction, Fraction | None]]) -> str:
    """CSV of exact thresholds; the ``*_approx`` columns are 12-place decimals for convenience only."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for K, s, lo, up in rows:
        up_cols = ["", ""] if up is None else [up.numerator, up.denominator]
        w.writerow(
            [K, s, lo.numerator, lo.denominator, *up_cols,
             f"{float(lo):.12f}", "" if up is None else f"{float(up):.12f}"]
        )
    return buf.getvalue()


def bounds_svg(K: int, values: list[Fraction], width: int = 480, height: int = 320) -> str:
    """Polyline of the full-revelation threshold against the number of successes."""
    pad = 40
    top = max(values)
    bottom = min(values)
    span = top - bottom or top or Fraction(1)

    def xy(i, v):
        x = pad + (width - 2 * pad) * (i / max(len(values) - 1, 1))
        y = height - pad - (height - 2 * pad) * float((v - bottom) / span)
        return f"{x:.2f},{y:.2f}"

    pts = " ".join(xy(i, v) for i, v in enumerate(values))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'  <line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
        f'  <line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
        f'  <text x="{width // 2}" y="{height - 8}" text-anchor="middle">successes (K={K})</text>\n'
        f'  <text x="{pad}" y="{pad - 8}">{format_fraction(top)}</text>\n'
        f'  <text x="{pad}" y="{height - pad + 16}">{format_fraction(bottom)}</text>\n'
        f'  <polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>\n'
        "</svg>\n"
    )
