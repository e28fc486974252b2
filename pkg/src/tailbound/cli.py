"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 infeasible input or violated
precondition, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bounds import lower_bound, upper_bound
from .conditions import CONDITION_IDS, condition_ids_for, evaluate_conditions
from .distributions import FAMILIES, CatalogEntry, make_catalog_distribution
from .errors import InvalidParameterError, PairingError, TailBoundError
from .kinds import BoundKind
from .optimize import optimize_a, optimize_b_real_line, optimize_b_semibounded
from .oracle import true_tail
from .pairing import convergence_rate, select_pair
from .validation import run_suite, suite_passed, validation_range

EXIT_OK, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_USAGE = 0, 1, 2, 64

FAMILY_ALIASES = {
    "gaussian": "gaussian",
    "normal": "gaussian",
    "chi2": "chi_square_central",
    "chi-square": "chi_square_central",
    "ncx2": "chi_square_noncentral",
    "noncentral-chi2": "chi_square_noncentral",
    "gaussian-squared": "gaussian_squared",
    "beta-prime": "beta_prime",
}
FAMILY_ALIASES.update({f: f for f in FAMILIES})

PARAM_FLAGS = ("mu", "sigma", "k", "lam", "alpha", "beta")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _add_family(p, required=True):
    p.add_argument("--family", required=required, help="gaussian, chi2, ncx2, gaussian-squared, beta-prime")
    for name in PARAM_FLAGS:
        p.add_argument(f"--{name}", type=_float, default=None)


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default: standard output)")


def _add_range(p, n_default=200):
    p.add_argument("--x-from", type=_float, default=None)
    p.add_argument("--x-to", type=_float, default=None)
    p.add_argument("--n", type=int, default=n_default)


def build_parser():
    parser = _Parser(prog="tailbound", description="Density-based right-tail bounds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="tabulate bounds, reference tail and rate over an x grid")
    _add_family(p)
    _add_range(p)
    p.add_argument("--pair", default="auto", help="'auto' or UPPER+LOWER, e.g. 'cor2+thm5(b=1)'")
    _add_output(p)

    p = sub.add_parser("conditions", help="condition left sides and flags for one or more kinds")
    _add_family(p)
    _add_range(p, 100)
    p.add_argument("--kind", action="append", required=True,
                   help="bound kind such as cor2 or 'thm4(a=2,b=1)'; repeat or join with '+'")
    _add_output(p)

    p = sub.add_parser("optimize", help="optimize a or b at x (or over a grid)")
    _add_family(p)
    p.add_argument("--param", choices=("a", "b"), default="a")
    p.add_argument("--x", type=_float, default=None)
    _add_range(p, 16)
    p.add_argument("--a", type=_float, default=math.inf, help="fixed a for the b search (default inf)")
    p.add_argument("--a-max", type=_float, default=64.0)
    p.add_argument("--b-max", type=_float, default=64.0)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", default=None)

    p = sub.add_parser("pair", help="select a certified bound pair on a range")
    _add_family(p)
    p.add_argument("--x-from", type=_float, default=None)
    p.add_argument("--x-to", type=_float, default=None)
    p.add_argument("--min-coverage", type=_float, default=1.0 / 3.0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("validate", help="run the validation suite")
    _add_family(p, required=False)
    p.add_argument("--all", action="store_true", help="every catalog family at default parameters")
    p.add_argument("--full", action="store_true", help="include per-sample values")
    p.add_argument("--out", default=None)
    return parser


# -- helpers ------------------------------------------------------------------


def _entry(args) -> CatalogEntry:
    family = FAMILY_ALIASES.get(args.family)
    if family is None:
        raise UsageError(f"unknown family {args.family!r}")
    given = {k: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k) is not None}
    base = dict(CatalogEntry.default(family).params)
    extra = set(given) - set(base)
    if extra:
        raise UsageError(f"--{sorted(extra)[0]} is not a parameter of {args.family}")
    base.update(given)
    return CatalogEntry(family, base)


def _grid(args, entry):
    lo_def, hi_def = validation_range(entry)
    lo = lo_def if args.x_from is None else args.x_from
    hi = hi_def if args.x_to is None else args.x_to
    if not lo < hi:
        raise UsageError(f"empty range: --x-from {lo:g} must be below --x-to {hi:g}")
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    return np.array([lo]) if args.n == 1 else np.linspace(lo, hi, args.n)


def _parse_kinds(texts):
    kinds = []
    for text in texts:
        for part in text.split("+"):
            if part.strip():
                try:
                    kinds.append(BoundKind.parse(part))
                except InvalidParameterError as exc:
                    raise UsageError(str(exc)) from None
    return kinds


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_safe(v):
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _write(args, text):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(rows: List[Dict[str, object]], header: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_json_safe(rows), indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(h)) for h in header])
    return buf.getvalue()


def _safe_bound(fn, model, x, kind):
    try:
        return fn(model, x, kind)
    except TailBoundError:
        return None


# -- commands -----------------------------------------------------------------


def cmd_eval(args):
    entry = _entry(args)
    model = make_catalog_distribution(entry)
    xs = _grid(args, entry)
    if args.pair == "auto":
        try:
            report = select_pair(model, (float(xs[0]), float(xs[-1])) if len(xs) > 1 else validation_range(entry))
        except PairingError as exc:
            print(f"tailbound: {exc}", file=sys.stderr)
            print(json.dumps(_json_safe(exc.diagnostics)), file=sys.stderr)
            return EXIT_INFEASIBLE
        upper, lower = report.upper, report.lower
    else:
        kinds = _parse_kinds([args.pair])
        if len(kinds) != 2 or not (kinds[0].is_upper and kinds[1].is_lower):
            raise UsageError("--pair needs UPPER+LOWER")
        upper, lower = kinds
    # fixed header; ids that do not belong to the pair stay blank
    header = ["x", "upper", "upper_valid", "lower", "lower_valid", "true_tail", "rate_r"] + list(CONDITION_IDS)
    rows, any_valid = [], False
    for x in xs:
        x = float(x)
        up = _safe_bound(upper_bound, model, x, upper)
        lo = _safe_bound(lower_bound, model, x, lower)
        row = {
            "x": x,
            "upper": up.value if up else math.nan,
            "upper_valid": bool(up and up.valid),
            "lower": lo.value if lo else math.nan,
            "lower_valid": bool(lo and lo.valid),
            "true_tail": true_tail(model, x).value if model.support.interior(x) else math.nan,
            "rate_r": None,
        }
        for bv in (up, lo):
            if bv:
                for e in bv.condition_report.entries:
                    row[e.id] = e.satisfied
        if row["upper_valid"] and row["lower_valid"]:
            try:
                row["rate_r"] = convergence_rate(model, x, upper, lower)
            except TailBoundError:
                pass
        any_valid = any_valid or row["upper_valid"] or row["lower_valid"]
        rows.append(row)
    _write(args, _render(rows, header, args.format))
    if not any_valid:
        print(f"tailbound: neither {upper} nor {lower} is certified anywhere on the grid", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_conditions(args):
    entry = _entry(args)
    model = make_catalog_distribution(entry)
    kinds = _parse_kinds(args.kind)
    tags = [k.tag for k in kinds]
    xs = _grid(args, entry)
    header = ["x"]
    columns = []
    for kind in kinds:
        prefix = f"{kind.label}:" if tags.count(kind.tag) > 1 else ""
        for cid in condition_ids_for(kind):
            columns.append((kind, cid, prefix + cid))
            header += [prefix + cid, prefix + cid + ".satisfied"]
    rows = []
    for x in xs:
        x = float(x)
        row = {"x": x}
        for kind, cid, col in columns:
            try:
                e = evaluate_conditions(model, x, kind)[cid]
                row[col], row[col + ".satisfied"] = e.lhs_value, e.satisfied
            except TailBoundError:
                row[col], row[col + ".satisfied"] = math.nan, False
        rows.append(row)
    _write(args, _render(rows, header, args.format))
    return EXIT_OK


def cmd_optimize(args):
    entry = _entry(args)
    model = make_catalog_distribution(entry)
    xs = [args.x] if args.x is not None else [float(x) for x in _grid(args, entry)]
    rows = []
    for x in xs:
        if args.param == "a":
            res = optimize_a(model, x, a_max=args.a_max)
        elif model.support.real_line:
            res = optimize_b_real_line(model, x, b_max=args.b_max)
        else:
            res = optimize_b_semibounded(model, x, a=args.a, b_max=args.b_max)
        rows.append({"x": x, res.name: res.value, "achieved_by": res.achieved_by,
                     "residual": res.residual, "diagnostic": res.diagnostic})
    if args.format == "json":
        text = json.dumps(_json_safe(rows[0] if args.x is not None else rows), indent=1) + "\n"
    else:
        text = _render(rows, ["x", args.param, "achieved_by", "residual"], "csv")
    _write(args, text)
    if all(r["achieved_by"] == "fallback_none" for r in rows):
        print("tailbound: no feasible parameter; decrease a or increase x", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_pair(args):
    entry = _entry(args)
    model = make_catalog_distribution(entry)
    lo_def, hi_def = validation_range(entry)
    lo = lo_def if args.x_from is None else args.x_from
    hi = hi_def if args.x_to is None else args.x_to
    if not lo < hi:
        raise UsageError("empty range")
    try:
        r = select_pair(model, (lo, hi), min_coverage=args.min_coverage)
    except PairingError as exc:
        print(f"tailbound: {exc}", file=sys.stderr)
        print(json.dumps(_json_safe(exc.diagnostics)), file=sys.stderr)
        return EXIT_INFEASIBLE
    record = {
        "upper": r.upper.label, "lower": r.lower.label, "rate_class": r.rate_class,
        "certified_interval": list(r.certified_interval), "coverage": r.coverage, "step": r.step,
        "samples": [{"x": x, "R": rr} for x, rr in r.samples], "candidates": r.candidates,
    }
    _write(args, json.dumps(_json_safe(record), indent=1) + "\n")
    return EXIT_OK


def cmd_validate(args):
    if args.all:
        entries = [CatalogEntry.default(f) for f in FAMILIES]
    elif args.family:
        entries = [_entry(args)]
    else:
        raise UsageError("validate needs --family or --all")
    families, passed = [], True
    for entry in entries:
        diags = run_suite(entry)
        ok = suite_passed(diags)
        passed = passed and ok
        items = []
        for d in diags:
            item = d.to_dict()
            if not args.full:
                item.pop("x_samples")
                item.pop("values")
            items.append(item)
        families.append({"family": entry.family, "params": dict(entry.params), "passed": ok,
                         "diagnostics": items})
    _write(args, json.dumps(_json_safe({"passed": passed, "families": families}), indent=1) + "\n")
    return EXIT_OK if passed else EXIT_VALIDATION


COMMANDS = {
    "eval": cmd_eval,
    "conditions": cmd_conditions,
    "optimize": cmd_optimize,
    "pair": cmd_pair,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"tailbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidParameterError as exc:
        print(f"tailbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TailBoundError as exc:
        name = getattr(exc, "precondition", None)
        prefix = f"precondition {name!r} failed: " if name else ""
        print(f"tailbound: {prefix}{exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
