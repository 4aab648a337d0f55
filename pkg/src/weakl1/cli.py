"""Command-line front end.

Exit codes: 0 when every verdict passes, 1 when any fails, 2 when none
fails but some are inconclusive.  Usage errors exit with 64.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from fractions import Fraction

from . import __version__
from .construction import ConstructionParams, resolve_selector
from .errors import DomainError, InconclusiveError, ParameterError, SizeError
from .numeric import RatInterval, rat_decimal, rat_to_str
from .pwfunc import NORM_BOX_BUDGET, PiecewiseFn, rearrangement_at, weak_norm
from .seqspace import discrete_family, verify_discrete_lemma
from .typeprobe import (Exhaustive, ProbeBudget, Sample, Verdict, type_ratio_table,
                        verify_gstar, verify_lemma, verify_unit_norms)

EXIT_USAGE = 64
DEFAULTS = {
    "tol": "1/1000000",
    "signs": "all",
    "seed": 0,
    "budget": NORM_BOX_BUDGET,
    "eval_budget": 512,
    "workers": 1,
    "format": "json",
    "points": 100,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would exit with 2, which here means "inconclusive"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fraction(text) -> Fraction:
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None
    return value


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_signs(text: str, seed: int):
    text = str(text).strip()
    if text == "all":
        return Exhaustive()
    if text.startswith("sample:"):
        try:
            return Sample(int(text.split(":", 1)[1]), seed)
        except ValueError:
            raise UsageError(f"bad sample count in {text!r}") from None
    raise UsageError(f"--signs must be 'all' or 'sample:K', got {text!r}")


def read_config(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[run]\n" + fh.read(), source=path)
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc.message.splitlines()[0]}") from None
    return {key.replace("-", "_"): value for key, value in parser["run"].items()}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", help="base parameter n (comma list for type-ratio)")
    common.add_argument("--k", type=int, help="scale block index")
    common.add_argument("--j", type=int, help="family member index")
    common.add_argument("--tol", help="relative tolerance, rational (default 1/1000000)")
    common.add_argument("--signs", help="all | sample:K")
    common.add_argument("--seed", type=int, help="seed for sampled sign vectors")
    common.add_argument("--budget", type=int, help="branch-and-bound boxes per norm")
    common.add_argument("--eval-budget", type=int, help="maximum number of sign vectors")
    common.add_argument("--workers", type=int, help="processes for per-sign norms")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--timing", action="store_true", help="include wall time in reports")

    parser = _Parser(prog="weakl1", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("norm", parents=[common], help="weak-L1 norm enclosure")
    p.add_argument("selector", nargs="?", help="e.g. F:10:1, g:4:2, @file.json")
    sub.add_parser("verify-lemma", parents=[common], help="two-sided bound for every sign vector")
    sub.add_parser("unit-norms", parents=[common], help="||g_j|| <= 1 for every j")
    p = sub.add_parser("gstar", parents=[common], help="closed form of the rearrangement of g_j")
    p.add_argument("--points", type=int, help="number of grid points")
    p = sub.add_parser("type-ratio", parents=[common], help="Rademacher ratio table")
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p = sub.add_parser("rearrange", parents=[common], help="tabulate f* on a grid")
    p.add_argument("selector", nargs="?")
    p.add_argument("--points", type=int, help="number of grid points")
    p = sub.add_parser("export", parents=[common], help="write a function or sampled family")
    p.add_argument("selector", nargs="?")
    sub.add_parser("discrete", parents=[common], help="sequence-space analog, exact")
    return parser


def _resolve(args, config: dict) -> dict:
    merged = dict(DEFAULTS)
    merged.update(config)
    for key, value in vars(args).items():
        if value is not None and value is not False:
            merged[key] = value
    return merged


def _function(cfg: dict) -> PiecewiseFn:
    sel = cfg.get("selector")
    if sel is None:
        if cfg.get("n") is None:
            raise UsageError("give a selector or --n with --k (F_k) or --j (g_j)")
        n = int(cfg["n"])
        if cfg.get("k") is not None:
            sel = f"F:{n}:{cfg['k']}"
        elif cfg.get("j") is not None:
            sel = f"g:{n}:{cfg['j']}"
        else:
            raise UsageError("--n needs --k or --j")
    if sel.startswith("@"):
        with open(sel[1:], encoding="utf-8") as fh:
            return PiecewiseFn.loads(fh.read())
    return resolve_selector(sel)


def _params(cfg: dict) -> ConstructionParams:
    if cfg.get("n") is None:
        raise UsageError("--n is required")
    return ConstructionParams(int(cfg["n"]))


def _budget(cfg: dict) -> ProbeBudget:
    tol = _fraction(cfg["tol"])
    return ProbeBudget(tol=tol, sign_mode=parse_signs(cfg["signs"], int(cfg["seed"])),
                       eval_budget=int(cfg["eval_budget"]), box_budget=int(cfg["budget"]),
                       workers=int(cfg["workers"]))


def _echo(cfg: dict) -> dict:
    keys = ("command", "selector", "n", "k", "j", "tol", "signs", "seed", "budget",
            "eval_budget", "format", "points", "n_min", "n_max")
    return {k: str(cfg[k]) for k in keys if cfg.get(k) is not None}


def _emit(text: str, cfg: dict):
    if cfg.get("out"):
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _interval_doc(enc: RatInterval) -> dict:
    return enc.to_json() | {"decimal": enc.decimal()}


def cmd_norm(cfg: dict) -> int:
    f = _function(cfg)
    tol = _fraction(cfg["tol"])
    verdict = Verdict.PASS
    try:
        enc = weak_norm(f, tol, int(cfg["budget"]))
    except InconclusiveError as exc:
        enc, verdict = exc.enclosure, Verdict.INCONCLUSIVE
    if cfg["format"] == "csv":
        text = (f"lo,hi,lo_decimal,hi_decimal,verdict\n{rat_to_str(enc.lo)},{rat_to_str(enc.hi)},"
                f"{rat_decimal(enc.lo)},{rat_decimal(enc.hi)},{verdict.value}\n")
    else:
        text = json.dumps({"run_config": _echo(cfg), "norm": _interval_doc(enc),
                           "verdict": verdict.value}, indent=2)
    _emit(text, cfg)
    return verdict.exit_code


def _report(report, cfg: dict) -> int:
    if cfg["format"] == "csv":
        text = report.to_csv()
    else:
        doc = {"run_config": _echo(cfg)} | report.to_json(include_timing=bool(cfg.get("timing")))
        text = json.dumps(doc, indent=2)
    _emit(text, cfg)
    return report.verdict.exit_code


def _grid(count: int) -> list:
    if count < 1:
        raise UsageError("--points must be positive")
    return [Fraction(i, count + 1) for i in range(1, count + 1)]


def cmd_verify_lemma(cfg: dict) -> int:
    return _report(verify_lemma(_params(cfg), _budget(cfg)), cfg)


def cmd_unit_norms(cfg: dict) -> int:
    return _report(verify_unit_norms(_params(cfg), _budget(cfg)), cfg)


def cmd_gstar(cfg: dict) -> int:
    p = _params(cfg)
    j = int(cfg["j"]) if cfg.get("j") is not None else 1
    return _report(verify_gstar(p, j, _grid(int(cfg["points"])), _budget(cfg)), cfg)


def cmd_type_ratio(cfg: dict) -> int:
    if cfg.get("n_min") is not None or cfg.get("n_max") is not None:
        if cfg.get("n_min") is None or cfg.get("n_max") is None:
            raise UsageError("--n-min and --n-max go together")
        lo, hi = int(cfg["n_min"]), int(cfg["n_max"])
        if lo > hi:
            raise UsageError("--n-min must not exceed --n-max")
        ns = list(range(lo, hi + 1))
    elif cfg.get("n") is not None:
        ns = _int_list(cfg["n"])
    else:
        raise UsageError("type-ratio needs --n LIST or --n-min/--n-max")
    return _report(type_ratio_table(ns, _budget(cfg)), cfg)


def cmd_rearrange(cfg: dict) -> int:
    f = _function(cfg)
    tol = _fraction(cfg["tol"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "lo", "hi", "lo_decimal", "hi_decimal"])
    worst = Verdict.PASS
    for t in _grid(int(cfg["points"])):
        try:
            enc = rearrangement_at(f, t, tol)
        except InconclusiveError as exc:
            enc, worst = exc.enclosure, Verdict.INCONCLUSIVE
        writer.writerow([rat_to_str(t), rat_to_str(enc.lo), rat_to_str(enc.hi),
                         rat_decimal(enc.lo), rat_decimal(enc.hi)])
    _emit(buf.getvalue(), cfg)
    return worst.exit_code


def cmd_export(cfg: dict) -> int:
    if cfg.get("selector") is None and cfg.get("k") is None and cfg.get("j") is None:
        # whole sampled family as CSV or JSON lists
        xs = discrete_family(_params(cfg))
        if cfg["format"] == "csv":
            text = "\n".join(f"# x_{j}\n{x.to_csv()}" for j, x in enumerate(xs, start=1))
        else:
            text = json.dumps({"run_config": _echo(cfg),
                               "sequences": [x.to_json() for x in xs]}, indent=2)
    else:
        text = _function(cfg).dumps()
    _emit(text, cfg)
    return 0


def cmd_discrete(cfg: dict) -> int:
    report = verify_discrete_lemma(_params(cfg))
    if cfg["format"] == "csv":
        text = report.to_csv()
    else:
        doc = {"run_config": _echo(cfg)} | report.to_json()
        if not cfg.get("timing"):
            doc.pop("seconds")
        text = json.dumps(doc, indent=2)
    _emit(text, cfg)
    return 0


COMMANDS = {
    "norm": cmd_norm,
    "verify-lemma": cmd_verify_lemma,
    "unit-norms": cmd_unit_norms,
    "gstar": cmd_gstar,
    "type-ratio": cmd_type_ratio,
    "rearrange": cmd_rearrange,
    "export": cmd_export,
    "discrete": cmd_discrete,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = read_config(args.config) if args.config else {}
        cfg = _resolve(args, config)
        return COMMANDS[args.command](cfg)
    except (UsageError, ParameterError, DomainError, SizeError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"weakl1: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
