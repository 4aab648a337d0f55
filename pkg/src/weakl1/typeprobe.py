"""Verification driver: Rademacher averages, norm bounds and the type-1 ratio.

The Rademacher integral ``int_0^1 ||sum r_k(t) x_k|| dt`` equals the plain
average of ``||sum eta_k x_k||`` over all sign vectors, so Rademacher
functions are never evaluated pointwise here.  Every verdict comes from
:func:`~weakl1.numeric.cmp_certified`.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .construction import (ConstructionParams, SignVector, all_sign_vectors, combine_signs,
                           make_g, make_sign_matrix)
from .errors import InconclusiveError, ParameterError
from .numeric import (Ordering, RatInterval, as_rational, cmp_certified, ln_enclosure,
                      rat_decimal, rat_to_str)
from .pwfunc import NORM_BOX_BUDGET, PiecewiseFn, add_many, rearrangement_at, scale, weak_norm

# below this base the lower bound is reported but not asserted
LOWER_BOUND_THRESHOLD = 10
DEFAULT_EVAL_BUDGET = 512
LN_EPS = Fraction(1, 10**12)


class Verdict(enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"

    @staticmethod
    def combine(verdicts) -> "Verdict":
        verdicts = list(verdicts)
        if Verdict.FAIL in verdicts:
            return Verdict.FAIL
        if Verdict.INCONCLUSIVE in verdicts:
            return Verdict.INCONCLUSIVE
        return Verdict.PASS

    @property
    def exit_code(self) -> int:
        return {Verdict.PASS: 0, Verdict.FAIL: 1, Verdict.INCONCLUSIVE: 2}[self]


@dataclass(frozen=True)
class Exhaustive:
    def describe(self) -> str:
        return "all"


@dataclass(frozen=True)
class Sample:
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ParameterError(f"sample count must be >= 1, got {self.count}")

    def describe(self) -> str:
        return f"sample:{self.count}"


@dataclass(frozen=True)
class ProbeBudget:
    """Precision and effort limits for one verification run.

    ``eval_budget`` caps the number of sign vectors evaluated; ``box_budget``
    caps branch-and-bound boxes per norm; ``workers > 1`` spreads sign
    vectors over processes (results do not depend on it).
    """

    tol: Fraction = Fraction(1, 10**6)
    sign_mode: Exhaustive | Sample = Exhaustive()
    eval_budget: int = DEFAULT_EVAL_BUDGET
    box_budget: int = NORM_BOX_BUDGET
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "tol", as_rational(self.tol))
        if self.tol <= 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.eval_budget < 1 or self.box_budget < 1 or self.workers < 1:
            raise ParameterError("budgets and worker count must be positive")

    def echo(self) -> dict:
        out = {"tol": rat_to_str(self.tol), "signs": self.sign_mode.describe(),
               "eval_budget": self.eval_budget, "box_budget": self.box_budget}
        if isinstance(self.sign_mode, Sample):
            out["seed"] = self.sign_mode.seed
        return out


def _interval_json(iv: RatInterval | None) -> dict | None:
    if iv is None:
        return None
    return iv.to_json() | {"decimal": iv.decimal()}


@dataclass
class ProbeRow:
    label: str
    enclosure: RatInterval | None
    checks: dict = field(default_factory=dict)
    verdict: Verdict = Verdict.PASS
    expected: Fraction | None = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"label": self.label, "enclosure": _interval_json(self.enclosure),
               "checks": dict(self.checks), "verdict": self.verdict.value}
        if self.expected is not None:
            out["expected"] = rat_to_str(self.expected)
            out["expected_decimal"] = rat_decimal(self.expected)
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class ProbeReport:
    """Structured outcome of a verification run.

    ``seconds`` is kept on the object but left out of serialized output so
    that repeated runs produce identical files.
    """

    kind: str
    params: dict
    config: dict
    rows: list
    targets: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    statistical: bool = False
    seconds: float = 0.0
    verdict: Verdict | None = None

    def __post_init__(self):
        if self.verdict is None:
            self.verdict = Verdict.combine(r.verdict for r in self.rows)

    def to_json(self, include_timing: bool = False) -> dict:
        out = {
            "kind": self.kind,
            "params": self.params,
            "config": self.config,
            "targets": {k: _interval_json(v) for k, v in self.targets.items()},
            "rows": [r.to_json() for r in self.rows],
            "summary": {k: (_interval_json(v) if isinstance(v, RatInterval) else v)
                        for k, v in self.summary.items()},
            "statistical": self.statistical,
            "notes": list(self.notes),
            "verdict": self.verdict.value,
        }
        if include_timing:
            out["seconds"] = round(self.seconds, 3)
        return out

    def dumps(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_json(include_timing), indent=2)

    def to_csv(self) -> str:
        check_names = sorted({k for r in self.rows for k in r.checks})
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label", "lo", "hi", "lo_decimal", "hi_decimal", "expected",
                         *check_names, "verdict"])
        for r in self.rows:
            enc = r.enclosure
            writer.writerow([
                r.label,
                rat_to_str(enc.lo) if enc else "", rat_to_str(enc.hi) if enc else "",
                rat_decimal(enc.lo) if enc else "", rat_decimal(enc.hi) if enc else "",
                rat_to_str(r.expected) if r.expected is not None else "",
                *(r.checks.get(k, "") for k in check_names),
                r.verdict.value,
            ])
        return buf.getvalue()


def _params(p: ConstructionParams) -> dict:
    return {"n": p.n, "N": p.N, "M": p.M}


# ---------------------------------------------------------------------------
# sign-vector selection and per-vector norms

def select_sign_vectors(K: int, budget: ProbeBudget) -> list:
    """Sign vectors of length K dictated by ``budget.sign_mode``."""
    mode = budget.sign_mode
    if isinstance(mode, Exhaustive):
        if 2 ** K > budget.eval_budget:
            raise ParameterError(
                f"exhaustive mode needs 2^{K} = {2 ** K} norms, above eval_budget "
                f"{budget.eval_budget}; use sampling")
        return all_sign_vectors(K)
    if mode.count > budget.eval_budget:
        raise ParameterError(f"sample count {mode.count} exceeds eval_budget {budget.eval_budget}")
    rng = random.Random(mode.seed)
    return [SignVector.from_index(rng.getrandbits(K), K) for _ in range(mode.count)]


@lru_cache(maxsize=4)
def _family(n: int) -> tuple:
    p = ConstructionParams(n)
    E = make_sign_matrix(p)
    return p, E, tuple(make_g(p, j, E) for j in range(1, p.N + 1))


@lru_cache(maxsize=8192)
def _combination_norm(n: int, eta: tuple, tol: Fraction, box_budget: int):
    # memoized so that verify_lemma and type1_ratio share the expensive part
    p, E, gs = _family(n)
    f = combine_signs(p, SignVector(eta), E, gs)
    try:
        return weak_norm(f, tol, box_budget), True
    except InconclusiveError as exc:
        return exc.enclosure, False


def _combination_norms(p: ConstructionParams, etas: Sequence[SignVector], budget: ProbeBudget):
    jobs = [(p.n, tuple(eta), budget.tol, budget.box_budget) for eta in etas]
    if budget.workers == 1 or len(jobs) < 2:
        return [_combination_norm(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=budget.workers) as pool:
        return list(pool.map(_combination_norm, *zip(*jobs)))


def _average(encs: Sequence[RatInterval]) -> RatInterval:
    total = RatInterval.point(0)
    for enc in encs:
        total = total + enc
    return total * Fraction(1, len(encs))


def rademacher_average(fs: Sequence[PiecewiseFn], budget: ProbeBudget | None = None) -> RatInterval:
    """Enclosure of ``2^-K sum_eta ||sum_k eta_k f_k||`` (K = len(fs)).

    In sample mode the result is the mean of the sampled certified
    enclosures, a statistical estimate rather than a certified bound.
    """
    budget = budget or ProbeBudget()
    fs = list(fs)
    if not fs:
        raise ParameterError("need at least one function")
    etas = select_sign_vectors(len(fs), budget)
    encs = []
    for eta in etas:
        f = add_many([scale(g, e) for g, e in zip(fs, eta)])
        try:
            encs.append(weak_norm(f, budget.tol, budget.box_budget))
        except InconclusiveError as exc:
            partial = _average(encs) if encs else None
            raise InconclusiveError(f"norm undecided for signs {eta}", exc.enclosure,
                                    partial=partial) from exc
    return _average(encs)


# ---------------------------------------------------------------------------
# verifiers

def log_targets(n: int) -> tuple:
    """``(n ln n / 2, n ln n)`` as certified intervals."""
    upper = ln_enclosure(n, LN_EPS) * n
    return upper * Fraction(1, 2), upper


def _bound_check(enc: RatInterval, target: RatInterval, want: Ordering) -> Verdict:
    got = cmp_certified(enc, target)
    if got is want:
        return Verdict.PASS
    if got is Ordering.OVERLAPPING:
        return Verdict.INCONCLUSIVE
    return Verdict.FAIL


def verify_lemma(p: ConstructionParams, budget: ProbeBudget | None = None) -> ProbeReport:
    """Check ``n ln n / 2 <= ||sum_j eta_j g_j|| <= n ln n`` for each sign vector.

    For ``n`` below :data:`LOWER_BOUND_THRESHOLD` the lower bound is only
    reported; the verdict then rests on the upper bound alone.
    """
    budget = budget or ProbeBudget()
    start = time.perf_counter()
    etas = select_sign_vectors(p.N, budget)
    lower, upper = log_targets(p.n)
    assert_lower = p.n >= LOWER_BOUND_THRESHOLD
    rows = []
    encs = []
    for eta, (enc, done) in zip(etas, _combination_norms(p, etas, budget)):
        encs.append(enc)
        up = _bound_check(enc, upper, Ordering.LESS)
        low = _bound_check(enc, lower, Ordering.GREATER)
        verdict = Verdict.combine([up, low] if assert_lower else [up])
        if not done:
            verdict = Verdict.combine([verdict, Verdict.INCONCLUSIVE])
        rows.append(ProbeRow(str(eta), enc, {
            "upper": up.value,
            "lower": low.value if assert_lower else f"{low.value} (informational)",
        }, verdict, note="" if done else "norm budget exhausted; best enclosure shown"))
    notes = []
    if not assert_lower:
        notes.append(f"lower bound asserted only for n >= {LOWER_BOUND_THRESHOLD}; "
                     f"shown for information at n = {p.n}")
    summary = {"average": _average(encs)}
    statistical = isinstance(budget.sign_mode, Sample)
    if statistical:
        notes.append("statistical: sampled sign vectors, the average is not a certified bound")
    return ProbeReport("verify-lemma", _params(p), budget.echo(), rows,
                       {"lower": lower, "upper": upper}, summary, notes, statistical,
                       time.perf_counter() - start)


def verify_unit_norms(p: ConstructionParams, budget: ProbeBudget | None = None) -> ProbeReport:
    """Each ``||g_j||`` certified ``<= 1`` and enclosing ``1 - n^-M``."""
    budget = budget or ProbeBudget()
    start = time.perf_counter()
    expected = 1 - p.inner
    _, _, gs = _family(p.n)
    rows = []
    for j, g in enumerate(gs, start=1):
        try:
            enc, done = weak_norm(g, budget.tol, budget.box_budget), True
        except InconclusiveError as exc:
            enc, done = exc.enclosure, False
        if enc.lo > 1 or not enc.contains(expected):
            unit = Verdict.FAIL
        elif enc.hi <= 1:
            unit = Verdict.PASS
        else:
            unit = Verdict.INCONCLUSIVE
        exact = Verdict.PASS if enc.contains(expected) else Verdict.FAIL
        verdict = Verdict.combine([unit, exact] + ([] if done else [Verdict.INCONCLUSIVE]))
        rows.append(ProbeRow(f"g{j}", enc, {"at_most_one": unit.value,
                                             "contains_expected": exact.value},
                             verdict, expected))
    return ProbeReport("unit-norms", _params(p), budget.echo(), rows,
                       seconds=time.perf_counter() - start)


def gstar_expected(p: ConstructionParams, t: Fraction) -> Fraction:
    """``1/(t + n^-M)`` on ``(0, 1 - n^-M]`` and 0 beyond."""
    return 1 / (t + p.inner) if t <= 1 - p.inner else Fraction(0)


def verify_gstar(p: ConstructionParams, j: int, points: Sequence, budget: ProbeBudget | None = None) -> ProbeReport:
    """Compare ``g_j*`` at ``points`` with its closed form."""
    budget = budget or ProbeBudget()
    start = time.perf_counter()
    if not 1 <= j <= p.N:
        raise ParameterError(f"j must be in [1, {p.N}], got {j}")
    g = _family(p.n)[2][j - 1]
    rows = []
    for t in points:
        t = as_rational(t)
        expected = gstar_expected(p, t)
        try:
            enc = rearrangement_at(g, t, budget.tol)
        except InconclusiveError as exc:
            rows.append(ProbeRow(rat_to_str(t), exc.enclosure, {}, Verdict.INCONCLUSIVE, expected))
            continue
        verdict = Verdict.PASS if enc.contains(expected) else Verdict.FAIL
        rows.append(ProbeRow(rat_to_str(t), enc, {}, verdict, expected))
    return ProbeReport("gstar", _params(p) | {"j": j}, budget.echo(), rows,
                       seconds=time.perf_counter() - start)


def ratio_bound(N: int) -> RatInterval:
    """``(N+1) ln(N+1) / (2N)`` as an interval."""
    return ln_enclosure(N + 1, LN_EPS) * Fraction(N + 1, 2 * N)


@dataclass
class RatioResult:
    p: ConstructionParams
    average: RatInterval
    norm_sum: RatInterval
    ratio: RatInterval
    bound: RatInterval
    verdict: Verdict
    statistical: bool

    def to_row(self) -> ProbeRow:
        return ProbeRow(f"n={self.p.n}", self.ratio, {"vs_bound": self.verdict.value},
                        self.verdict)


def type1_ratio(p: ConstructionParams, budget: ProbeBudget | None = None) -> RatioResult:
    """``average_eta ||sum eta_j g_j|| / sum_j ||g_j||`` against its lower bound."""
    budget = budget or ProbeBudget()
    etas = select_sign_vectors(p.N, budget)
    results = _combination_norms(p, etas, budget)
    average = _average([enc for enc, _ in results])
    norm_sum = RatInterval.point(0)
    for g in _family(p.n)[2]:
        norm_sum = norm_sum + weak_norm(g, budget.tol, budget.box_budget)
    if norm_sum.lo <= 0:
        raise RuntimeError("norm sum enclosure is not positive")
    ratio = average / norm_sum
    bound = ratio_bound(p.N)
    verdict = _bound_check(ratio, bound, Ordering.GREATER)
    if not all(done for _, done in results):
        verdict = Verdict.combine([verdict, Verdict.INCONCLUSIVE])
    return RatioResult(p, average, norm_sum, ratio, bound, verdict,
                       isinstance(budget.sign_mode, Sample))


def type_ratio_table(ns: Sequence[int], budget: ProbeBudget | None = None) -> ProbeReport:
    """Ratios for several bases, with a check that they increase strictly."""
    budget = budget or ProbeBudget()
    start = time.perf_counter()
    results = [type1_ratio(ConstructionParams(n), budget) for n in ns]
    rows = []
    for res in results:
        row = res.to_row()
        row.expected = None
        row.checks["bound"] = res.bound.decimal()
        rows.append(row)
    growth = [cmp_certified(b.ratio, a.ratio) for a, b in zip(results, results[1:])]
    increasing = Verdict.combine(
        Verdict.PASS if g is Ordering.GREATER else
        Verdict.FAIL if g is Ordering.LESS else Verdict.INCONCLUSIVE for g in growth)
    statistical = any(r.statistical for r in results)
    notes = ["statistical: sampled sign vectors"] if statistical else []
    report = ProbeReport("type-ratio", {"n": list(ns)}, budget.echo(), rows,
                         {f"bound_n{r.p.n}": r.bound for r in results},
                         {"strictly_increasing": increasing.value}, notes, statistical,
                         time.perf_counter() - start,
                         Verdict.combine([increasing] + [r.verdict for r in results]))
    return report
