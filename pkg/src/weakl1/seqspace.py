"""Weak-l1 sequences: exact rearrangement, quasi-norm and a sampled family.

A finite sequence ``x(1), ..., x(L)`` (zero beyond ``L``) has decreasing
rearrangement ``x*`` equal to its absolute values sorted downward, and
``||x||_{1,inf} = max_k k x*(k)``.  Both are exact.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .construction import (ConstructionParams, SignVector, all_sign_vectors, combine_signs,
                           make_g, make_sign_matrix)
from .errors import SizeError
from .numeric import RatInterval, as_rational, ln_enclosure, rat_decimal, rat_to_str
from .pwfunc import PiecewiseFn, step_fn, weak_norm

DEFAULT_MAX_LENGTH = 1 << 16
CONTINUUM_TOL = Fraction(1, 10**4)


@dataclass(frozen=True)
class FiniteSeq:
    """Exact finite sequence, 1-based in the mathematical sense."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(as_rational(v) for v in self.values))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def scaled(self, c) -> "FiniteSeq":
        c = as_rational(c)
        return FiniteSeq(tuple(c * v for v in self.values))

    def to_json(self) -> list:
        return [rat_to_str(v) for v in self.values]

    @classmethod
    def from_json(cls, doc: Sequence[str]) -> "FiniteSeq":
        return cls(tuple(Fraction(v) for v in doc))

    def to_csv(self) -> str:
        """``index,value,rearranged`` rows; exact values as ``p/q``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "value", "rearranged"])
        for i, (v, r) in enumerate(zip(self.values, seq_rearrange(self).values), start=1):
            writer.writerow([i, rat_to_str(v), rat_to_str(r)])
        return buf.getvalue()


def seq_rearrange(x: FiniteSeq | Iterable) -> FiniteSeq:
    """``x*``: absolute values in non-increasing order."""
    values = x.values if isinstance(x, FiniteSeq) else FiniteSeq(tuple(x)).values
    return FiniteSeq(tuple(sorted((abs(v) for v in values), reverse=True)))


def seq_weak_norm(x: FiniteSeq | Iterable) -> Fraction:
    """Exact ``max_k k x*(k)``; 0 for the empty sequence."""
    best = Fraction(0)
    for k, v in enumerate(seq_rearrange(x).values, start=1):
        if k * v > best:
            best = k * v
    return best


def as_step_function(x: FiniteSeq) -> PiecewiseFn:
    """``sum x(i) chi_{((i-1)/L, i/L]}``: the sequence squeezed into (0, 1]."""
    L = len(x)
    return step_fn((Fraction(i - 1, L), Fraction(i, L), v)
                   for i, v in enumerate(x.values, start=1))


def _check_length(p: ConstructionParams, max_length: int) -> int:
    L = p.n ** p.M
    if L > max_length:
        raise SizeError(
            f"n = {p.n} needs sequences of length {p.n}^{p.M}, above the limit "
            f"{max_length}; use the continuum verifier instead")
    return L


def discrete_family(p: ConstructionParams, max_length: int = DEFAULT_MAX_LENGTH) -> list:
    """Right-endpoint samples ``x_j(i) = g_j(i / L)``, ``L = n^M``, j = 1..N."""
    L = _check_length(p, max_length)
    E = make_sign_matrix(p)
    out = []
    for j in range(1, p.N + 1):
        g = make_g(p, j, E)
        values = [Fraction(0)] * L
        # walk segments and grid points together; breakpoints are multiples of 1/L
        for seg in g.segments:
            first = int(seg.a * L) + 1
            last = int(seg.b * L)
            for i in range(first, last + 1):
                values[i - 1] = seg.value(Fraction(i, L))
        out.append(FiniteSeq(tuple(values)))
    return out


def combine_sequences(xs: Sequence[FiniteSeq], eta: SignVector | Sequence[int]) -> FiniteSeq:
    length = max((len(x) for x in xs), default=0)
    values = [Fraction(0)] * length
    for x, e in zip(xs, eta):
        for i, v in enumerate(x.values):
            values[i] += e * v
    return FiniteSeq(tuple(values))


@dataclass
class DiscreteRow:
    eta: SignVector
    norm: Fraction          # seq_weak_norm / L
    position: str           # below / inside / above the target window
    continuum: RatInterval | None = None

    def to_json(self) -> dict:
        out = {"eta": str(self.eta), "norm": rat_to_str(self.norm),
               "norm_decimal": rat_decimal(self.norm)}
        if self.continuum is not None:
            out["continuum"] = self.continuum.to_json() | {"decimal": self.continuum.decimal()}
        return out


@dataclass
class DiscreteReport:
    n: int
    N: int
    M: int
    length: int
    lower: RatInterval
    upper: RatInterval
    rows: list
    seconds: float

    note = ("discrete norms are divided by the sequence length L so that counting "
            "measure matches Lebesgue measure on the mesh 1/L; positions are "
            "informational, no verdict is asserted")

    def to_json(self) -> dict:
        return {
            "kind": "discrete-lemma",
            "params": {"n": self.n, "N": self.N, "M": self.M, "L": str(self.length)},
            "normalization": self.note,
            "lower_target": self.lower.to_json(),
            "upper_target": self.upper.to_json(),
            "rows": [r.to_json() | {"position": r.position} for r in self.rows],
            "seconds": round(self.seconds, 3),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["eta", "norm", "norm_decimal", "position", "continuum_lo_decimal",
                         "continuum_hi_decimal"])
        for r in self.rows:
            cont = ([rat_decimal(r.continuum.lo), rat_decimal(r.continuum.hi)]
                    if r.continuum is not None else ["", ""])
            writer.writerow([str(r.eta), rat_to_str(r.norm), rat_decimal(r.norm), r.position,
                             *cont])
        return buf.getvalue()


def _position(value: Fraction, lower: RatInterval, upper: RatInterval) -> str:
    if value < lower.lo:
        return "below"
    if value > upper.hi:
        return "above"
    if lower.hi <= value <= upper.lo:
        return "inside"
    return "undecided"


def verify_discrete_lemma(p: ConstructionParams, max_length: int = DEFAULT_MAX_LENGTH,
                          eps=Fraction(1, 10**9),
                          continuum_tol: Fraction | None = CONTINUUM_TOL) -> DiscreteReport:
    """Exact normalized norms of ``sum eta_j x_j`` for every sign vector.

    Each norm is placed against ``[n ln n / 2, n ln n]`` (n = N + 1).  Unless
    ``continuum_tol`` is None, the certified norm of the continuous
    combination is reported next to it; the gap is discretization error.
    """
    start = time.perf_counter()
    L = _check_length(p, max_length)
    xs = discrete_family(p, max_length)
    ln = ln_enclosure(p.n, eps)
    upper = ln * p.n
    lower = upper * Fraction(1, 2)
    rows = []
    for eta in all_sign_vectors(p.N):
        value = seq_weak_norm(combine_sequences(xs, eta)) / L
        cont = (weak_norm(combine_signs(p, eta), continuum_tol)
                if continuum_tol is not None else None)
        rows.append(DiscreteRow(eta, value, _position(value, lower, upper), cont))
    return DiscreteReport(p.n, p.N, p.M, L, lower, upper, rows,
                          time.perf_counter() - start)
