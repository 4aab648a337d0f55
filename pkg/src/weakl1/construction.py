"""Builders for the counterexample family in weak-L1(0, 1).

For a base ``n`` put ``N = n - 1`` and ``M = 2**N``.  The atoms are

    f_ki(t) = 1/(t + n^{1-k} - i n^{-k})  on (n^{-k}, i n^{-k}]
            + 1/(t - (i-1) n^{-k})        on (i n^{-k}, n^{1-k}],

with ``k >= 1`` selecting the dyadic-in-``n`` scale block and ``1 <= i <= N``.
Sign rows ``eps^m`` enumerate {+1,-1}^N in binary order (row 1 all plus), and

    g_j = sum_m eps^m_j f_mj,     j = 1..N,

is the family whose Rademacher averages blow up relative to sum ||g_j||.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ParameterError
from .numeric import as_rational, cmp_certified, ln_enclosure, Ordering, RatInterval
from .pwfunc import (HyperTerm, PiecewiseFn, Segment, add_many, hyperbola, indicator, scale,
                     step_fn)

DEFAULT_BIT_BUDGET = 1 << 16


@dataclass(frozen=True)
class ConstructionParams:
    n: int
    bit_budget: int = DEFAULT_BIT_BUDGET

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ParameterError(f"base n must be an integer >= 2, got {self.n!r}")
        if self.M * (self.n.bit_length()) > self.bit_budget:
            raise ParameterError(
                f"n = {self.n}: n^(2^(n-1)) exceeds the bit budget {self.bit_budget}")

    @property
    def N(self) -> int:
        return self.n - 1

    @property
    def M(self) -> int:
        return 2 ** (self.n - 1)

    @property
    def inner(self) -> Fraction:
        """Innermost breakpoint ``n^{-M}``."""
        return Fraction(1, self.n ** self.M)


def params_for_family(N: int, **kw) -> ConstructionParams:
    """Parameters of the canonical family of ``N`` vectors (base ``N + 1``)."""
    return ConstructionParams(N + 1, **kw)


@dataclass(frozen=True)
class SignVector:
    entries: tuple

    def __post_init__(self):
        entries = tuple(self.entries)
        if any(e not in (1, -1) for e in entries):
            raise ParameterError(f"sign entries must be +1/-1: {entries}")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, j):
        return self.entries[j]

    def __neg__(self):
        return SignVector(tuple(-e for e in self.entries))

    def __str__(self):
        return "".join("+" if e > 0 else "-" for e in self.entries)

    @classmethod
    def parse(cls, text: str) -> "SignVector":
        try:
            return cls(tuple({"+": 1, "-": -1}[ch] for ch in text.strip()))
        except KeyError:
            raise ParameterError(f"bad sign string {text!r}") from None

    @classmethod
    def from_index(cls, index: int, length: int) -> "SignVector":
        """Binary enumeration: bit j of ``index`` set means entry j is -1."""
        return cls(tuple(-1 if (index >> j) & 1 else 1 for j in range(length)))


@dataclass(frozen=True)
class SignMatrix:
    rows: tuple
    m0: int = 1

    def __post_init__(self):
        if len(set(self.rows)) != len(self.rows):
            raise ParameterError("sign rows must be pairwise distinct")

    def row(self, m: int) -> SignVector:
        return self.rows[m - 1]


def make_sign_matrix(p: ConstructionParams) -> SignMatrix:
    rows = tuple(SignVector.from_index(m, p.N) for m in range(p.M))
    return SignMatrix(rows, m0=1)


def all_sign_vectors(N: int) -> list:
    return [SignVector.from_index(i, N) for i in range(2 ** N)]


def _check_k(p: ConstructionParams, k: int):
    if not isinstance(k, int) or k < 1:
        raise ParameterError(f"block index must be >= 1, got {k!r}")


def _check_i(p: ConstructionParams, i: int):
    if not isinstance(i, int) or not 1 <= i <= p.N:
        raise ParameterError(f"index must be in [1, {p.N}], got {i!r}")


def _f_segments(p: ConstructionParams, k: int, i: int, sign: int = 1) -> list:
    n = p.n
    unit = Fraction(1, n ** k)
    top = Fraction(1, n ** (k - 1))
    segs = []
    if i > 1:  # (n^-k, i n^-k] is empty for i = 1
        segs.append(Segment(unit, i * unit, 0, (HyperTerm(sign, top - i * unit),)))
    segs.append(Segment(i * unit, top, 0, (HyperTerm(sign, -(i - 1) * unit),)))
    return segs


def make_f_ki(p: ConstructionParams, k: int, i: int) -> PiecewiseFn:
    _check_k(p, k)
    _check_i(p, i)
    return PiecewiseFn(_f_segments(p, k, i), scale_base=p.n)


def make_F_k(p: ConstructionParams, k: int) -> PiecewiseFn:
    """``F_k`` as the exact sum of ``f_k1, ..., f_kN``."""
    _check_k(p, k)
    return add_many([make_f_ki(p, k, j) for j in range(1, p.N + 1)])


def make_F_k_closed(p: ConstructionParams, k: int) -> PiecewiseFn:
    """``F_k`` built blockwise: shifts ``(j - i) n^{-k}`` on ``(i n^{-k}, (i+1) n^{-k}]``."""
    _check_k(p, k)
    unit = Fraction(1, p.n ** k)
    segs = [Segment(i * unit, (i + 1) * unit, 0,
                    tuple(HyperTerm(1, (j - i) * unit) for j in range(1, p.N + 1)))
            for i in range(1, p.N + 1)]
    return PiecewiseFn(segs, scale_base=p.n).normalized()


def make_G_m(p: ConstructionParams, m: int, E: SignMatrix | None = None) -> PiecewiseFn:
    if not 1 <= m <= p.M:
        raise ParameterError(f"block index must be in [1, {p.M}], got {m}")
    E = E or make_sign_matrix(p)
    row = E.row(m)
    return add_many([scale(make_f_ki(p, m, j), row[j - 1]) for j in range(1, p.N + 1)])


def make_g(p: ConstructionParams, j: int, E: SignMatrix | None = None) -> PiecewiseFn:
    """``g_j = sum_m eps^m_j f_mj``; supported on ``(n^{-M}, 1]``."""
    _check_i(p, j)
    E = E or make_sign_matrix(p)
    segs = []
    for m in range(p.M, 0, -1):  # innermost block first keeps segments sorted
        segs.extend(_f_segments(p, m, j, E.row(m)[j - 1]))
    return PiecewiseFn(segs, scale_base=p.n)


def family(N: int, E: SignMatrix | None = None) -> list:
    """The canonical family ``g_1, ..., g_N`` (base ``n = N + 1``)."""
    p = params_for_family(N)
    E = E or make_sign_matrix(p)
    return [make_g(p, j, E) for j in range(1, N + 1)]


def combine_signs(p: ConstructionParams, eta: SignVector | Sequence[int],
                  E: SignMatrix | None = None, gs: Sequence[PiecewiseFn] | None = None) -> PiecewiseFn:
    """``sum_j eta_j g_j``."""
    eta = eta if isinstance(eta, SignVector) else SignVector(tuple(eta))
    if len(eta) != p.N:
        raise ParameterError(f"sign vector has length {len(eta)}, expected {p.N}")
    E = E or make_sign_matrix(p)
    gs = gs if gs is not None else [make_g(p, j, E) for j in range(1, p.N + 1)]
    return add_many([scale(g, e) for g, e in zip(gs, eta)])


def combine_by_blocks(p: ConstructionParams, eta: SignVector, E: SignMatrix | None = None) -> PiecewiseFn:
    """Same function regrouped as ``sum_m sum_j alpha^m_j f_mj`` with ``alpha = eta * eps^m``."""
    E = E or make_sign_matrix(p)
    parts = []
    for m in range(1, p.M + 1):
        row = E.row(m)
        for j in range(1, p.N + 1):
            parts.append(scale(make_f_ki(p, m, j), eta[j - 1] * row[j - 1]))
    return add_many(parts)


def make_step_majorant(p: ConstructionParams, lnn_hi) -> PiecewiseFn:
    """Step function ``n^m * lnn_hi`` on ``(n^{-m}, n^{1-m}]``, m = 1..M."""
    lnn_hi = as_rational(lnn_hi)
    eps = Fraction(1, 10**6)
    while True:
        enc = ln_enclosure(p.n, eps)
        verdict = cmp_certified(RatInterval.point(lnn_hi), enc)
        if verdict is Ordering.GREATER:
            break
        if verdict is Ordering.LESS or eps < Fraction(1, 10**60):
            raise ParameterError(f"{lnn_hi} is not a certified upper bound for ln {p.n}")
        eps /= 10**6
    n = p.n
    return step_fn((Fraction(1, n ** m), Fraction(1, n ** (m - 1)), n ** m * lnn_hi)
                   for m in range(1, p.M + 1))


def resolve_selector(text: str) -> PiecewiseFn:
    """Parse a construction selector.

    ``f:n:k:i``, ``F:n:k``, ``Fc:n:k`` (blockwise form), ``G:n:m``,
    ``g:n:j``, ``sum:n:+-+`` (signed combination), ``major:n``; plus the
    unit indicator ``one`` and ``recip:c`` for ``1/(t + c)`` on (0, 1].
    """
    parts = text.split(":")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "one" and not args:
            return indicator(0, 1)
        if kind == "recip" and len(args) == 1:
            return hyperbola(0, 1, Fraction(args[0]))
        if kind == "sum":
            p = ConstructionParams(int(args[0]))
            return combine_signs(p, SignVector.parse(args[1]))
        nums = [int(a) for a in args]
        p = ConstructionParams(nums[0])
        if kind == "f" and len(nums) == 3:
            return make_f_ki(p, nums[1], nums[2])
        if kind == "F" and len(nums) == 2:
            return make_F_k(p, nums[1])
        if kind == "Fc" and len(nums) == 2:
            return make_F_k_closed(p, nums[1])
        if kind == "G" and len(nums) == 2:
            return make_G_m(p, nums[1])
        if kind == "g" and len(nums) == 2:
            return make_g(p, nums[1])
        if kind == "major" and len(nums) == 1:
            return make_step_majorant(p, ln_enclosure(p.n).hi)
    except (ValueError, IndexError, ZeroDivisionError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"bad selector {text!r}") from None
    raise ParameterError(f"unknown selector {text!r}")
