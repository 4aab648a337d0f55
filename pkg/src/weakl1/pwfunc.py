"""Piecewise sums of shifted reciprocals on (0, 1] and their weak-L1 data.

A :class:`PiecewiseFn` is a sorted list of disjoint half-open segments
``(a, b]``; on each one the value is ``constant + sum coeff / (t + shift)``.
Everything is exact: evaluation returns Fractions, measures and norms return
:class:`~weakl1.numeric.RatInterval` enclosures.

Certified computations go through a *normal form*: on ``(a, b]`` with width
``w`` put ``t = a + w s``; then ``f = h(s) / w`` with

    h(s) = constant * w + sum coeff / (s + (a + shift) / w),   s in (0, 1].

Segments that are rescaled copies of each other share one :class:`Shape`,
and shapes cache their level-set measures, so the many self-similar blocks of
the counterexample construction are resolved once.
"""
from __future__ import annotations

import bisect
import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import kernel
from .errors import DomainError, InconclusiveError, ParameterError
from .numeric import RatInterval, RationalLike, as_rational, rat_to_str

ZERO = Fraction(0)
ONE = Fraction(1)

DISTRIBUTION_BUDGET = 10**6
NORM_BOX_BUDGET = 200_000
_SHAPE_QUERY_BUDGET = 200_000


# ---------------------------------------------------------------------------
# representation

@dataclass(frozen=True)
class HyperTerm:
    """``t -> coeff / (t + shift)``."""

    coeff: Fraction
    shift: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_rational(self.coeff))
        object.__setattr__(self, "shift", as_rational(self.shift))

    def __call__(self, t: Fraction) -> Fraction:
        return self.coeff / (t + self.shift)


def _merge_terms(terms: Iterable[HyperTerm]) -> tuple:
    # sort-and-fuse rather than a dict: hashing Fractions with huge
    # denominators costs a modular inverse each
    ordered = sorted(terms, key=lambda term: term.shift)
    out = []
    i = 0
    while i < len(ordered):
        shift, coeff = ordered[i].shift, ordered[i].coeff
        j = i + 1
        while j < len(ordered) and ordered[j].shift == shift:
            coeff += ordered[j].coeff
            j += 1
        if coeff != 0:
            out.append(ordered[i] if j == i + 1 else HyperTerm(coeff, shift))
        i = j
    return tuple(out)


@dataclass(frozen=True)
class Segment:
    """One piece ``constant + sum(terms)`` supported on ``(a, b]``."""

    a: Fraction
    b: Fraction
    constant: Fraction = ZERO
    terms: tuple = ()

    def __post_init__(self):
        a, b = as_rational(self.a), as_rational(self.b)
        if not (0 <= a < b <= 1):
            raise DomainError(f"segment ({a}, {b}] must satisfy 0 <= a < b <= 1")
        terms = tuple(self.terms)
        for term in terms:
            if not isinstance(term, HyperTerm):
                raise TypeError("segment terms must be HyperTerm instances")
            # t + shift must not vanish on (a, b]
            if not (a + term.shift >= 0 or b + term.shift < 0):
                raise DomainError(
                    f"term 1/(t + {term.shift}) has a pole inside ({a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "constant", as_rational(self.constant))
        object.__setattr__(self, "terms", terms)

    @classmethod
    def _trusted(cls, a: Fraction, b: Fraction, constant: Fraction, terms: tuple) -> "Segment":
        # sub-pieces of validated segments need no re-validation
        seg = object.__new__(cls)
        object.__setattr__(seg, "a", a)
        object.__setattr__(seg, "b", b)
        object.__setattr__(seg, "constant", constant)
        object.__setattr__(seg, "terms", terms)
        return seg

    @property
    def width(self) -> Fraction:
        return self.b - self.a

    def value(self, t: Fraction) -> Fraction:
        return self.constant + sum((term(t) for term in self.terms), ZERO)

    def is_zero(self) -> bool:
        return self.constant == 0 and not _merge_terms(self.terms)

    def normal_shape(self) -> "Shape":
        w = self.width
        return get_shape(self.constant * w,
                         [((self.a + t.shift) / w, t.coeff) for t in self.terms])


class PiecewiseFn:
    """Finite piecewise function on (0, 1]; zero off its segments.

    Parameters
    ----------
    segments : sequence of Segment
        Sorted by ``a`` with pairwise disjoint supports.
    scale_base : int, optional
        Integer ``b`` such that segment widths are (mostly) ``b``-adic
        rescalings of each other.  Only a performance hint for
        :func:`weak_norm`; results do not depend on it.
    """

    __slots__ = ("segments", "scale_base", "_starts", "_forms")

    def __init__(self, segments: Sequence[Segment] = (), scale_base: int | None = None):
        segs = tuple(segments)
        for prev, cur in zip(segs, segs[1:]):
            if prev.b > cur.a:
                raise DomainError(
                    f"segments ({prev.a}, {prev.b}] and ({cur.a}, {cur.b}] are unsorted or overlap")
        self.segments = segs
        self.scale_base = scale_base
        self._starts = [s.a for s in segs]
        self._forms = None

    def __repr__(self):
        return f"PiecewiseFn({len(self.segments)} segments)"

    def __eq__(self, other):
        if not isinstance(other, PiecewiseFn):
            return NotImplemented
        return self.segments == other.segments

    def __hash__(self):
        return hash(self.segments)

    def __call__(self, t: RationalLike) -> Fraction:
        return eval_exact(self, t)

    def __add__(self, other):
        return add(self, other)

    def __neg__(self):
        return scale(self, -1)

    def __sub__(self, other):
        return add(self, scale(other, -1))

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__

    @property
    def support(self) -> list:
        """Maximal intervals ``(a, b]`` covered by non-zero segments."""
        out: list = []
        for seg in self.segments:
            if seg.is_zero():
                continue
            if out and out[-1][1] == seg.a:
                out[-1] = (out[-1][0], seg.b)
            else:
                out.append((seg.a, seg.b))
        return out

    @property
    def is_step(self) -> bool:
        return all(not s.terms for s in self.segments)

    def find(self, t: Fraction) -> Segment | None:
        i = bisect.bisect_left(self._starts, t) - 1
        if i >= 0 and self.segments[i].a < t <= self.segments[i].b:
            return self.segments[i]
        return None

    def normal_forms(self) -> list:
        """``[(width, Shape)]`` for the non-zero segments."""
        if self._forms is None:
            forms = []
            for seg in self.segments:
                shape = seg.normal_shape()
                if not shape.is_zero:
                    forms.append((seg.width, shape))
            self._forms = forms
        return self._forms

    def normalized(self, merged: bool = False) -> "PiecewiseFn":
        """Merge equal terms, drop zero pieces, fuse identical neighbours."""
        out: list = []
        for seg in self.segments:
            terms = seg.terms if merged else _merge_terms(seg.terms)
            if seg.constant == 0 and not terms:
                continue
            if (out and out[-1].b == seg.a and out[-1].constant == seg.constant
                    and out[-1].terms == terms):
                out[-1] = Segment._trusted(out[-1].a, seg.b, seg.constant, terms)
            else:
                out.append(Segment._trusted(seg.a, seg.b, seg.constant, terms))
        return PiecewiseFn(out, self.scale_base)

    # serialization -------------------------------------------------------

    def to_json(self) -> dict:
        doc = {"segments": [
            {"a": rat_to_str(s.a), "b": rat_to_str(s.b),
             "constant": rat_to_str(s.constant),
             "terms": [{"coeff": rat_to_str(t.coeff), "shift": rat_to_str(t.shift)}
                       for t in s.terms]}
            for s in self.segments]}
        if self.scale_base is not None:
            doc["scale_base"] = self.scale_base
        return doc

    @classmethod
    def from_json(cls, doc) -> "PiecewiseFn":
        if isinstance(doc, list):
            doc = {"segments": doc}
        segs = [Segment(Fraction(s["a"]), Fraction(s["b"]),
                        Fraction(s.get("constant", "0")),
                        tuple(HyperTerm(Fraction(t["coeff"]), Fraction(t["shift"]))
                              for t in s.get("terms", ())))
                for s in doc["segments"]]
        return cls(segs, doc.get("scale_base"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "PiecewiseFn":
        return cls.from_json(json.loads(text))


def zero() -> PiecewiseFn:
    return PiecewiseFn(())


def indicator(a: RationalLike, b: RationalLike, value: RationalLike = 1) -> PiecewiseFn:
    """``value`` times the indicator of ``(a, b]``."""
    return PiecewiseFn([Segment(as_rational(a), as_rational(b), as_rational(value))])


def hyperbola(a: RationalLike, b: RationalLike, shift: RationalLike = 0,
              coeff: RationalLike = 1) -> PiecewiseFn:
    """``coeff / (t + shift)`` on ``(a, b]``."""
    return PiecewiseFn([Segment(as_rational(a), as_rational(b), ZERO,
                                (HyperTerm(as_rational(coeff), as_rational(shift)),))])


def step_fn(pieces: Iterable) -> PiecewiseFn:
    """Step function from ``(a, b, value)`` triples (the StepFn type)."""
    segs = sorted((Segment(as_rational(a), as_rational(b), as_rational(v))
                   for a, b, v in pieces), key=lambda s: s.a)
    return PiecewiseFn(segs)


# ---------------------------------------------------------------------------
# normalized shapes

class Shape:
    """Normalized piece ``h(s) = c0 + sum c_k / (s + sigma_k)`` on (0, 1].

    Sign-canonical: ``h`` and ``-h`` map to the same Shape, since only
    ``|h|`` matters for measures.
    """

    __slots__ = ("key", "c0", "sigmas", "coeffs", "pole", "is_zero",
                 "sup_abs", "inf_abs", "regular_bound", "_cache")

    def __init__(self, c0: Fraction, sigmas: tuple, coeffs: tuple):
        self.c0 = c0
        self.sigmas = sigmas
        self.coeffs = coeffs
        self.key = (c0, sigmas, coeffs)
        self.is_zero = c0 == 0 and not coeffs
        self.pole = ZERO
        for sig, c in zip(sigmas, coeffs):
            if sig == 0:
                self.pole = abs(c)
        self._cache: dict = {}
        self._bounds()

    def __repr__(self):
        terms = " ".join(f"{c:+}/(s+{s})" for s, c in zip(self.sigmas, self.coeffs))
        return f"Shape({self.c0} {terms})"

    def _bounds(self, pieces: int = 16):
        sup = ZERO
        inf = None
        for k in range(pieces):
            lo, hi = kernel.shape_range(self.c0, self.sigmas, self.coeffs,
                                        Fraction(k, pieces), Fraction(k + 1, pieces))
            if lo is None or hi is None:
                sup = None
            elif sup is not None:
                sup = max(sup, abs(lo), abs(hi))
            if lo is not None and lo > 0:
                cell_inf = lo
            elif hi is not None and hi < 0:
                cell_inf = -hi
            else:
                cell_inf = ZERO
            inf = cell_inf if inf is None else min(inf, cell_inf)
        self.sup_abs = sup
        self.inf_abs = inf if inf is not None else ZERO
        regular = [(s, c) for s, c in zip(self.sigmas, self.coeffs) if s != 0]
        lo, hi = kernel.shape_range(self.c0, tuple(s for s, _ in regular),
                                    tuple(c for _, c in regular), ZERO, ONE)
        self.regular_bound = max(abs(lo), abs(hi))

    def value(self, s: Fraction) -> Fraction:
        return self.c0 + sum((c / (s + sig) for sig, c in zip(self.sigmas, self.coeffs)), ZERO)

    def range(self, s1: Fraction, s2: Fraction):
        return kernel.shape_range(self.c0, self.sigmas, self.coeffs, s1, s2)

    def measure(self, mu: Fraction, q: int) -> tuple:
        """Enclosure of ``|{s : |h(s)| > mu}|`` with width ``<= 2**-q``.

        Pure function of ``(shape, mu, q)``; memoized.
        """
        key = (mu, q)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self.sup_abs is not None and self.sup_abs <= mu:
            res = (ZERO, ZERO, 0)
        elif self.inf_abs > mu:
            res = (ONE, ONE, 0)
        else:
            lo, hi, evals, _ = kernel.level_measure(
                self.c0, self.sigmas, self.coeffs, mu, Fraction(1, 1 << q),
                _SHAPE_QUERY_BUDGET)
            res = (lo, hi, evals)
        self._cache[key] = res
        return res


_SHAPES: dict = {}


def get_shape(c0: Fraction, terms: Iterable) -> Shape:
    """Canonical shared :class:`Shape` for ``c0 + sum c/(s + sigma)``."""
    acc: dict = {}
    for sig, c in terms:
        acc[sig] = acc.get(sig, ZERO) + c
    items = sorted((s, c) for s, c in acc.items() if c != 0)
    sigmas = tuple(s for s, _ in items)
    coeffs = tuple(c for _, c in items)
    lead = c0 if c0 != 0 else (coeffs[0] if coeffs else ZERO)
    if lead < 0:
        c0 = -c0
        coeffs = tuple(-c for c in coeffs)
    key = (c0, sigmas, coeffs)
    shape = _SHAPES.get(key)
    if shape is None:
        shape = _SHAPES[key] = Shape(c0, sigmas, coeffs)
    return shape


def clear_caches():
    """Drop all shared shape caches (tests use this for isolation)."""
    _SHAPES.clear()


# ---------------------------------------------------------------------------
# algebra

def eval_exact(f: PiecewiseFn, t: RationalLike) -> Fraction:
    t = as_rational(t)
    if not (0 < t <= 1):
        raise DomainError(f"t = {t} outside (0, 1]")
    seg = f.find(t)
    return ZERO if seg is None else seg.value(t)


def eval_interval(f: PiecewiseFn, T: RatInterval) -> RatInterval:
    """Tight enclosure of ``f`` over ``T``, which must lie in one segment's closure."""
    if T.lo < 0 or T.hi > 1:
        raise DomainError(f"{T} not inside [0, 1]")
    i = bisect.bisect_right(f._starts, T.lo) - 1
    seg = None
    for j in (i, i + 1):
        if 0 <= j < len(f.segments):
            cand = f.segments[j]
            if cand.a <= T.lo and T.hi <= cand.b:
                seg = cand
                break
    if seg is None:
        starts = [s.a for s in f.segments] + [s.b for s in f.segments]
        if any(T.lo < x < T.hi for x in starts):
            raise DomainError(f"{T} straddles a breakpoint; split it first")
        return RatInterval.point(0)
    lo, hi = kernel.shape_range(seg.constant, tuple(t.shift for t in seg.terms),
                                tuple(t.coeff for t in seg.terms), T.lo, T.hi)
    if lo is None or hi is None:
        raise DomainError(f"{T} touches a pole of the function")
    return RatInterval(lo, hi)


def _sorted_cuts(fs) -> list:
    points = sorted(x for f in fs for s in f.segments for x in (s.a, s.b))
    return [x for k, x in enumerate(points) if k == 0 or x != points[k - 1]]


def _pieces_on(f: PiecewiseFn, cuts: list) -> list:
    out = []
    j = 0
    segs = f.segments
    for x, y in zip(cuts, cuts[1:]):
        while j < len(segs) and segs[j].b <= x:
            j += 1
        if j < len(segs) and segs[j].a <= x and y <= segs[j].b:
            out.append(segs[j])
        else:
            out.append(None)
    return out


def _common_base(f: PiecewiseFn, g: PiecewiseFn):
    if f.scale_base == g.scale_base:
        return f.scale_base
    if not f.segments:
        return g.scale_base
    if not g.segments:
        return f.scale_base
    return None


def add(f: PiecewiseFn, g: PiecewiseFn) -> PiecewiseFn:
    """Exact pointwise sum on the common refinement of both partitions."""
    cuts = _sorted_cuts([f, g])
    pf, pg = _pieces_on(f, cuts), _pieces_on(g, cuts)
    out = []
    for (x, y), sf, sg in zip(zip(cuts, cuts[1:]), pf, pg):
        if sf is None and sg is None:
            continue
        const = (sf.constant if sf else ZERO) + (sg.constant if sg else ZERO)
        terms = _merge_terms((sf.terms if sf else ()) + (sg.terms if sg else ()))
        out.append(Segment._trusted(x, y, const, terms))
    return PiecewiseFn(out, _common_base(f, g)).normalized(merged=True)


def add_many(fs: Sequence[PiecewiseFn]) -> PiecewiseFn:
    """Sum of several functions in one refinement pass."""
    fs = list(fs)
    if not fs:
        return zero()
    cuts = _sorted_cuts(fs)
    buckets: list = [[] for _ in range(max(len(cuts) - 1, 0))]
    for f in fs:
        for seg in f.segments:
            lo = bisect.bisect_left(cuts, seg.a)
            hi = bisect.bisect_left(cuts, seg.b, lo)
            for idx in range(lo, hi):
                buckets[idx].append(seg)
    out = []
    for idx, segs in enumerate(buckets):
        if segs:
            const = sum((seg.constant for seg in segs), ZERO)
            terms = _merge_terms(term for seg in segs for term in seg.terms)
            out.append(Segment._trusted(cuts[idx], cuts[idx + 1], const, terms))
    base = fs[0].scale_base if all(f.scale_base == fs[0].scale_base for f in fs) else None
    return PiecewiseFn(out, base).normalized(merged=True)


def scale(f: PiecewiseFn, c: RationalLike) -> PiecewiseFn:
    c = as_rational(c)
    if c == 0:
        return zero()
    return PiecewiseFn([Segment(s.a, s.b, c * s.constant,
                                tuple(HyperTerm(c * t.coeff, t.shift) for t in s.terms))
                        for s in f.segments], f.scale_base)


def restrict(f: PiecewiseFn, a: RationalLike, b: RationalLike) -> PiecewiseFn:
    """``f`` times the indicator of ``(a, b]``."""
    a, b = as_rational(a), as_rational(b)
    out = []
    for s in f.segments:
        lo, hi = max(s.a, a), min(s.b, b)
        if lo < hi:
            out.append(Segment(lo, hi, s.constant, s.terms))
    return PiecewiseFn(out, f.scale_base)


# ---------------------------------------------------------------------------
# distribution function and rearrangement

def _log2_ceil(x: Fraction) -> int:
    # smallest q with 2**q >= x, for x > 0
    q = x.numerator.bit_length() - x.denominator.bit_length()
    while Fraction(2) ** q < x:
        q += 1
    while q > 0 and Fraction(2) ** (q - 1) >= x:
        q -= 1
    return q


def distribution(f: PiecewiseFn, lam: RationalLike, tol: RationalLike,
                 budget: int = DISTRIBUTION_BUDGET) -> RatInterval:
    """Enclosure of ``|{t : |f(t)| > lam}|`` of width at most ``tol``."""
    lam, tol = as_rational(lam), as_rational(tol)
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam}")
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    forms = f.normal_forms()
    if lam == 0:
        # h has finitely many zeros unless identically zero
        total = sum((w for w, _ in forms), ZERO)
        return RatInterval(total, total)
    lo = ZERO
    amb = []
    for w, shape in forms:
        mu = lam * w
        if shape.sup_abs is not None and shape.sup_abs <= mu:
            continue
        if shape.inf_abs > mu:
            lo += w
            continue
        amb.append((w, shape, mu))
    remaining = sum((w for w, _, _ in amb), ZERO)
    if remaining <= tol:
        return RatInterval(lo, lo + remaining)
    amb.sort(key=lambda item: item[0], reverse=True)
    share = tol / len(amb)
    hi = lo
    evals = 0
    for w, shape, mu in amb:
        remaining -= w
        if w <= share:
            hi += w
            continue
        q = _log2_ceil(w / share)
        mlo, mhi, used = shape.measure(mu, q)
        evals += used
        lo += w * mlo
        hi += w * mhi
        if evals > budget:
            raise InconclusiveError(
                "distribution: refinement budget exhausted",
                RatInterval(lo, hi + remaining))
    enc = RatInterval(lo, hi)
    if enc.width > tol:
        raise InconclusiveError("distribution: precision not reached", enc)
    return enc


def sup_bound(f: PiecewiseFn) -> Fraction | None:
    """Certified upper bound on ``sup |f|``; ``None`` if ``f`` is unbounded."""
    best = ZERO
    for w, shape in f.normal_forms():
        if shape.sup_abs is None:
            return None
        best = max(best, shape.sup_abs / w)
    return best


def rearrangement_at(f: PiecewiseFn, t: RationalLike, tol: RationalLike,
                     max_refine: int = 8) -> RatInterval:
    """Enclosure of ``f*(t) = inf{s > 0 : d_f(s) <= t}`` with relative width ``<= tol``."""
    t, tol = as_rational(t), as_rational(tol)
    if not (0 < t < 1):
        raise DomainError(f"t = {t} outside (0, 1)")
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if distribution(f, 0, ONE).hi <= t:
        return RatInterval.point(0)

    def side(s: Fraction) -> int | None:
        # +1: d(s) <= t (s is an upper bound); -1: d(s) > t; None: undecided
        dtol = max(t, Fraction(1, 1 << 40)) * tol / 8
        for _ in range(max_refine):
            try:
                enc = distribution(f, s, dtol)
            except InconclusiveError as exc:
                enc = exc.enclosure
            if enc.hi <= t:
                return 1
            if enc.lo > t:
                return -1
            dtol /= 16
        return None

    hi = sup_bound(f)
    if hi is None:
        hi = ONE
        while side(hi) != 1:
            hi *= 2
    lo = ZERO
    # exponential descent toward a positive lower bound
    step = 1
    while lo == 0:
        cand = hi / Fraction(2) ** step
        verdict = side(cand)
        if verdict == 1:
            hi = cand
            step *= 2
        elif verdict == -1:
            lo = cand
        else:
            raise InconclusiveError("rearrangement: undecided level", RatInterval(ZERO, hi))
    stalls = 0
    while hi - lo > tol * hi:
        if hi > 4 * lo:
            mid = _geometric_mid(lo, hi)
        else:
            mid = (lo + hi) / 2 if stalls == 0 else lo + (hi - lo) * Fraction(1, 2 + stalls)
        verdict = side(mid)
        if verdict == 1:
            hi, stalls = mid, 0
        elif verdict == -1:
            lo, stalls = mid, 0
        else:
            stalls += 1
            if stalls > 4:
                raise InconclusiveError("rearrangement: undecided level", RatInterval(lo, hi))
    return RatInterval(lo, hi)


def _geometric_mid(lo: Fraction, hi: Fraction) -> Fraction:
    e = (lo.numerator.bit_length() - lo.denominator.bit_length()
         + hi.numerator.bit_length() - hi.denominator.bit_length()) // 2
    mid = Fraction(2) ** e
    if not (lo < mid < hi):
        mid = (lo + hi) / 2
    return mid


# ---------------------------------------------------------------------------
# weak-L1 quasi-norm

def step_norm_exact(s: PiecewiseFn) -> Fraction:
    """Exact ``sup_lambda lambda * d_s(lambda)`` of a step function."""
    if not s.is_step:
        raise ParameterError("step_norm_exact needs a step function (no terms)")
    mass: dict = {}
    for seg in s.segments:
        v = abs(seg.constant)
        if v:
            mass[v] = mass.get(v, ZERO) + seg.width
    best = ZERO
    cum = ZERO
    for v in sorted(mass, reverse=True):
        cum += mass[v]
        best = max(best, v * cum)
    return best


@dataclass
class _Group:
    w: Fraction
    shapes: tuple
    count: int
    sup: Fraction | None  # max |h| over non-pole shapes; None if any pole


@dataclass(order=True)
class _Box:
    key: tuple
    kind: str = field(compare=False)  # "box" | "head" | "tail"
    e: int = field(compare=False, default=0)
    r1: Fraction = field(compare=False, default=ZERO)
    r2: Fraction = field(compare=False, default=ZERO)
    q: int = field(compare=False, default=0)
    lam: Fraction = field(compare=False, default=ZERO)
    ub: Fraction | None = field(compare=False, default=None)
    width_part: Fraction = field(compare=False, default=ZERO)
    ratio_part: Fraction = field(compare=False, default=ZERO)


class _NormSolver:
    """Best-first branch and bound of ``lambda * d_f(lambda)`` over lambda.

    Segments of equal width form a group; ``lambda * d_f(lambda)`` is the sum
    over groups of ``lambda * w * D_g(lambda * w)`` with ``D_g`` the summed
    normalized level measures.  A box ``[l1, l2]`` is bounded above by
    ``l2 * d(l1).hi`` (``d`` is non-increasing); every evaluated left
    endpoint contributes the point lower bound ``l1 * d(l1).lo``.

    Boxes live on the lattice ``rho * b**e`` (``rho`` dyadic in ``[1, b]``)
    so that rescaled groups hit identical cached shape queries.
    """

    def __init__(self, f: PiecewiseFn, tol: Fraction, budget: int):
        self.tol = tol
        self.budget = budget
        self.base = f.scale_base if f.scale_base and f.scale_base >= 2 else 2
        by_w: dict = {}
        for w, shape in f.normal_forms():
            by_w.setdefault(w, []).append(shape)
        groups = []
        for w in sorted(by_w, reverse=True):
            shapes = tuple(by_w[w])
            sup = ZERO
            for sh in shapes:
                if sh.sup_abs is None:
                    sup = None
                    break
                sup = max(sup, sh.sup_abs)
            groups.append(_Group(w, shapes, len(shapes), sup))
        self.groups = groups
        # prefix max of sup/w (activation threshold), suffix mass
        self.prefix = []
        run = ZERO
        self.first_pole = len(groups)
        for i, g in enumerate(groups):
            if g.sup is None:
                self.first_pole = min(self.first_pole, i)
            else:
                run = max(run, g.sup / g.w)
            self.prefix.append(run)
        self.suffix = [ZERO] * (len(groups) + 1)
        for i in range(len(groups) - 1, -1, -1):
            self.suffix[i] = self.suffix[i + 1] + groups[i].w * groups[i].count
        self.total = self.suffix[0]
        # pole segments: (|c|, bound on the regular part, w)
        self.poles = [(sh.pole, sh.regular_bound, g.w)
                      for g in groups for sh in g.shapes if sh.sup_abs is None]
        self.finite_top = max((sh.sup_abs / g.w for g in groups for sh in g.shapes
                               if sh.sup_abs is not None), default=ZERO)
        self.lb = sum((c for c, _, _ in self.poles), ZERO)
        self.pruned = ZERO
        self.boxes = 0
        self.shape_evals = 0
        self._pow: dict = {}
        self._seq = 0
        self.q0 = max(4, _log2_ceil(1 / tol) + 3)

    def power(self, e: int) -> Fraction:
        p = self._pow.get(e)
        if p is None:
            p = self._pow[e] = Fraction(self.base) ** e
        return p

    def _start(self, lam: Fraction) -> int:
        hi = self.first_pole
        return bisect.bisect_right(self.prefix, lam, 0, hi) if hi else 0

    def evaluate(self, e: int, r1: Fraction, r2: Fraction, q: int) -> _Box:
        self.boxes += 1
        p = self.power(e)
        l1, l2 = r1 * p, r2 * p
        s_hi = s_lo = ZERO
        i = self._start(l1)
        n = len(self.groups)
        cutoff = self.tol / 16
        while i < n:
            ref = max(self.lb, l1 * s_lo)
            if ref > 0 and l2 * self.suffix[i] <= cutoff * ref:
                break
            g = self.groups[i]
            i += 1
            mu = l1 * g.w
            if g.sup is not None and g.sup <= mu:
                continue
            dlo = dhi = ZERO
            for sh in g.shapes:
                mlo, mhi, used = sh.measure(mu, q)
                self.shape_evals += used
                dlo += mlo
                dhi += mhi
            s_lo += g.w * dlo
            s_hi += g.w * dhi
        tail = self.suffix[i] if i < n else ZERO
        ub = l2 * (s_hi + tail)
        point = l1 * s_lo
        if point > self.lb:
            self.lb = point
        return self._push_key(_Box((), "box", e, r1, r2, q, l1, ub,
                                   l2 * (s_hi - s_lo + tail), (l2 - l1) * s_lo))

    def _push_key(self, box: _Box) -> _Box:
        self._seq += 1
        box.key = (0, ZERO, self._seq) if box.ub is None else (1, -box.ub, self._seq)
        return box

    def head(self, e: int) -> _Box:
        lam = self.power(e)
        return self._push_key(_Box((), "head", e=e, lam=lam, ub=lam * self.total))

    def tail(self, e: int) -> _Box:
        lam = self.power(e)
        ub = ZERO
        for c, reg, w in self.poles:
            mu = lam * w
            if mu <= reg:
                ub = None
                break
            ub += mu * c / (mu - reg) if mu >= reg + c else reg + c
        return self._push_key(_Box((), "tail", e=e, lam=lam, ub=ub))

    def enclosure(self) -> RatInterval:
        hi = max(self.pruned, self.lb)
        for box in self.heap:
            if box.ub is None:
                return RatInterval(self.lb, self.lb + 10**100)
            hi = max(hi, box.ub)
        return RatInterval(self.lb, hi)

    def run(self) -> RatInterval:
        self.heap: list = []
        if not self.groups:
            return RatInterval.point(0)
        e_top = 0
        while self.power(e_top) < self.finite_top:
            e_top += 1
        while e_top > -4096 and self.power(e_top - 1) >= self.finite_top:
            e_top -= 1
        b = Fraction(self.base)
        heapq.heappush(self.heap, self.evaluate(e_top - 1, ONE, b, self.q0))
        heapq.heappush(self.heap, self.head(e_top - 1))
        if self.poles:
            heapq.heappush(self.heap, self.tail(e_top))
        while True:
            top = self.heap[0]
            hi = None if top.ub is None else max(top.ub, self.pruned)
            if hi is not None and hi - self.lb <= self.tol * hi:
                return RatInterval(self.lb, max(hi, self.lb))
            if self.boxes >= self.budget:
                # checked before popping so the heap still covers every open box
                raise InconclusiveError("weak_norm: box budget exhausted", self.enclosure())
            box = heapq.heappop(self.heap)
            children = self._branch(box)
            for child in children:
                if child.ub is not None and child.ub <= self.lb * (1 + self.tol / 4):
                    self.pruned = max(self.pruned, child.ub)
                else:
                    heapq.heappush(self.heap, child)

    def _branch(self, box: _Box) -> list:
        b = Fraction(self.base)
        if box.kind == "head":
            return [self.evaluate(box.e - 1, ONE, b, self.q0), self.head(box.e - 1)]
        if box.kind == "tail":
            return [self.evaluate(box.e, ONE, b, self.q0), self.tail(box.e + 1)]
        if box.width_part > box.ratio_part and box.q < 60:
            return [self.evaluate(box.e, box.r1, box.r2, box.q + 2)]
        mid = (box.r1 + box.r2) / 2
        return [self.evaluate(box.e, box.r1, mid, box.q),
                self.evaluate(box.e, mid, box.r2, box.q)]


def _simple_pieces(f: PiecewiseFn):
    """``[(kind, data)]`` if every segment is a constant or one bare term, else None."""
    out = []
    for seg in f.segments:
        terms = _merge_terms(seg.terms)
        if not terms:
            if seg.constant != 0:
                out.append(("step", abs(seg.constant), seg.width))
        elif len(terms) == 1 and seg.constant == 0:
            term = terms[0]
            # |f| = |c| / |t + shift|; delta = distance of the pole to the segment
            delta = seg.a + term.shift if seg.a + term.shift >= 0 else -(seg.b + term.shift)
            out.append(("hyp", abs(term.coeff), delta, seg.width))
        else:
            return None
    return out


def weak_norm_exact(f: PiecewiseFn) -> Fraction | None:
    """Exact quasi-norm when each segment is a constant or a single ``c/(t+shift)``.

    On such functions ``lambda * d(lambda)`` is piecewise linear in lambda
    (a single term contributes ``clip(|c|/lambda - delta, 0, w)`` to ``d``),
    so the supremum is attained as a left limit at a breakpoint or at
    ``lambda -> inf`` (poles).  Returns None for other functions.
    """
    pieces = _simple_pieces(f)
    if pieces is None:
        return None
    events: dict = {}
    A = B = ZERO
    for piece in pieces:
        if piece[0] == "step":
            _, v, w = piece
            events.setdefault(v, []).append((ZERO, ZERO, w))
            continue
        _, c, delta, w = piece
        if delta == 0:
            A += c
        else:
            events.setdefault(c / delta, []).append((c, delta, ZERO))
        events.setdefault(c / (delta + w), []).append((-c, -delta, w))
    best = A  # limit lambda -> inf
    full = ZERO
    for lam in sorted(events, reverse=True):
        for dA, dB, dfull in events[lam]:
            A += dA
            B += dB
            full += dfull
        best = max(best, A - B * lam + lam * full)
    return best


def weak_norm(f: PiecewiseFn, tol: RationalLike, budget: int = NORM_BOX_BUDGET,
              method: str = "auto") -> RatInterval:
    """Enclosure of ``||f||_{1,inf} = sup_lambda lambda * d_f(lambda)``.

    The returned interval satisfies ``hi - lo <= tol * hi``.  ``method`` is
    ``"bnb"`` (branch and bound, any function), ``"exact"`` (breakpoint sweep,
    single-term segments only) or ``"auto"``.
    """
    tol = as_rational(tol)
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if method not in ("auto", "bnb", "exact"):
        raise ParameterError(f"unknown method {method!r}")
    if method != "bnb":
        value = weak_norm_exact(f)
        if value is not None:
            return RatInterval.point(value)
        if method == "exact":
            raise ParameterError("exact method needs single-term or constant segments")
    return _NormSolver(f, tol, budget).run()


def weak_norm_t_form(f: PiecewiseFn, points: Sequence[Fraction], tol: RationalLike) -> RatInterval:
    """Lower enclosure data for ``sup_t t f*(t)`` over a finite grid.

    Returns the hull of ``t * f*(t)`` enclosures; its ``lo`` is a certified
    lower bound for the quasi-norm.  Used to cross-check :func:`weak_norm`.
    """
    tol = as_rational(tol)
    best = None
    for t in points:
        enc = rearrangement_at(f, t, tol) * t
        best = enc if best is None else RatInterval(max(best.lo, enc.lo), max(best.hi, enc.hi))
    return best
