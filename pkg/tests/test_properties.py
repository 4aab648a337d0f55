"""Property suites for the certified engine, checked against independent oracles."""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import hyper_functions, step_functions
from weakl1.construction import (ConstructionParams, all_sign_vectors, combine_signs, make_F_k,
                                 make_g, make_sign_matrix)
from weakl1.errors import InconclusiveError
from weakl1.numeric import RatInterval
from weakl1.pwfunc import (PiecewiseFn, Segment, distribution, eval_interval, rearrangement_at,
                           restrict, scale, step_norm_exact, weak_norm)

TOL = Fraction(1, 10**4)


def brute_step_norm(s: PiecewiseFn) -> Fraction:
    # oracle independent of step_norm_exact: sup_lambda lambda d(lambda) is
    # approached as lambda rises to some |value|, where d counts every piece
    # with |value| >= lambda
    vals = {abs(seg.constant) for seg in s.segments if seg.constant}
    best = Fraction(0)
    for v in vals:
        mass = sum((seg.width for seg in s.segments if abs(seg.constant) >= v), Fraction(0))
        best = max(best, v * mass)
    return best


@settings(max_examples=1000)
@given(step_functions())
def test_step_oracle(s):
    exact = step_norm_exact(s)
    assert exact == brute_step_norm(s)
    assert weak_norm(s, TOL).contains(exact)


@settings(max_examples=1000)
@given(step_functions())
def test_step_oracle_branch_and_bound(s):
    enc = weak_norm(s, TOL, method="bnb")
    assert enc.contains(step_norm_exact(s))
    assert enc.width <= TOL * enc.hi


@settings(max_examples=1000)
@given(hyper_functions(), st.fractions(min_value=Fraction(-6), max_value=6, max_denominator=9))
def test_homogeneity_overlap(f, c):
    assume(c != 0)
    lhs = weak_norm(scale(f, c), TOL)
    rhs = weak_norm(f, TOL) * abs(c)
    assert lhs.intersects(rhs)


@settings(max_examples=1000)
@given(hyper_functions(), st.integers(0, 11), st.integers(1, 12))
def test_restriction_monotone(f, i, span):
    a = Fraction(i, 12)
    b = min(Fraction(1), a + Fraction(span, 12))
    part = weak_norm(restrict(f, a, b), TOL)
    whole = weak_norm(f, TOL)
    assert part.lo <= whole.hi


@settings(max_examples=300)
@given(hyper_functions(max_pieces=2, max_terms=2))
def test_bnb_agrees_with_exact_sweep(f):
    from weakl1.pwfunc import weak_norm_exact
    exact = weak_norm_exact(f)
    assume(exact is not None)
    assert weak_norm(f, TOL, method="bnb").contains(exact)


LAMBDAS = [Fraction(k, 4) for k in range(0, 33)]


@settings(max_examples=100)
@given(hyper_functions(max_pieces=2, max_terms=2))
def test_distribution_monotone_in_lambda(f):
    encs = [distribution(f, lam, TOL) for lam in LAMBDAS]
    for e1, e2 in zip(encs, encs[1:]):
        assert e1.lo >= e2.hi - e1.width - e2.width


T_GRID = [Fraction(k, 8) for k in range(1, 8)]


def _gstar(f, t):
    try:
        return rearrangement_at(f, t, Fraction(1, 10**3))
    except InconclusiveError as exc:
        return exc.enclosure


@settings(max_examples=60)
@given(hyper_functions(max_pieces=2, max_terms=2))
def test_equimeasurability_grid(f):
    # f*(t) > lam  =>  d(lam) > t ;  f*(t) <= lam  =>  d(lam) <= t
    stars = [(t, _gstar(f, t)) for t in T_GRID]
    # f* is non-increasing
    for (_, s1), (_, s2) in zip(stars, stars[1:]):
        assert s1.hi >= s2.lo
    for lam in LAMBDAS[1::4]:
        d = distribution(f, lam, Fraction(1, 10**5))
        for t, star in stars:
            if star.lo > lam:
                assert d.hi >= t
            if star.hi < lam:
                assert d.lo <= t


def _step_envelope(f: PiecewiseFn, cells: int = 8) -> PiecewiseFn:
    # piecewise-constant majorant of |f| from certified cell enclosures
    segs = []
    for seg in f.segments:
        w = seg.width / cells
        for c in range(cells):
            a, b = seg.a + c * w, seg.a + (c + 1) * w
            enc = eval_interval(f, RatInterval(a, b))
            segs.append(Segment(a, b, max(abs(enc.lo), abs(enc.hi))))
    return PiecewiseFn(segs)


@settings(max_examples=300)
@given(hyper_functions(max_pieces=3, max_terms=2))
def test_pointwise_domination(f):
    assume(all(seg.a + t.shift > 0 for seg in f.segments for t in seg.terms))
    s = _step_envelope(f)
    assert weak_norm(f, TOL).lo <= step_norm_exact(s)


# --- uncertified float oracle --------------------------------------------------

def float_norm(f: PiecewiseFn, samples: int = 4000) -> float:
    """Dense midpoint-sampling estimate of sup lambda d(lambda) in doubles."""
    vals, weights = [], []
    for seg in f.segments:
        a, w = float(seg.a), float(seg.width)
        t = a + w * (np.arange(samples) + 0.5) / samples
        v = np.full_like(t, float(seg.constant))
        for term in seg.terms:
            v += float(term.coeff) / (t + float(term.shift))
        vals.append(np.abs(v))
        weights.append(np.full(samples, w / samples))
    vals = np.concatenate(vals)
    weights = np.concatenate(weights)
    order = np.argsort(-vals)
    cum = np.cumsum(weights[order])
    return float(np.max(vals[order] * cum))


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_float_oracle_containment(n):
    p = ConstructionParams(n)
    E = make_sign_matrix(p)
    gs = [make_g(p, j, E) for j in range(1, p.N + 1)]
    fs = [make_F_k(p, 1)] + gs + [combine_signs(p, eta, E, gs)
                                  for eta in all_sign_vectors(p.N)[:8]]
    for f in fs:
        enc = weak_norm(f, TOL)
        est = float_norm(f)
        lo, hi = float(enc.lo), float(enc.hi)
        assert lo * (1 - 1e-3) <= est <= hi * (1 + 1e-3), (est, enc)
