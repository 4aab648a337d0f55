import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from weakl1.construction import ConstructionParams, SignVector, make_g
from weakl1.errors import SizeError
from weakl1.pwfunc import eval_exact, rearrangement_at, step_norm_exact
from weakl1.seqspace import (FiniteSeq, as_step_function, combine_sequences, discrete_family,
                             seq_rearrange, seq_weak_norm, verify_discrete_lemma)

seqs = st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=12), max_size=40)


def brute_norm(values):
    # oracle: sup over lambda of lambda * #{|x| >= lambda}, lambda ranging over |x|
    best = Fraction(0)
    for lam in {abs(v) for v in values}:
        best = max(best, lam * sum(1 for v in values if abs(v) >= lam))
    return best


@pytest.mark.parametrize("values,norm", [
    ([1, Fraction(1, 2), Fraction(1, 3)], 1),
    ([0, 3, 1], 3),
    ([-2, 1], 2),
    ([5], 5),
    ([], 0),
])
def test_norm_examples(values, norm):
    assert seq_weak_norm(values) == norm


def test_rearrange_examples():
    assert seq_rearrange([0, 3, 1]).values == (3, 1, 0)
    assert seq_rearrange([-2, 1]).values == (2, 1)


def test_harmonic_sequence_has_unit_norm():
    assert seq_weak_norm([Fraction(1, k) for k in range(1, 1001)]) == 1


@settings(max_examples=1000)
@given(seqs)
def test_norm_matches_brute_oracle(values):
    assert seq_weak_norm(values) == brute_norm(values)


@settings(max_examples=1000)
@given(seqs, st.fractions(min_value=-9, max_value=9, max_denominator=7))
def test_homogeneity(values, c):
    x = FiniteSeq(values)
    assert seq_weak_norm(x.scaled(c)) == abs(c) * seq_weak_norm(x)


@settings(max_examples=1000)
@given(seqs, st.randoms(use_true_random=False))
def test_permutation_invariance(values, rng):
    shuffled = list(values)
    rng.shuffle(shuffled)
    assert seq_weak_norm(shuffled) == seq_weak_norm(values)


@settings(max_examples=1000)
@given(seqs)
def test_l1_domination(values):
    assert seq_weak_norm(values) <= sum(abs(v) for v in values)


@settings(max_examples=300)
@given(seqs.filter(bool))
def test_step_function_consistency(values):
    # squeezing into (0, 1] divides the norm by the length
    x = FiniteSeq(values)
    assert step_norm_exact(as_step_function(x)) * len(x) == seq_weak_norm(x)


@settings(max_examples=200)
@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=12),
                min_size=10, max_size=10))
def test_rearrangement_matches_step_function(values):
    # x*(i) is the rearrangement of the squeezed step function at the
    # midpoint of the i-th cell
    x = FiniteSeq(values)
    step = as_step_function(x)
    for i, v in enumerate(seq_rearrange(x).values, start=1):
        assert rearrangement_at(step, Fraction(2 * i - 1, 20), Fraction(1, 10**6)).contains(v)


def test_discrete_family_samples_right_endpoints():
    p = ConstructionParams(3)
    xs = discrete_family(p)
    assert len(xs) == 2 and all(len(x) == 81 for x in xs)
    g = make_g(p, 1)
    for i in (1, 2, 5, 27, 40, 80, 81):
        assert xs[0][i - 1] == eval_exact(g, Fraction(i, 81))


def test_discrete_family_n2():
    # n = 2: one vector of length 4, g = -1/t on (1/4, 1/2] and 1/t on (1/2, 1];
    # sorted |x| = (2, 4/3, 1, 0) so the norm is max(2, 8/3, 3) = 3
    (x,) = discrete_family(ConstructionParams(2))
    assert x.values == (0, -2, Fraction(4, 3), 1)
    assert seq_weak_norm(x) == 3


@pytest.mark.parametrize("n", [3, 4])
def test_normalized_member_norms_at_most_one(n):
    xs = discrete_family(ConstructionParams(n))
    assert all(seq_weak_norm(x) <= len(x) for x in xs)


def test_discrete_family_size_guard():
    with pytest.raises(SizeError):
        discrete_family(ConstructionParams(5))


def test_combine_sequences():
    xs = [FiniteSeq([1, 2]), FiniteSeq([3, 4])]
    assert combine_sequences(xs, SignVector.parse("+-")).values == (-2, -2)


def test_discrete_lemma_n3():
    report = verify_discrete_lemma(ConstructionParams(3))
    table = {str(r.eta): r.norm for r in report.rows}
    assert len(table) == 4
    # each value is an exact rational; opposite signs give equal norms
    assert table["++"] == table["--"] == Fraction(175, 81)
    assert table["+-"] == table["-+"] == Fraction(65, 27)
    doc = json.loads(report.dumps())
    assert doc["params"]["L"] == "81"
    assert "normalization" in doc
    csv_lines = report.to_csv().splitlines()
    assert csv_lines[0].startswith("eta,norm,norm_decimal,position") and len(csv_lines) == 5
    # the continuous combination is reported next to its sampled version
    assert all(r.continuum is not None for r in report.rows)
    assert "continuum" in doc["rows"][0]


def test_finite_seq_serialization():
    x = FiniteSeq([Fraction(1, 3), -2, 0])
    assert FiniteSeq.from_json(json.loads(json.dumps(x.to_json()))) == x
    rows = x.to_csv().splitlines()
    assert rows[0] == "index,value,rearranged"
    assert rows[1] == "1,1/3,2/1"
