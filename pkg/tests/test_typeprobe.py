from fractions import Fraction

import pytest

from weakl1.construction import ConstructionParams, SignVector, combine_signs, make_g
from weakl1.errors import ParameterError
from weakl1.numeric import Ordering, RatInterval, cmp_certified, ln_enclosure
from weakl1.pwfunc import indicator, weak_norm
from weakl1.typeprobe import (Exhaustive, ProbeBudget, Sample, Verdict, gstar_expected,
                              log_targets, rademacher_average, ratio_bound,
                              select_sign_vectors, type1_ratio, type_ratio_table, verify_gstar,
                              verify_lemma, verify_unit_norms)

TOL = Fraction(1, 10**6)
P3 = ConstructionParams(3)


def test_verdict_combination():
    assert Verdict.combine([Verdict.PASS, Verdict.PASS]) is Verdict.PASS
    assert Verdict.combine([Verdict.PASS, Verdict.INCONCLUSIVE]) is Verdict.INCONCLUSIVE
    assert Verdict.combine([Verdict.INCONCLUSIVE, Verdict.FAIL]) is Verdict.FAIL
    assert [v.exit_code for v in Verdict] == [0, 1, 2]


def test_budget_validation():
    with pytest.raises(ParameterError):
        ProbeBudget(tol=0)
    with pytest.raises(ParameterError):
        ProbeBudget(eval_budget=0)
    with pytest.raises(ParameterError):
        Sample(0)


def test_exhaustive_over_budget_rejected():
    with pytest.raises(ParameterError):
        select_sign_vectors(10, ProbeBudget(eval_budget=100))


def test_sampling_is_seeded():
    b = ProbeBudget(sign_mode=Sample(20, seed=7))
    assert select_sign_vectors(9, b) == select_sign_vectors(9, b)
    other = ProbeBudget(sign_mode=Sample(20, seed=8))
    assert select_sign_vectors(9, b) != select_sign_vectors(9, other)


def test_rademacher_single_function():
    f = make_g(P3, 1)
    enc = rademacher_average([f], ProbeBudget(tol=TOL))
    assert enc.contains(Fraction(80, 81))


def test_rademacher_disjoint_indicators():
    # +-1 on (0,1/2] and +-1 on (1/2,1]: every sign pattern has norm 1
    fs = [indicator(0, Fraction(1, 2)), indicator(Fraction(1, 2), 1)]
    assert rademacher_average(fs, ProbeBudget(tol=TOL)) == RatInterval(1, 1)


def test_rademacher_needs_functions():
    with pytest.raises(ParameterError):
        rademacher_average([])


def test_average_brackets_individual_norms():
    fs = [make_g(P3, j) for j in (1, 2)]
    avg = rademacher_average(fs, ProbeBudget(tol=TOL))
    norms = [weak_norm(combine_signs(P3, SignVector.parse(s)), TOL) for s in ("++", "+-")]
    assert min(n.lo for n in norms) <= avg.hi and avg.lo <= max(n.hi for n in norms)


def test_log_targets():
    lower, upper = log_targets(10)
    assert lower.lo < Fraction("11.5130") and lower.hi > Fraction("11.5129")
    assert upper.lo < Fraction("23.0259") and upper.hi > Fraction("23.0258")


@pytest.mark.parametrize("n", [3, 6])
def test_verify_lemma_small_n_upper_only(n):
    report = verify_lemma(ConstructionParams(n), ProbeBudget(tol=Fraction(1, 10**4)))
    assert len(report.rows) == 2 ** (n - 1)
    assert report.verdict is Verdict.PASS
    assert all(r.checks["upper"] == "Pass" for r in report.rows)
    assert all("informational" in r.checks["lower"] for r in report.rows)
    assert any("lower bound asserted only" in note for note in report.notes)


def test_sign_flip_symmetry():
    report = verify_lemma(ConstructionParams(4), ProbeBudget(tol=Fraction(1, 10**4)))
    encs = {r.label: r.enclosure for r in report.rows}
    for label, enc in encs.items():
        flipped = "".join("-" if c == "+" else "+" for c in label)
        assert enc == encs[flipped]


def test_sampled_mode_is_flagged():
    b = ProbeBudget(tol=Fraction(1, 10**4), sign_mode=Sample(3, seed=1))
    report = verify_lemma(ConstructionParams(4), b)
    assert report.statistical and len(report.rows) == 3
    assert any(note.startswith("statistical") for note in report.notes)
    assert report.to_json()["config"]["seed"] == 1


@pytest.mark.parametrize("n,value", [(3, Fraction(80, 81)), (4, Fraction(65535, 65536))])
def test_unit_norms(n, value):
    report = verify_unit_norms(ConstructionParams(n), ProbeBudget(tol=TOL))
    assert report.verdict is Verdict.PASS
    assert all(r.expected == value for r in report.rows)
    assert all(r.enclosure.hi <= 1 for r in report.rows)


def test_gstar_expected_values():
    assert gstar_expected(P3, Fraction(1, 4)) == Fraction(324, 85)
    assert gstar_expected(P3, 1 - Fraction(1, 81) + Fraction(1, 162)) == 0
    half = Fraction(1, 2)
    assert gstar_expected(ConstructionParams(4), half) == 1 / (half + Fraction(1, 4**8))


def test_verify_gstar_n3():
    points = [Fraction(1, 4), Fraction(1, 2), 1 - Fraction(1, 81) + Fraction(1, 162)]
    report = verify_gstar(P3, 2, points, ProbeBudget(tol=TOL))
    assert report.verdict is Verdict.PASS
    assert report.rows[-1].expected == 0


def test_verify_gstar_bad_index():
    with pytest.raises(ParameterError):
        verify_gstar(P3, 3, [Fraction(1, 2)])


def test_ratio_bound_at_one():
    # 2 ln 2 / 2 = ln 2
    assert ratio_bound(1).intersects(ln_enclosure(2, Fraction(1, 10**15)))


def test_type1_ratio_n3():
    res = type1_ratio(P3, ProbeBudget(tol=Fraction(1, 10**4)))
    assert res.verdict is Verdict.PASS
    assert cmp_certified(res.ratio, res.bound) is Ordering.GREATER
    assert res.norm_sum.contains(2 * Fraction(80, 81))


def test_ratio_table_increasing_and_deterministic():
    b = ProbeBudget(tol=Fraction(1, 10**4))
    first = type_ratio_table([3, 4], b)
    second = type_ratio_table([3, 4], b)
    assert first.summary["strictly_increasing"] == "Pass"
    assert first.dumps() == second.dumps()
    assert "seconds" not in first.to_json()
    assert "seconds" in first.to_json(include_timing=True)


def test_report_csv_columns():
    report = verify_unit_norms(P3, ProbeBudget(tol=TOL))
    header = report.to_csv().splitlines()[0].split(",")
    assert header[:6] == ["label", "lo", "hi", "lo_decimal", "hi_decimal", "expected"]
    assert header[-1] == "verdict"


def test_exhaustive_describe():
    assert ProbeBudget().echo()["signs"] == Exhaustive().describe() == "all"
