"""Shared strategies and settings for the test suite."""
from __future__ import annotations

import os
from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

from weakl1.pwfunc import HyperTerm, PiecewiseFn, Segment

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile(
    "ci", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

small_pos = st.fractions(min_value=Fraction(1, 16), max_value=8, max_denominator=16)
small_rat = st.fractions(min_value=-8, max_value=8, max_denominator=16)


@st.composite
def partitions(draw, max_pieces: int = 5, denom: int = 24):
    """Sorted disjoint ``(a, b)`` pairs on the grid ``k / denom``."""
    points = draw(st.lists(st.integers(0, denom), min_size=2, max_size=2 * max_pieces,
                           unique=True))
    points.sort()
    pairs = [(Fraction(points[i], denom), Fraction(points[i + 1], denom))
             for i in range(0, len(points) - 1, 2)]
    return pairs


@st.composite
def step_functions(draw, max_pieces: int = 6):
    pairs = draw(partitions(max_pieces))
    segs = []
    for a, b in pairs:
        v = draw(small_rat)
        segs.append(Segment(a, b, v))
    return PiecewiseFn(segs)


@st.composite
def hyper_functions(draw, max_pieces: int = 3, max_terms: int = 3):
    """Small functions with up to ``max_terms`` reciprocal terms per segment.

    Shifts keep the pole at or left of the segment's left end.
    """
    pairs = draw(partitions(max_pieces, denom=12))
    segs = []
    for a, b in pairs:
        terms = []
        for _ in range(draw(st.integers(0, max_terms))):
            gap = draw(st.fractions(min_value=Fraction(1, 8), max_value=2, max_denominator=8))
            coeff = draw(st.sampled_from([-2, -1, 1, 2, Fraction(1, 2)]))
            terms.append(HyperTerm(coeff, gap - a))
        const = draw(st.sampled_from([0, 0, 1, -1, Fraction(3, 2)]))
        segs.append(Segment(a, b, const, tuple(terms)))
    return PiecewiseFn(segs)


# --- acceptance summary ------------------------------------------------------------

import pytest  # noqa: E402

ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record one ``(verdict, detail)`` line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number: int, ok: bool, detail: str):
        lines[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
