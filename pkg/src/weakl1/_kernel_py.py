"""Pure-Python reference kernels for normalized hyperbolic shapes.

A shape is ``h(s) = c0 + sum_k c_k / (s + sigma_k)`` on ``s in (0, 1]`` with
no pole inside ``(0, 1]`` (a pole is allowed only at ``s = 0``, i.e. a term
with ``sigma = 0``).  Each term is monotone on the unit interval, so the
termwise endpoint values give the exact range of every term; summing them is
the interval enclosure of ``h`` on a cell.

The compiled module ``_kernel`` implements the same two functions on GMP
rationals and must return identical results.
"""
from fractions import Fraction

BACKEND = "python"
MAX_LEVEL = 62


def _term_values(sigmas, coeffs, s):
    out = []
    for sig, c in zip(sigmas, coeffs):
        x = s + sig
        out.append(None if x == 0 else c / x)
    return out


def _range_from(c0, coeffs, left, right):
    lo = hi = c0
    lo_inf = hi_inf = False
    for c, vl, vr in zip(coeffs, left, right):
        if c > 0:
            lo += vr
            if vl is None:
                hi_inf = True
            else:
                hi += vl
        else:
            hi += vr
            if vl is None:
                lo_inf = True
            else:
                lo += vl
    return (None if lo_inf else lo), (None if hi_inf else hi)


def shape_range(c0, sigmas, coeffs, s1, s2):
    """Enclosure ``(lo, hi)`` of h over ``[s1, s2]``, ``0 <= s1 < s2 <= 1``.

    ``None`` marks an infinite end (a pole at ``s1 = 0``).
    """
    left = _term_values(sigmas, coeffs, Fraction(s1))
    right = _term_values(sigmas, coeffs, Fraction(s2))
    return _range_from(c0, coeffs, left, right)


def level_measure(c0, sigmas, coeffs, mu, tau, budget):
    """Enclose the measure of ``{s in (0,1] : |h(s)| > mu}``.

    Uniform bisection, level by level, until the cells that are neither
    certainly above nor certainly below ``mu`` have total width ``<= tau``.

    Returns ``(lo, hi, evals, converged)``.
    """
    level = 0
    cells = [0]
    above = Fraction(0)
    evals = 0
    while True:
        denom = 1 << level
        cache = {}
        amb = []
        n_above = 0
        for k in cells:
            left = cache.get(k)
            if left is None:
                left = cache[k] = _term_values(sigmas, coeffs, Fraction(k, denom))
            right = cache.get(k + 1)
            if right is None:
                right = cache[k + 1] = _term_values(sigmas, coeffs, Fraction(k + 1, denom))
            evals += 1
            lo, hi = _range_from(c0, coeffs, left, right)
            if (lo is not None and lo > mu) or (hi is not None and hi < -mu):
                n_above += 1
            elif lo is not None and hi is not None and lo >= -mu and hi <= mu:
                pass
            else:
                amb.append(k)
        above += Fraction(n_above, denom)
        ambiguous = Fraction(len(amb), denom)
        if ambiguous <= tau:
            return above, above + ambiguous, evals, True
        if evals >= budget or level >= MAX_LEVEL:
            return above, above + ambiguous, evals, False
        cells = [c for k in amb for c in (2 * k, 2 * k + 1)]
        level += 1
