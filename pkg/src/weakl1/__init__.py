"""Certified weak-L1 quasi-norms and a machine check of the failure of type 1.

Everything certified is an exact rational or a rational interval; the hot
level-set kernel is compiled against GMP when available (see
:data:`BACKEND`) and falls back to pure Python otherwise.
"""
from .errors import DomainError, InconclusiveError, ParameterError, SizeError
from .kernel import BACKEND
from .numeric import Ordering, RatInterval, cmp_certified, ln_enclosure
from .pwfunc import (HyperTerm, PiecewiseFn, Segment, add, distribution, eval_exact,
                     eval_interval, hyperbola, indicator, rearrangement_at, restrict, scale,
                     step_fn, step_norm_exact, weak_norm)
from .construction import (ConstructionParams, SignMatrix, SignVector, combine_signs,
                           family, make_F_k, make_F_k_closed, make_f_ki, make_g, make_G_m,
                           make_sign_matrix, make_step_majorant)
from .seqspace import FiniteSeq, discrete_family, seq_rearrange, seq_weak_norm, verify_discrete_lemma
from .typeprobe import (ProbeBudget, ProbeReport, Verdict, rademacher_average, type1_ratio,
                        verify_gstar, verify_lemma, verify_unit_norms)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DomainError", "InconclusiveError", "ParameterError", "SizeError",
    "Ordering", "RatInterval", "cmp_certified", "ln_enclosure",
    "HyperTerm", "PiecewiseFn", "Segment", "add", "distribution", "eval_exact",
    "eval_interval", "hyperbola", "indicator", "rearrangement_at", "restrict", "scale",
    "step_fn", "step_norm_exact", "weak_norm",
    "ConstructionParams", "SignMatrix", "SignVector", "combine_signs", "family", "make_F_k",
    "make_F_k_closed", "make_f_ki", "make_g", "make_G_m", "make_sign_matrix",
    "make_step_majorant",
    "FiniteSeq", "discrete_family", "seq_rearrange", "seq_weak_norm", "verify_discrete_lemma",
    "ProbeBudget", "ProbeReport", "Verdict", "rademacher_average", "type1_ratio",
    "verify_gstar", "verify_lemma", "verify_unit_norms",
]
