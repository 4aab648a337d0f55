# cython: language_level=3, boundscheck=False, wraparound=False
"""GMP-backed kernels for normalized hyperbolic shapes.

Same contract as ``_kernel_py``: exact rational arithmetic throughout, only
the interpreter overhead is removed.
"""
from fractions import Fraction

from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport uint64_t

BACKEND = "gmp"

cdef extern from "gmp.h":
    ctypedef struct __mpq_struct:
        pass
    ctypedef __mpq_struct* mpq_ptr
    void mpq_init(mpq_ptr)
    void mpq_clear(mpq_ptr)
    int mpq_set_str(mpq_ptr, const char*, int)
    char* mpq_get_str(char*, int, mpq_ptr)
    void mpq_canonicalize(mpq_ptr)
    void mpq_set(mpq_ptr, mpq_ptr)
    void mpq_set_ui(mpq_ptr, unsigned long, unsigned long)
    void mpq_add(mpq_ptr, mpq_ptr, mpq_ptr)
    void mpq_sub(mpq_ptr, mpq_ptr, mpq_ptr)
    void mpq_div(mpq_ptr, mpq_ptr, mpq_ptr)
    void mpq_neg(mpq_ptr, mpq_ptr)
    void mpq_div_2exp(mpq_ptr, mpq_ptr, unsigned long)
    int mpq_cmp(mpq_ptr, mpq_ptr)
    int mpq_sgn(mpq_ptr)

cdef int MAX_LEVEL = 62


cdef mpq_ptr _alloc(int n):
    cdef mpq_ptr arr = <mpq_ptr>malloc(max(n, 1) * sizeof(__mpq_struct))
    cdef int i
    for i in range(n):
        mpq_init(&arr[i])
    return arr


cdef void _release(mpq_ptr arr, int n):
    cdef int i
    for i in range(n):
        mpq_clear(&arr[i])
    free(arr)


cdef void _load(mpq_ptr q, x):
    x = Fraction(x)
    cdef bytes text = f"{x.numerator}/{x.denominator}".encode()
    mpq_set_str(q, text, 10)
    mpq_canonicalize(q)


cdef object _store(mpq_ptr q):
    cdef char* raw = mpq_get_str(NULL, 10, q)
    try:
        return Fraction(raw.decode())
    finally:
        free(raw)


cdef class _Shape:
    cdef int nt
    cdef mpq_ptr sig
    cdef mpq_ptr coef
    cdef int* pos
    cdef mpq_ptr c0
    cdef mpq_ptr vl
    cdef mpq_ptr vr
    cdef int* infl
    cdef int* infr
    cdef mpq_ptr tmp

    def __cinit__(self, c0, sigmas, coeffs):
        cdef int i
        self.nt = len(sigmas)
        self.sig = _alloc(self.nt)
        self.coef = _alloc(self.nt)
        self.vl = _alloc(self.nt)
        self.vr = _alloc(self.nt)
        self.c0 = _alloc(1)
        self.tmp = _alloc(2)
        self.pos = <int*>malloc(max(self.nt, 1) * sizeof(int))
        self.infl = <int*>malloc(max(self.nt, 1) * sizeof(int))
        self.infr = <int*>malloc(max(self.nt, 1) * sizeof(int))
        _load(self.c0, c0)
        for i in range(self.nt):
            _load(&self.sig[i], sigmas[i])
            _load(&self.coef[i], coeffs[i])
            self.pos[i] = 1 if coeffs[i] > 0 else 0

    def __dealloc__(self):
        _release(self.sig, self.nt)
        _release(self.coef, self.nt)
        _release(self.vl, self.nt)
        _release(self.vr, self.nt)
        _release(self.c0, 1)
        _release(self.tmp, 2)
        free(self.pos)
        free(self.infl)
        free(self.infr)

    cdef void values_at_grid(self, mpq_ptr out, int* inf, uint64_t k, int level):
        cdef int i
        cdef mpq_ptr s = &self.tmp[0]
        cdef mpq_ptr x = &self.tmp[1]
        mpq_set_ui(s, <unsigned long>k, 1)
        mpq_div_2exp(s, s, level)
        for i in range(self.nt):
            mpq_add(x, s, &self.sig[i])
            if mpq_sgn(x) == 0:
                inf[i] = 1
            else:
                inf[i] = 0
                mpq_div(&out[i], &self.coef[i], x)

    cdef void values_at(self, mpq_ptr out, int* inf, mpq_ptr s):
        cdef int i
        cdef mpq_ptr x = &self.tmp[1]
        for i in range(self.nt):
            mpq_add(x, s, &self.sig[i])
            if mpq_sgn(x) == 0:
                inf[i] = 1
            else:
                inf[i] = 0
                mpq_div(&out[i], &self.coef[i], x)

    cdef void range_of(self, mpq_ptr lo, mpq_ptr hi, int* lo_inf, int* hi_inf):
        cdef int i
        mpq_set(lo, self.c0)
        mpq_set(hi, self.c0)
        lo_inf[0] = 0
        hi_inf[0] = 0
        for i in range(self.nt):
            if self.pos[i]:
                mpq_add(lo, lo, &self.vr[i])
                if self.infl[i]:
                    hi_inf[0] = 1
                else:
                    mpq_add(hi, hi, &self.vl[i])
            else:
                mpq_add(hi, hi, &self.vr[i])
                if self.infl[i]:
                    lo_inf[0] = 1
                else:
                    mpq_add(lo, lo, &self.vl[i])


def shape_range(c0, sigmas, coeffs, s1, s2):
    """Enclosure ``(lo, hi)`` of h over ``[s1, s2]``; ``None`` marks an infinite end."""
    cdef _Shape sh = _Shape(c0, sigmas, coeffs)
    cdef mpq_ptr buf = _alloc(3)
    cdef int lo_inf, hi_inf
    try:
        _load(&buf[0], s1)
        sh.values_at(sh.vl, sh.infl, &buf[0])
        _load(&buf[0], s2)
        sh.values_at(sh.vr, sh.infr, &buf[0])
        sh.range_of(&buf[1], &buf[2], &lo_inf, &hi_inf)
        return (None if lo_inf else _store(&buf[1]),
                None if hi_inf else _store(&buf[2]))
    finally:
        _release(buf, 3)


def level_measure(c0, sigmas, coeffs, mu, tau, budget):
    """Enclose the measure of ``{s in (0,1] : |h(s)| > mu}``; see ``_kernel_py``."""
    cdef _Shape sh = _Shape(c0, sigmas, coeffs)
    cdef mpq_ptr q = _alloc(7)
    # q: 0 mu, 1 -mu, 2 tau, 3 above, 4 lo, 5 hi, 6 scratch
    cdef uint64_t* cells = <uint64_t*>malloc(sizeof(uint64_t))
    cdef uint64_t* nxt
    cdef Py_ssize_t ncells = 1, namb, cap = 1, ncap, i
    cdef uint64_t k, last_right = 0
    cdef int have_right, level = 0, lo_inf, hi_inf, j
    cdef long long n_above, evals = 0, limit = budget
    cdef int converged = 0
    cdef mpq_ptr swap
    cdef int* iswap
    try:
        _load(&q[0], mu)
        mpq_neg(&q[1], &q[0])
        _load(&q[2], tau)
        mpq_set_ui(&q[3], 0, 1)
        cells[0] = 0
        while True:
            n_above = 0
            namb = 0
            have_right = 0
            for i in range(ncells):
                k = cells[i]
                if have_right and last_right == k:
                    swap = sh.vl
                    sh.vl = sh.vr
                    sh.vr = swap
                    iswap = sh.infl
                    sh.infl = sh.infr
                    sh.infr = iswap
                else:
                    sh.values_at_grid(sh.vl, sh.infl, k, level)
                sh.values_at_grid(sh.vr, sh.infr, k + 1, level)
                have_right = 1
                last_right = k + 1
                evals += 1
                sh.range_of(&q[4], &q[5], &lo_inf, &hi_inf)
                if (not lo_inf and mpq_cmp(&q[4], &q[0]) > 0) or \
                        (not hi_inf and mpq_cmp(&q[5], &q[1]) < 0):
                    n_above += 1
                elif (not lo_inf and not hi_inf and mpq_cmp(&q[4], &q[1]) >= 0
                        and mpq_cmp(&q[5], &q[0]) <= 0):
                    pass
                else:
                    cells[namb] = k
                    namb += 1
            mpq_set_ui(&q[6], <unsigned long>n_above, 1)
            mpq_div_2exp(&q[6], &q[6], level)
            mpq_add(&q[3], &q[3], &q[6])
            mpq_set_ui(&q[6], <unsigned long>namb, 1)
            mpq_div_2exp(&q[6], &q[6], level)
            if mpq_cmp(&q[6], &q[2]) <= 0:
                converged = 1
                break
            if evals >= limit or level >= MAX_LEVEL:
                break
            ncap = 2 * namb
            if ncap > cap:
                nxt = <uint64_t*>realloc(cells, ncap * sizeof(uint64_t))
                if nxt == NULL:
                    raise MemoryError()
                cells = nxt
                cap = ncap
            i = namb - 1
            while i >= 0:
                k = cells[i]
                cells[2 * i + 1] = 2 * k + 1
                cells[2 * i] = 2 * k
                i -= 1
            ncells = 2 * namb
            level += 1
        lo = _store(&q[3])
        mpq_add(&q[6], &q[3], &q[6])
        return lo, _store(&q[6]), evals, bool(converged)
    finally:
        free(cells)
        _release(q, 7)
