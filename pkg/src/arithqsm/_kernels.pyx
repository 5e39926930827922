# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Same signatures and results as :mod:`arithqsm._kernels_py`.  Polynomial
kernels work on int64 residues, so they require p < 2**31 and degree < 64.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()

cdef enum:
    MAXD = 64


cdef inline int64_t _mod(int64_t a, int64_t p) noexcept nogil:
    a = a % p
    if a < 0:
        a += p
    return a


cdef int64_t _inv(int64_t a, int64_t p) noexcept nogil:
    cdef int64_t t = 0, newt = 1, r = p, newr = _mod(a, p), q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    return _mod(t, p)


cdef inline int _trim(int64_t* a, int n) noexcept nogil:
    while n > 0 and a[n - 1] == 0:
        n -= 1
    return n


cdef int _divmod(int64_t* a, int na, const int64_t* b, int nb, int64_t p,
                 int64_t* q) noexcept nogil:
    # a <- a mod b in place; quotient written to q when q != NULL
    # returns the length of the remainder
    cdef int64_t inv, c
    cdef int k, j
    if na < nb:
        if q != NULL:
            q[0] = 0
        return _trim(a, na)
    inv = _inv(b[nb - 1], p)
    for k in range(na - nb, -1, -1):
        c = a[k + nb - 1] * inv % p
        if q != NULL:
            q[k] = c
        if c != 0:
            for j in range(nb):
                a[k + j] = _mod(a[k + j] - c * b[j], p)
    return _trim(a, nb - 1)


cdef int _mulmod(const int64_t* a, int na, const int64_t* b, int nb,
                 const int64_t* f, int nf, int64_t p, int64_t* out) noexcept nogil:
    cdef int64_t tmp[2 * MAXD]
    cdef int i, j, n
    if na == 0 or nb == 0:
        return 0
    n = na + nb - 1
    for i in range(n):
        tmp[i] = 0
    for i in range(na):
        if a[i] != 0:
            for j in range(nb):
                tmp[i + j] = (tmp[i + j] + a[i] * b[j]) % p
    n = _divmod(tmp, n, f, nf, p, NULL)
    for i in range(n):
        out[i] = tmp[i]
    return n


cdef int _gcd(const int64_t* a, int na, const int64_t* b, int nb, int64_t p,
              int64_t* out) noexcept nogil:
    cdef int64_t x[MAXD]
    cdef int64_t y[MAXD]
    cdef int64_t* u = x
    cdef int64_t* v = y
    cdef int64_t* w
    cdef int nu = na, nv = nb, nt, i
    cdef int64_t inv
    for i in range(na):
        x[i] = a[i]
    for i in range(nb):
        y[i] = b[i]
    while nv > 0:
        nt = _divmod(u, nu, v, nv, p, NULL)
        w = u
        u = v
        v = w
        nu = nv
        nv = nt
    if nu == 0:
        return 0
    inv = _inv(u[nu - 1], p)
    for i in range(nu):
        out[i] = u[i] * inv % p
    return nu


cdef int _ddf(int64_t* f, int nf, int64_t p, int* degs) noexcept nogil:
    # degrees of the irreducible factors of squarefree monic f; returns count
    cdef int64_t h[MAXD]
    cdef int64_t base[MAXD]
    cdef int64_t res[MAXD]
    cdef int64_t g[MAXD]
    cdef int64_t diff[MAXD]
    cdef int64_t quo[MAXD]
    cdef int nh, nbase, nres, ng, ndiff, i, k, d, count = 0
    cdef int64_t e
    h[0] = 0
    h[1] = 1
    nh = _divmod(h, 2, f, nf, p, NULL)
    d = 1
    while nf - 1 >= 2 * d:
        # h <- h^p mod f
        for i in range(nh):
            base[i] = h[i]
        nbase = nh
        res[0] = 1
        nres = 1
        e = p
        while e > 0:
            if e & 1:
                nres = _mulmod(res, nres, base, nbase, f, nf, p, res)
            e >>= 1
            if e > 0:
                nbase = _mulmod(base, nbase, base, nbase, f, nf, p, base)
        for i in range(nres):
            h[i] = res[i]
        nh = nres
        # g = gcd(f, h - x)
        ndiff = nh if nh > 2 else 2
        for i in range(ndiff):
            diff[i] = h[i] if i < nh else 0
        diff[1] = _mod(diff[1] - 1, p)
        ndiff = _trim(diff, ndiff)
        ng = _gcd(f, nf, diff, ndiff, p, g)
        if ng > 1:
            for k in range((ng - 1) // d):
                degs[count] = d
                count += 1
            _divmod(f, nf, g, ng, p, quo)
            nf = nf - ng + 1
            for i in range(nf):
                f[i] = quo[i]
            nh = _divmod(h, nh, f, nf, p, NULL)
        d += 1
    if nf > 1:
        degs[count] = nf - 1
        count += 1
    return count


def ddf_pattern(coeffs, long long p):
    """Sorted degrees of the irreducible factors of a squarefree monic f mod p."""
    cdef int64_t f[MAXD]
    cdef int degs[MAXD]
    cdef int nf = len(coeffs), i, count
    if nf > MAXD or nf < 1:
        raise ValueError("degree out of range for the compiled kernel")
    if p >= 2147483648:
        raise ValueError("modulus too large for the compiled kernel")
    for i in range(nf):
        f[i] = _mod(<int64_t>(coeffs[i] % p), p)
    nf = _trim(f, nf)
    with nogil:
        count = _ddf(f, nf, p, degs)
    return sorted([degs[i] for i in range(count)])


def dirichlet_convolve(const cnp.int64_t[::1] u, const cnp.int64_t[::1] v):
    """w[n] = sum over d | n of u[d] * v[n // d]; index 0 unused."""
    cdef Py_ssize_t n = u.shape[0] - 1, d, k, m
    cdef int64_t ud
    out = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] w = out
    with nogil:
        for d in range(1, n + 1):
            ud = u[d]
            if ud == 0:
                continue
            m = 1
            k = d
            while k <= n:
                w[k] += ud * v[m]
                m += 1
                k += d
    return out


def assemble_multiplicative(const cnp.int64_t[::1] spf, const cnp.int64_t[::1] offsets,
                            const cnp.int64_t[::1] local):
    """Build a[1..N] from prime-power data.

    ``offsets[p]`` indexes ``local`` so that ``local[offsets[p] + k]`` is the
    value at p**k; ``offsets[p] < 0`` marks an excluded prime whose multiples
    get 0.
    """
    cdef Py_ssize_t n = spf.shape[0] - 1, i, m, k
    cdef int64_t p, off
    out = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] a = out
    if n >= 1:
        a[1] = 1
    with nogil:
        for i in range(2, n + 1):
            p = spf[i]
            off = offsets[p]
            if off < 0:
                continue
            m = i
            k = 0
            while m % p == 0:
                m = m // p
                k += 1
            a[i] = a[m] * local[off + k]
    return out
