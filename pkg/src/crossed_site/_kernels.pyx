# cython: language_level=3
"""Compiled hot loops: signed-permutation arithmetic and exhaustive axiom checks.

Every function here has a numpy twin in ``_fallback`` with the same signature
and the same results; ``kernels`` picks one at import.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64
ctypedef cnp.int8_t i8
ctypedef cnp.uint8_t u8

cdef i64 _FACT[21]
_FACT[0] = 1
for _k in range(1, 21):
    _FACT[_k] = _FACT[_k - 1] * _k


cdef inline i64 _rank(const i32* p, int n) nogil:
    cdef i64 r = 0
    cdef int i, j, c
    for i in range(n):
        c = 0
        for j in range(i + 1, n):
            if p[j] < p[i]:
                c += 1
        r += c * _FACT[n - 1 - i]
    return r


def lehmer_rank(const i32[:, ::1] perms):
    cdef Py_ssize_t k, K = perms.shape[0]
    cdef int n = perms.shape[1]
    out = np.empty(K, dtype=np.int64)
    cdef i64[::1] o = out
    with nogil:
        for k in range(K):
            o[k] = _rank(&perms[k, 0], n) if n > 0 else 0
    return out


def signed_keys(const i32[:, ::1] perms, const i8[:, ::1] signs):
    cdef Py_ssize_t k, K = perms.shape[0]
    cdef int i, n = perms.shape[1]
    cdef i64 mask
    out = np.empty(K, dtype=np.int64)
    cdef i64[::1] o = out
    with nogil:
        for k in range(K):
            mask = 0
            for i in range(n):
                if signs[k, i] < 0:
                    mask |= (<i64>1) << i
            o[k] = ((_rank(&perms[k, 0], n) if n > 0 else 0) << n) | mask
    return out


cdef struct _Fibers:
    int m
    int n
    int* img
    int* size
    int* rnk


cdef void _fibers(_Fibers* f, const i32[::1] images, int n):
    cdef int p
    f.m = images.shape[0]
    f.n = n
    f.img = <int*> malloc(sizeof(int) * (f.m + 1))
    f.size = <int*> malloc(sizeof(int) * (n + 1))
    f.rnk = <int*> malloc(sizeof(int) * (f.m + 1))
    for p in range(n):
        f.size[p] = 0
    for p in range(f.m):
        f.img[p] = images[p]
        f.rnk[p] = f.size[images[p]]
        f.size[images[p]] += 1


cdef void _free_fibers(_Fibers* f):
    free(f.img)
    free(f.size)
    free(f.rnk)


cdef inline void _restrict_one(_Fibers* f, const i32* sigma, const i8* eps,
                               int* sinv, int* start, i32* tau, i8* sg) nogil:
    cdef int j, p, acc, t
    for j in range(f.n):
        sinv[sigma[j]] = j
    acc = 0
    for j in range(f.n):
        start[j] = acc
        acc += f.size[sinv[j]]
    for p in range(f.m):
        t = f.img[p]
        if eps[t] > 0:
            tau[p] = start[sigma[t]] + f.rnk[p]
        else:
            tau[p] = start[sigma[t]] + f.size[t] - 1 - f.rnk[p]
        sg[p] = eps[t]


def weyl_restrict(const i32[::1] images, int n_cod, const i32[:, ::1] perms, const i8[:, ::1] signs):
    """Restriction of signed permutations along one map given by ``images``."""
    cdef _Fibers f
    cdef Py_ssize_t k, K = perms.shape[0]
    _fibers(&f, images, n_cod)
    tau = np.empty((K, f.m), dtype=np.int32)
    sg = np.empty((K, f.m), dtype=np.int8)
    cdef i32[:, ::1] t = tau
    cdef i8[:, ::1] s = sg
    cdef int* sinv = <int*> malloc(sizeof(int) * (n_cod + 1))
    cdef int* start = <int*> malloc(sizeof(int) * (n_cod + 1))
    if f.m > 0:
        with nogil:
            for k in range(K):
                _restrict_one(&f, &perms[k, 0], &signs[k, 0], sinv, start, &t[k, 0], &s[k, 0])
    free(sinv)
    free(start)
    _free_fibers(&f)
    return tau, sg


def weyl_act(const i32[::1] images, int n_cod, const i32[:, ::1] perms):
    """Images of the acted map: fiber sizes permuted by each sigma."""
    cdef _Fibers f
    cdef Py_ssize_t k, K = perms.shape[0]
    cdef int j, q, p
    _fibers(&f, images, n_cod)
    out = np.empty((K, f.m), dtype=np.int32)
    cdef i32[:, ::1] o = out
    cdef int* sinv = <int*> malloc(sizeof(int) * (n_cod + 1))
    with nogil:
        for k in range(K):
            for j in range(n_cod):
                sinv[perms[k, j]] = j
            p = 0
            for j in range(n_cod):
                for q in range(f.size[sinv[j]]):
                    o[k, p] = j
                    p += 1
    free(sinv)
    _free_fibers(&f)
    return out


def signed_mul_table(const i32[:, ::1] perms, const i8[:, ::1] signs, const i32[::1] lookup):
    """Dense table of ``(s;x)(t;y) = (s t; x_{t(i)} y_i)``."""
    cdef Py_ssize_t a, b, K = perms.shape[0]
    cdef int i, n = perms.shape[1]
    cdef i64 mask, key
    out = np.empty((K, K), dtype=np.int32)
    cdef i32[:, ::1] o = out
    cdef i32* prod = <i32*> malloc(sizeof(i32) * (n + 1))
    with nogil:
        for a in range(K):
            for b in range(K):
                mask = 0
                for i in range(n):
                    prod[i] = perms[a, perms[b, i]]
                    if signs[a, perms[b, i]] * signs[b, i] < 0:
                        mask |= (<i64>1) << i
                key = ((_rank(prod, n) if n > 0 else 0) << n) | mask
                o[a, b] = lookup[key]
    free(prod)
    return out


def stable_table(int n, const i32[:, ::1] probe_sizes, int need_ends):
    """Flags over Lehmer ranks: does the permutation keep every probe in the site?"""
    cdef i64 total = _FACT[n] if n > 0 else 1
    out = np.ones(total, dtype=np.uint8)
    cdef u8[::1] o = out
    cdef i64 r, rem
    cdef int i, j, c, P = probe_sizes.shape[0], q
    cdef int* perm = <int*> malloc(sizeof(int) * (n + 1))
    cdef int* used = <int*> malloc(sizeof(int) * (n + 1))
    cdef int* inv = <int*> malloc(sizeof(int) * (n + 1))
    if need_ends and n > 0:
        with nogil:
            for r in range(total):
                rem = r
                for i in range(n):
                    used[i] = 0
                for i in range(n):
                    c = <int>(rem // _FACT[n - 1 - i])
                    rem = rem % _FACT[n - 1 - i]
                    j = 0
                    while True:
                        if not used[j]:
                            if c == 0:
                                break
                            c -= 1
                        j += 1
                    used[j] = 1
                    perm[i] = j
                for i in range(n):
                    inv[perm[i]] = i
                for q in range(P):
                    if probe_sizes[q, inv[0]] < 1 or probe_sizes[q, inv[n - 1]] < 1:
                        o[r] = 0
                        break
    free(perm)
    free(used)
    free(inv)
    return out


def weyl_members_level(const i32[:, ::1] perms, const i8[:, ::1] signs, u8[::1] alive,
                       const i32[:, ::1] probes, int n_cod, const u8[::1] stable):
    """Clear ``alive[k]`` when some probe restricts candidate k outside the site."""
    cdef Py_ssize_t k, K = perms.shape[0]
    cdef int q, P = probes.shape[0], m = probes.shape[1]
    cdef _Fibers f
    cdef int* sinv = <int*> malloc(sizeof(int) * (n_cod + 1))
    cdef int* start = <int*> malloc(sizeof(int) * (n_cod + 1))
    cdef i32* tau = <i32*> malloc(sizeof(i32) * (m + 1))
    cdef i8* sg = <i8*> malloc(sizeof(i8) * (m + 1))
    for q in range(P):
        _fibers(&f, probes[q], n_cod)
        with nogil:
            for k in range(K):
                if not alive[k]:
                    continue
                _restrict_one(&f, &perms[k, 0], &signs[k, 0], sinv, start, tau, sg)
                if m > 0 and not stable[_rank(tau, m)]:
                    alive[k] = 0
        _free_fibers(&f)
    free(sinv)
    free(start)
    free(tau)
    free(sg)
    return alive


def cgii_check(const i32[:, ::1] mulT_a, const i32[:, ::1] mulT_b,
               const i32[:, ::1] restr, const i32[:, ::1] act, int limit):
    """Count failures of phi*(xy) = (phi^y)*(x) phi*(y); ``mulT[y, x] = x y``."""
    cdef Py_ssize_t x, y, p, q, g, m = mulT_a.shape[0], P = restr.shape[0]
    cdef i64 count = 0
    viol = np.zeros((max(limit, 0), 3), dtype=np.int64)
    cdef i64[:, ::1] v = viol
    cdef const i32* row
    cdef const i32* R
    cdef const i32* Rq
    cdef const i32* MB
    with nogil:
        for y in range(m):
            row = &mulT_a[y, 0]
            for p in range(P):
                q = act[y, p]
                g = restr[p, y]
                R = &restr[p, 0]
                Rq = &restr[q, 0]
                MB = &mulT_b[g, 0]
                for x in range(m):
                    if R[row[x]] != MB[Rq[x]]:
                        if count < limit:
                            v[count, 0] = p
                            v[count, 1] = x
                            v[count, 2] = y
                        count += 1
    return count, viol[: min(count, limit)]


def action_check(const i32[:, ::1] mul, const i32[:, ::1] act, int limit):
    """Count failures of phi^{xy} = (phi^y)^x."""
    cdef Py_ssize_t x, y, p, z, m = mul.shape[0], P = act.shape[1]
    cdef i64 count = 0
    viol = np.zeros((max(limit, 0), 3), dtype=np.int64)
    cdef i64[:, ::1] v = viol
    with nogil:
        for x in range(m):
            for y in range(m):
                z = mul[x, y]
                for p in range(P):
                    if act[z, p] != act[x, act[y, p]]:
                        if count < limit:
                            v[count, 0] = p
                            v[count, 1] = x
                            v[count, 2] = y
                        count += 1
    return count, viol[: min(count, limit)]


def cgi_check(const i32[:, ::1] comp, const i32[:, ::1] act_ac, const i32[:, ::1] act_ab,
              const i32[:, ::1] restr_ab, const i32[:, ::1] act_bc, int limit):
    """Count failures of (psi phi)^x = psi^x phi^{psi*(x)}.

    ``comp[psi, phi]`` indexes hom(c, a); ``psi: b -> a``, ``phi: c -> b``.
    """
    cdef Py_ssize_t x, s, f, m = act_ab.shape[0], Ps = comp.shape[0], Pf = comp.shape[1]
    cdef Py_ssize_t s2, y
    cdef i64 count = 0
    viol = np.zeros((max(limit, 0), 3), dtype=np.int64)
    cdef i64[:, ::1] v = viol
    with nogil:
        for x in range(m):
            for s in range(Ps):
                s2 = act_ab[x, s]
                y = restr_ab[s, x]
                for f in range(Pf):
                    if act_ac[x, comp[s, f]] != comp[s2, act_bc[y, f]]:
                        if count < limit:
                            v[count, 0] = s
                            v[count, 1] = f
                            v[count, 2] = x
                        count += 1
    return count, viol[: min(count, limit)]


def presheaf_check(const i32[:, ::1] comp, const i32[:, ::1] restr_ac,
                   const i32[:, ::1] restr_ab, const i32[:, ::1] restr_bc, int limit):
    """Count failures of (psi phi)* = phi* psi*."""
    cdef Py_ssize_t x, s, f, m = restr_ab.shape[1], Ps = comp.shape[0], Pf = comp.shape[1]
    cdef i64 count = 0
    viol = np.zeros((max(limit, 0), 3), dtype=np.int64)
    cdef i64[:, ::1] v = viol
    with nogil:
        for s in range(Ps):
            for f in range(Pf):
                for x in range(m):
                    if restr_ac[comp[s, f], x] != restr_bc[f, restr_ab[s, x]]:
                        if count < limit:
                            v[count, 0] = s
                            v[count, 1] = f
                            v[count, 2] = x
                        count += 1
    return count, viol[: min(count, limit)]
