"""Pure numpy versions of the compiled kernels (same signatures, same results)."""
from __future__ import annotations

import itertools
import math

import numpy as np


def _factorials(n: int) -> np.ndarray:
    return np.array([math.factorial(k) for k in range(n + 1)], dtype=np.int64)


def lehmer_rank(perms):
    perms = np.asarray(perms, dtype=np.int64)
    K, n = perms.shape
    if n == 0:
        return np.zeros(K, dtype=np.int64)
    fact = _factorials(n)
    out = np.zeros(K, dtype=np.int64)
    for i in range(n):
        smaller = (perms[:, i + 1:] < perms[:, i:i + 1]).sum(axis=1)
        out += smaller * fact[n - 1 - i]
    return out


def signed_keys(perms, signs):
    perms = np.asarray(perms)
    signs = np.asarray(signs)
    n = perms.shape[1]
    weights = (np.int64(1) << np.arange(n, dtype=np.int64))
    mask = ((signs < 0).astype(np.int64) * weights).sum(axis=1) if n else np.zeros(len(perms), np.int64)
    return (lehmer_rank(perms) << n) | mask


def _fiber_data(images, n_cod):
    images = np.asarray(images, dtype=np.int64)
    size = np.bincount(images, minlength=n_cod) if images.size else np.zeros(n_cod, np.int64)
    start = np.concatenate([[0], np.cumsum(size)[:-1]]) if n_cod else np.zeros(0, np.int64)
    rnk = np.arange(len(images)) - start[images] if images.size else np.zeros(0, np.int64)
    return images, size, rnk


def weyl_restrict(images, n_cod, perms, signs):
    images, size, rnk = _fiber_data(images, n_cod)
    perms = np.asarray(perms, dtype=np.int64)
    signs = np.asarray(signs, dtype=np.int8)
    K = perms.shape[0]
    m = len(images)
    if m == 0:
        return np.zeros((K, 0), np.int32), np.zeros((K, 0), np.int8)
    sinv = np.argsort(perms, axis=1)
    new_size = size[sinv]
    new_start = np.cumsum(new_size, axis=1) - new_size
    sig_t = np.take_along_axis(perms, np.broadcast_to(images, (K, m)), axis=1)
    base = np.take_along_axis(new_start, sig_t, axis=1)
    eps = signs[:, images]
    offset = np.where(eps > 0, rnk[None, :], size[images][None, :] - 1 - rnk[None, :])
    return (base + offset).astype(np.int32), eps.astype(np.int8)


def weyl_act(images, n_cod, perms):
    images, size, _ = _fiber_data(images, n_cod)
    perms = np.asarray(perms, dtype=np.int64)
    K = perms.shape[0]
    m = len(images)
    if m == 0:
        return np.zeros((K, 0), np.int32)
    sinv = np.argsort(perms, axis=1)
    new_size = size[sinv]
    ends = np.cumsum(new_size, axis=1)
    pos = np.arange(m)
    out = (pos[None, :, None] >= ends[:, None, :]).sum(axis=2)
    return out.astype(np.int32)


def signed_mul_table(perms, signs, lookup):
    perms = np.asarray(perms, dtype=np.int64)
    signs = np.asarray(signs, dtype=np.int8)
    lookup = np.asarray(lookup)
    K, n = perms.shape
    out = np.empty((K, K), dtype=np.int32)
    for a in range(K):
        prod = perms[a][perms]  # row b: perms[a][perms[b]]
        sg = signs[a][perms] * signs
        out[a] = lookup[signed_keys(prod, sg)]
    return out


def stable_table(n, probe_sizes, need_ends):
    total = math.factorial(n)
    if not need_ends or n == 0:
        return np.ones(total, dtype=np.uint8)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    inv = np.argsort(perms, axis=1)
    probe_sizes = np.asarray(probe_sizes)
    ok = np.ones(total, dtype=bool)
    for sizes in probe_sizes:
        ok &= (sizes[inv[:, 0]] >= 1) & (sizes[inv[:, n - 1]] >= 1)
    return ok.astype(np.uint8)


def weyl_members_level(perms, signs, alive, probes, n_cod, stable):
    probes = np.asarray(probes)
    m = probes.shape[1]
    for q in range(probes.shape[0]):
        idx = np.flatnonzero(alive)
        if idx.size == 0 or m == 0:
            break
        tau, _ = weyl_restrict(probes[q], n_cod, perms[idx], signs[idx])
        bad = stable[lehmer_rank(tau)] == 0
        alive[idx[bad]] = 0
    return alive


def _report(mask_coords, limit):
    count = len(mask_coords)
    viol = np.array(mask_coords[:limit], dtype=np.int64).reshape(-1, 3)
    return count, viol


def cgii_check(mulT_a, mulT_b, restr, act, limit):
    m = mulT_a.shape[0]
    found = []
    for y in range(m):
        row = mulT_a[y]
        q = act[y]
        g = restr[:, y]
        lhs = restr[:, row]  # (P, m)
        rhs = mulT_b[g[:, None], restr[q]]  # (P, m)
        bad = np.argwhere(lhs != rhs)
        found.extend((int(p), int(x), y) for p, x in bad)
    found.sort(key=lambda t: (t[2], t[0], t[1]))
    return _report(found, limit)


def action_check(mul, act, limit):
    m = mul.shape[0]
    found = []
    for x in range(m):
        lhs = act[mul[x]]  # (m over y, P)
        rhs = act[x][act]  # act[x, act[y, p]]
        bad = np.argwhere(lhs != rhs)
        found.extend((int(p), x, int(y)) for y, p in bad)
    return _report(found, limit)


def cgi_check(comp, act_ac, act_ab, restr_ab, act_bc, limit):
    m = act_ab.shape[0]
    found = []
    for x in range(m):
        lhs = act_ac[x][comp]  # (Ps, Pf)
        s2 = act_ab[x]
        y = restr_ab[:, x]
        rhs = comp[s2[:, None], act_bc[y]]
        bad = np.argwhere(lhs != rhs)
        found.extend((int(s), int(f), x) for s, f in bad)
    return _report(found, limit)


def presheaf_check(comp, restr_ac, restr_ab, restr_bc, limit):
    lhs = restr_ac[comp]  # (Ps, Pf, m)
    rhs = restr_bc[np.arange(comp.shape[1])[None, :, None], restr_ab[:, None, :]]
    bad = np.argwhere(lhs != rhs)
    found = [(int(s), int(f), int(x)) for s, f, x in bad]
    return _report(found, limit)
