"""Brute-force references, written without the package's tables or kernels.

Points of a level are plain integers ``0..N-1`` in carrier order; on the
interval site ``0`` and ``N-1`` are the two endpoints.
"""
from __future__ import annotations

import itertools
from math import comb


def carrier_len(site: str, n: int) -> int:
    return {"delta": n + 1, "aug-delta": n, "nabla": n + 2}[site]


def gen_level(site: str) -> int:
    return 0 if site == "delta" else 1


def monotone_maps(m: int, n: int):
    """Weakly increasing sequences of length ``m`` with values in ``range(n)``."""
    return list(itertools.combinations_with_replacement(range(n), m))


def homs(site: str, b: int, a: int) -> list[tuple[int, ...]]:
    """Morphisms ``b -> a`` as image tuples over the full carrier of ``b``."""
    Nb, Na = carrier_len(site, b), carrier_len(site, a)
    maps = monotone_maps(Nb, Na)
    if site == "nabla":
        maps = [f for f in maps if f[0] == 0 and f[-1] == Na - 1]
    return maps


def hom_count_formula(site: str, b: int, a: int) -> int:
    if site == "delta":
        return comb(a + b + 1, b + 1)
    if site == "aug-delta":
        return comb(a + b - 1, b) if a + b > 0 else 1
    return comb(a + b + 1, b)


def compose(g, f):
    return tuple(g[i] for i in f)


# --- signed permutations ---------------------------------------------------------


def signed_mul(x, y):
    """``x y`` acting on (point, orientation) pairs: ``y`` first."""
    (s, e), (t, z) = x, y
    return tuple(s[t[i]] for i in range(len(t))), tuple(e[t[i]] * z[i] for i in range(len(t)))


def pushed(sigma, phi):
    """``phi^sigma``: the monotone map through which ``sigma . phi`` factors."""
    return tuple(sorted(sigma[v] for v in phi))


def layout(phi, Na: int, sigma, eps):
    """``tau`` sending fiber ``i`` onto fiber ``sigma(i)`` of ``phi^sigma``, reversed when ``eps_i < 0``."""
    new = pushed(sigma, phi)
    tau = [None] * len(phi)
    for i in range(Na):
        src = [p for p, v in enumerate(phi) if v == i]
        dst = [p for p, v in enumerate(new) if v == sigma[i]]
        assert len(src) == len(dst)
        if eps[i] < 0:
            dst = dst[::-1]
        for p, q in zip(src, dst):
            tau[p] = q
    return tuple(tau), tuple(eps[phi[p]] for p in range(len(phi)))


def in_stable(site: str, a: int, sigma, probe: int) -> bool:
    """``sigma`` keeps every hom-set ``b -> a`` for ``b <= probe``."""
    for b in range(probe + 1):
        hs = set(homs(site, b, a))
        if any(pushed(sigma, f) not in hs for f in hs):
            return False
    return True


def weyl_oracle(site: str, a: int, probe: int | None = None, stab_probe: int = 3):
    """Every ``(sigma; eps)`` at level ``a`` meeting the definition with the given probes."""
    N = carrier_len(site, a)
    probe = a + 2 if probe is None else probe
    stable_a = [s for s in itertools.permutations(range(N)) if in_stable(site, a, s, stab_probe)]
    stable_cache = {}
    out = []
    for sigma in stable_a:
        for eps in itertools.product((1, -1), repeat=N):
            ok = True
            for b in range(probe + 1):
                for f in homs(site, b, a):
                    tau, _ = layout(f, N, sigma, eps)
                    key = (b, tau)
                    if key not in stable_cache:
                        stable_cache[key] = in_stable(site, b, tau, stab_probe)
                    if not stable_cache[key]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                out.append((sigma, eps))
    return out


# --- free products by congruence closure ------------------------------------------------


class UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)


def amalgam_classes(mul1, mul2, unit1, unit2, f1, f2, max_len: int):
    """Classes of letter words under merging and ``f1(h) ~ f2(h)``.

    Letters are ``(factor, element)`` with non-unit elements. Words up to
    ``max_len + 1`` letters take part so that a split-then-merge step between
    words of length ``max_len`` is available.
    """
    letters = [(1, g) for g in range(len(mul1)) if g != unit1] + [(2, g) for g in range(len(mul2)) if g != unit2]
    muls, units = {1: mul1, 2: mul2}, {1: unit1, 2: unit2}
    uf = UnionFind()
    words = [w for k in range(max_len + 2) for w in itertools.product(letters, repeat=k)]
    for w in words:
        uf.find(w)
        for i in range(len(w) - 1):
            (i1, x), (i2, y) = w[i], w[i + 1]
            if i1 == i2:
                z = muls[i1][x][y]
                merged = w[:i] + (() if z == units[i1] else ((i1, z),)) + w[i + 2:]
                uf.union(w, merged)
        for i, (fac, g) in enumerate(w):
            src, dst = (f1, f2) if fac == 1 else (f2, f1)
            if g in src:
                h = src.index(g)
                other = 2 if fac == 1 else 1
                uf.union(w, w[:i] + ((other, dst[h]),) + w[i + 1:])
    return uf, [w for w in words if len(w) <= max_len]


# --- pi_0 of small simplicial sets ------------------------------------------------------


def components(n0: int, edges) -> list[set[int]]:
    uf = UnionFind()
    for v in range(n0):
        uf.find(v)
    for u, v in edges:
        uf.union(u, v)
    groups = {}
    for v in range(n0):
        groups.setdefault(uf.find(v), set()).add(v)
    return sorted(groups.values(), key=min)
