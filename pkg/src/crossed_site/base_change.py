"""Base change along ``j: Delta -> AugDelta`` and ``J: AugDelta -> Nabla``."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .crossed_core import (
    ASet,
    CrossedGroupMap,
    CrossedGroupTable,
    LevelGroup,
    constant_table,
    cyclic_group,
    product_with_noncrossed,
    trivial_crossed_group,
)
from .crossed_monoidal import CrossedMonoidTable, SlicedObject, crossed_group_as_monoid
from .finite_site import (
    Site,
    SiteId,
    SiteMorphism,
    carrier_size,
    compose,
    forget_interval,
    interval_factor,
    interval_map,
    interval_preimage,
    is_interior_bijective,
    j_map,
    j_preimage,
)

# --- site functors --------------------------------------------------------------


@dataclass(frozen=True)
class SiteFunctor:
    name: str
    source: SiteId
    target: SiteId
    shift: int

    def level(self, k: int) -> int:
        return k + self.shift

    def map(self, phi: SiteMorphism) -> SiteMorphism:
        return j_map(phi) if self.name == "j" else interval_map(phi)

    def preimage(self, psi: SiteMorphism) -> SiteMorphism | None:
        return j_preimage(psi) if self.name == "j" else interval_preimage(psi)

    def source_max(self, target_max: int) -> int:
        return target_max - self.shift

    def hom_index(self, b: int, a: int) -> np.ndarray:
        """Index of ``F(phi)`` in the target hom-set, for each source ``phi: b -> a``."""
        S, T = Site(self.source), Site(self.target)
        imgs = S.hom_array(b, a)
        if imgs.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        if self.name == "J":
            top = carrier_size(self.target, a) - 1
            n = imgs.shape[0]
            imgs = np.concatenate([np.zeros((n, 1), np.int64), imgs + 1, np.full((n, 1), top)], axis=1)
        return np.asarray(T.lookup(self.level(b), self.level(a), imgs), dtype=np.int64)

    def is_fully_faithful(self) -> bool:
        return self.name == "j"


J_SHIFT = SiteFunctor("j", SiteId.DELTA, SiteId.AUG_DELTA, 1)
INTERVAL = SiteFunctor("J", SiteId.AUG_DELTA, SiteId.NABLA, 0)


def get_functor(name: str) -> SiteFunctor:
    if name == "j":
        return J_SHIFT
    if name in ("J", "interval"):
        return INTERVAL
    raise ValueError(f"unknown functor {name!r}")


class StabilityError(ValueError):
    def __init__(self, phi, x):
        super().__init__(f"image of {phi} is not stable under element {x}")
        self.phi, self.x = phi, x


def stability_witness(F: SiteFunctor, Gt: CrossedGroupTable, max_level: int | None = None):
    """A ``(phi, x)`` with ``F(phi)^x`` outside the image of ``F``, or None."""
    if max_level is None:
        max_level = F.source_max(Gt.max_level)
    for a in range(max_level + 1):
        for b in range(max_level + 1):
            idx = F.hom_index(b, a)
            P = Gt.site.hom_count(F.level(b), F.level(a))
            inside = np.zeros(P, dtype=bool)
            inside[idx] = True
            act = Gt.action[(F.level(b), F.level(a))][:, idx]
            bad = np.argwhere(~inside[act])
            if len(bad):
                x, p = bad[0]
                return Site(F.source).homs(b, a)[p], (F.level(a), int(x))
    return None


def restrict_crossed(F: SiteFunctor, Gt: CrossedGroupTable, max_level: int | None = None) -> CrossedGroupTable:
    """``F*Gt`` with actions transported along the (stable) hom maps."""
    if Gt.site_id is not F.target:
        raise ValueError("crossed group lives on the wrong site")
    if max_level is None:
        max_level = F.source_max(Gt.max_level)
    if F.level(max_level) > Gt.max_level:
        raise ValueError("target truncation too low")
    w = stability_witness(F, Gt, max_level)
    if w is not None:
        raise StabilityError(*w)
    S = Site(F.source)
    groups = [Gt.groups[F.level(a)] for a in range(max_level + 1)]
    restr, act = {}, {}
    for a in range(max_level + 1):
        for b in range(max_level + 1):
            idx = F.hom_index(b, a)
            back = np.full(Gt.site.hom_count(F.level(b), F.level(a)), -1, dtype=np.int64)
            back[idx] = np.arange(len(idx))
            restr[(b, a)] = np.ascontiguousarray(Gt.restriction[(F.level(b), F.level(a))][idx], dtype=np.int32)
            act[(b, a)] = np.ascontiguousarray(back[Gt.action[(F.level(b), F.level(a))][:, idx]], dtype=np.int32)
    signed = None if Gt.signed is None else [Gt.signed[F.level(a)] for a in range(max_level + 1)]
    return CrossedGroupTable(S, max_level, groups, restr, act, signed=signed, name=f"{F.name}*{Gt.name}")


def restrict_aset(F: SiteFunctor, Y: ASet, max_level: int | None = None) -> ASet:
    if max_level is None:
        max_level = F.source_max(Y.max_level)
    restr = {(b, a): np.ascontiguousarray(Y.restriction[(F.level(b), F.level(a))][F.hom_index(b, a)])
             for a in range(max_level + 1) for b in range(max_level + 1)}
    return ASet(F.source, max_level, [Y.sizes[F.level(a)] for a in range(max_level + 1)], restr)


def restrict_monoid(F: SiteFunctor, Mon: CrossedMonoidTable, max_level: int | None = None) -> CrossedMonoidTable:
    """``F*M`` as a crossed monoid over ``F*G``."""
    G = restrict_crossed(F, Mon.G, max_level)
    L = G.max_level
    X = restrict_aset(F, Mon.M.aset, L)
    sl = SlicedObject(X, G, [Mon.M.p[F.level(a)] for a in range(L + 1)], Mon.name)
    return CrossedMonoidTable(sl, [Mon.units[F.level(a)] for a in range(L + 1)],
                              [Mon.muls[F.level(a)] for a in range(L + 1)], Mon.name)


# --- the right adjoint of j -------------------------------------------------------


def _ran_j_restriction(X: ASet) -> dict:
    S = Site(SiteId.AUG_DELTA)
    L = X.max_level + 1
    sizes = [1] + list(X.sizes)
    restr = {}
    for a in range(L + 1):
        for b in range(L + 1):
            P = S.hom_count(b, a)
            if b == 0:
                restr[(b, a)] = np.zeros((P, sizes[a]), dtype=np.int32)
            elif a == 0:
                restr[(b, a)] = np.zeros((0, 1), dtype=np.int32)
            else:
                restr[(b, a)] = np.ascontiguousarray(X.restriction[(b - 1, a - 1)], dtype=np.int32)
    return restr


def ran_j(X):
    """``j_*X``: a point at level 0, ``X[n-1]`` at level ``n``.

    Crossed groups come back as crossed groups; plain presheaves as presheaves.
    """
    if X.site_id is not SiteId.DELTA:
        raise ValueError("ran_j takes a simplicial table")
    L = X.max_level + 1
    restr = _ran_j_restriction(X)
    if not isinstance(X, CrossedGroupTable):
        return ASet(SiteId.AUG_DELTA, L, [1] + list(X.sizes), restr)
    S = Site(SiteId.AUG_DELTA)
    groups = [LevelGroup.trivial()] + list(X.groups)
    act = {}
    for a in range(L + 1):
        for b in range(L + 1):
            P = S.hom_count(b, a)
            if a == 0 or b == 0:
                act[(b, a)] = np.tile(np.arange(P, dtype=np.int32), (groups[a].order, 1))
            else:
                act[(b, a)] = np.ascontiguousarray(X.action[(b - 1, a - 1)], dtype=np.int32)
    signed = None
    if X.signed is not None:
        signed = [(np.zeros((1, 0), np.int32), np.zeros((1, 0), np.int8))] + list(X.signed)
    return CrossedGroupTable(S, L, groups, restr, act, signed=signed, name=f"j_*{X.name}")


def ran_j_monoid(Mon: CrossedMonoidTable) -> CrossedMonoidTable:
    """``j_#M`` over ``j_*G``."""
    G = ran_j(Mon.G)
    X = ran_j(Mon.M.aset)
    p = [np.zeros(1, dtype=np.int64)] + list(Mon.M.p)
    sl = SlicedObject(X, G, p, f"j_#{Mon.name}")
    return CrossedMonoidTable(sl, [0] + Mon.units, [np.zeros((1, 1), np.int64)] + Mon.muls, sl.name)


def same_monoid_tables(M1: CrossedMonoidTable, M2: CrossedMonoidTable) -> bool:
    return (M1.M.same_tables(M2.M) and M1.units == M2.units
            and all(np.array_equal(u, v) for u, v in zip(M1.muls, M2.muls))
            and M1.G.same_tables(M2.G))


# --- the interval right adjoint -----------------------------------------------------


def reindex_table(T: CrossedGroupTable, maps) -> CrossedGroupTable:
    """Relabel elements: old index ``i`` at level ``a`` becomes ``maps[a][i]``."""
    inv = []
    for a in T.levels:
        m = np.asarray(maps[a], dtype=np.int64)
        if sorted(m.tolist()) != list(range(T.sizes[a])):
            raise ValueError("relabelling must be a bijection")
        q = np.empty_like(m)
        q[m] = np.arange(len(m))
        inv.append(q)
    groups, restr, act = [], {}, {}
    for a in T.levels:
        m, q = np.asarray(maps[a]), inv[a]
        groups.append(LevelGroup(m[T.groups[a].mul[np.ix_(q, q)]]))
        for b in T.levels:
            restr[(b, a)] = np.ascontiguousarray(np.asarray(maps[b])[T.restriction[(b, a)][:, q]], dtype=np.int32)
            act[(b, a)] = np.ascontiguousarray(T.action[(b, a)][q], dtype=np.int32)
    signed = None if T.signed is None else [(p[inv[a]], s[inv[a]]) for a, (p, s) in enumerate(T.signed)]
    return CrossedGroupTable(T.site, T.max_level, groups, restr, act, signed=signed, name=T.name)


def interval_condition(perm, sign, theta: int) -> bool:
    """The endpoint pair of ``<n+2>`` is kept, and its signs and swap parity equal ``theta``."""
    N = len(perm)
    if N < 2 or {int(perm[0]), int(perm[N - 1])} != {0, N - 1}:
        return False
    parity = -1 if perm[0] == N - 1 else 1
    return parity == sign[0] == sign[N - 1] == theta


def ran_interval_monoid(Mon: CrossedMonoidTable, theta, W_nabla: CrossedGroupTable | None = None) -> CrossedMonoidTable:
    """Elements of ``M<n+2>`` whose structure image keeps the two outer points.

    ``theta[a][x]`` is ``+1`` or ``-1``; the base of ``Mon`` must carry signed
    permutations. The result lives over ``W_nabla`` up to level ``L - 2``.
    """
    from .standard_families import weyl_table
    G = Mon.G
    if G.site_id is not SiteId.AUG_DELTA or G.signed is None:
        raise ValueError("need a crossed AugDelta monoid over a signed-permutation group")
    for a in Mon.levels:
        t = np.asarray(theta[a])
        if not np.array_equal(t[Mon.muls[a]], t[:, None] * t[None, :]):
            raise ValueError(f"theta is not multiplicative at level {a}")
    L = G.max_level - 2
    if L < 0:
        raise ValueError("need levels up to at least 2")
    Wn = weyl_table(SiteId.NABLA, L) if W_nabla is None else W_nabla
    members, pnab = [], []
    for n in range(L + 1):
        k = n + 2
        perms, signs = G.signed[k]
        mem, img = [], []
        keys = Wn.keys(n)
        for x in range(Mon.sizes[k]):
            g = Mon.M.p[k][x]
            if interval_condition(perms[g], signs[g], int(theta[k][x])):
                mem.append(x)
                key = int(_key(perms[g], signs[g]))
                i = int(np.searchsorted(keys, key))
                if i >= len(keys) or keys[i] != key:
                    raise AssertionError("structure image is not a Weyl element")
                img.append(i)
        members.append(np.array(mem, dtype=np.int64))
        pnab.append(np.array(img, dtype=np.int64))
    pos = []
    for k_n, mem in enumerate(members):
        q = np.full(Mon.sizes[k_n + 2], -1, dtype=np.int64)
        q[mem] = np.arange(len(mem))
        pos.append(q)
    SN, SA = Site(SiteId.NABLA), Site(SiteId.AUG_DELTA)
    restr = {}
    for n in range(L + 1):
        for m in range(L + 1):
            homs = SN.homs(m, n)
            tab = np.empty((len(homs), len(members[n])), dtype=np.int32)
            for p, psi in enumerate(homs):
                t = SA.index(forget_interval(psi))
                r = pos[m][Mon.M.aset.restriction[(m + 2, n + 2)][t, members[n]]]
                if r.size and r.min() < 0:
                    raise AssertionError("restriction leaves the interval subset")
                tab[p] = r
            restr[(m, n)] = tab
    X = ASet(SiteId.NABLA, L, [len(m) for m in members], restr)
    sl = SlicedObject(X, Wn, pnab, f"J_#{Mon.name}")
    muls, units = [], []
    for n, mem in enumerate(members):
        mm = pos[n][Mon.muls[n + 2][np.ix_(mem, mem)]]
        if mm.size and mm.min() < 0:
            raise AssertionError("interval subset not closed under products")
        muls.append(mm)
        units.append(int(pos[n][Mon.units[n + 2]]))
    return CrossedMonoidTable(sl, units, muls, sl.name)


def _key(perm, sign) -> int:
    from . import kernels
    n = len(perm)
    return int(kernels.signed_keys(np.asarray(perm, np.int32).reshape(1, n),
                                   np.asarray(sign, np.int8).reshape(1, n))[0])


def weyl_times_c2(max_level: int):
    """``W_AugDelta x C2`` as a crossed monoid over ``W_AugDelta``, with its C2 sign."""
    from .standard_families import weyl_table
    W = weyl_table(SiteId.AUG_DELTA, max_level)
    C2 = constant_table(W.site, max_level, cyclic_group(2), "C2")
    P = product_with_noncrossed(W, C2, "W x C2")
    proj = CrossedGroupMap(P, W, [np.arange(m) // 2 for m in P.sizes])
    Mon = crossed_group_as_monoid(P, proj)
    theta = [np.where(np.arange(m) % 2 == 0, 1, -1) for m in P.sizes]
    return Mon, theta


def monoid_as_group(Mon: CrossedMonoidTable) -> CrossedGroupTable:
    """The group of a crossed monoid in which every element is invertible."""
    from .crossed_monoidal import invertibles
    T, members = invertibles(Mon)
    if any(len(m) != s for m, s in zip(members, Mon.sizes)):
        raise ValueError("monoid has non-invertible elements")
    return T


def interval_monoid_matches_weyl(Mon: CrossedMonoidTable) -> bool:
    """Relabel by structure image and compare with the Weyl tables exactly."""
    T = monoid_as_group(Mon)
    R = reindex_table(T, Mon.M.p)
    W = Mon.G
    return (all(np.array_equal(R.groups[a].mul, W.groups[a].mul) for a in W.levels)
            and all(np.array_equal(R.restriction[k], W.restriction[k]) for k in W.restriction)
            and all(np.array_equal(R.action[k], W.action[k]) for k in W.action))


def tau_map(n: int) -> SiteMorphism:
    """``<<n+2>> -> <<n>>`` sending the outer interior points to the endpoints."""
    N = n + 2
    images = [0, 0] + list(range(1, n + 1)) + [N - 1, N - 1]
    return SiteMorphism(SiteId.NABLA, n + 2, n, tuple(images))


def tau_image_matches(W: CrossedGroupTable, n: int) -> bool:
    """Restriction along ``tau_n`` is injective with image the displayed subset of level ``n+2``."""
    S = W.site
    t = S.index(tau_map(n))
    img = W.restriction[(n + 2, n)][t]
    if len(set(img.tolist())) != W.sizes[n]:
        return False
    perms, signs = W.signed[n + 2]
    want = set()
    for y in range(W.sizes[n + 2]):
        pi, sg = perms[y][1:-1] - 1, signs[y][1:-1]
        theta = int(signs[y][0])
        if interval_condition(pi, sg, theta):
            want.add(y)
    return want == set(img.tolist())


# --- the interval left Kan extension -------------------------------------------------


def interior_bijections(n: int, k: int) -> list[SiteMorphism]:
    return [rho for rho in Site(SiteId.NABLA).homs(n, k) if is_interior_bijective(rho)]


def lan_interval(X: ASet) -> ASet:
    """Pairs ``(x, rho)`` with ``x in X<k>`` and ``rho: <<n>> -> <<k>>`` interior-bijective.

    Labels are triples ``(k, x, rho)``.
    """
    if X.site_id is not SiteId.AUG_DELTA:
        raise ValueError("lan_interval takes an AugDelta table")
    L = X.max_level
    labels, index = [], []
    for n in range(L + 1):
        lab = [(k, x, rho) for k in range(n + 1) for rho in interior_bijections(n, k) for x in range(X.sizes[k])]
        labels.append(lab)
        index.append({(k, x, rho): i for i, (k, x, rho) in enumerate(lab)})
    SN = Site(SiteId.NABLA)
    restr = {}
    for n in range(L + 1):
        for m in range(L + 1):
            homs = SN.homs(m, n)
            tab = np.empty((len(homs), len(labels[n])), dtype=np.int32)
            for p, phi in enumerate(homs):
                for i, (k, x, rho) in enumerate(labels[n]):
                    mu, rho2 = interval_factor(compose(rho, phi))
                    tab[p, i] = index[m][(mu.dom, X.restrict(mu, x), rho2)]
            restr[(m, n)] = tab
    return ASet(SiteId.NABLA, L, [len(l) for l in labels], restr, labels)


def lan_adjunct(X: ASet, Y: ASet, g) -> list[np.ndarray]:
    """``g: X -> J*Y`` to ``J_!X -> Y``, ``(x, rho) -> rho*(g(x))``."""
    LX = lan_interval(X)
    SN = Site(SiteId.NABLA)
    out = []
    for n, lab in enumerate(LX.labels):
        out.append(np.array([Y.restriction[(n, k)][SN.index(rho), g[k][x]] for k, x, rho in lab], dtype=np.int64))
    return out


def lan_unadjunct(X: ASet, f) -> list[np.ndarray]:
    """``f: J_!X -> Y`` to ``X -> J*Y``, ``x -> f(x, id)``."""
    LX = lan_interval(X)
    out = []
    for k in X.levels:
        ident = SiteMorphism.identity(SiteId.NABLA, k)
        pos = {lab: i for i, lab in enumerate(LX.labels[k])}
        out.append(np.array([f[k][pos[(k, x, ident)]] for x in range(X.sizes[k])], dtype=np.int64))
    return out


# --- the left adjoint on crossed monoids ------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            if ri < rj:
                self.parent[rj] = ri
            else:
                self.parent[ri] = rj


class NonConfluence(AssertionError):
    def __init__(self, word, forms):
        super().__init__(f"word {word} has {len(forms)} irreducible forms")
        self.word, self.forms = word, forms


class LanCrossedMonoid:
    """Words of bracketed letters ``[x, phi~]`` presenting ``F_! M`` at one level.

    A letter is a class of triples ``(b, x, phi~)`` with ``x in M(b)`` and
    ``phi~: a -> F(b)``, under ``(theta*(z), phi~) ~ (z, F(theta) phi~)``.
    Rewriting drops unit letters and merges ``[x, phi~^y][y, phi~] -> [xy, phi~]``.
    """

    def __init__(self, Mon: CrossedMonoidTable, F: SiteFunctor, Gt: CrossedGroupTable, word_cap: int = 4):
        if Mon.M.site.id is not F.source or Gt.site_id is not F.target:
            raise ValueError("monoid, functor and crossed group do not fit together")
        w = stability_witness(F, Gt, min(Mon.G.max_level, F.source_max(Gt.max_level)))
        if w is not None:
            raise StabilityError(*w)
        self.Mon, self.F, self.Gt, self.cap = Mon, F, Gt, word_cap
        self.src_levels = [b for b in Mon.levels if F.level(b) <= Gt.max_level]
        self._levels = {}

    # letters
    def _build(self, a: int):
        if a in self._levels:
            return self._levels[a]
        Mon, F, Gt = self.Mon, self.F, self.Gt
        T = Gt.site
        triples, index = [], {}
        for b in self.src_levels:
            P = T.hom_count(a, F.level(b))
            for x in range(Mon.sizes[b]):
                for f in range(P):
                    index[(b, x, f)] = len(triples)
                    triples.append((b, x, f))
        uf = _UnionFind(len(triples))
        for b in self.src_levels:
            for b2 in self.src_levels:
                hidx = F.hom_index(b, b2)
                if len(hidx) == 0:
                    continue
                comp = T.compose_table(a, F.level(b), F.level(b2))  # [F(theta), phi~]
                R = Mon.M.aset.restriction[(b, b2)]
                P = T.hom_count(a, F.level(b))
                for t in range(len(hidx)):
                    for z in range(Mon.sizes[b2]):
                        for f in range(P):
                            uf.union(index[(b, int(R[t, z]), f)], index[(b2, z, int(comp[hidx[t], f]))])
        roots = sorted({uf.find(i) for i in range(len(triples))})
        cls_of_root = {r: c for c, r in enumerate(roots)}
        cls = np.array([cls_of_root[uf.find(i)] for i in range(len(triples))], dtype=np.int64)
        reps = [triples[r] for r in roots]
        members = [[] for _ in roots]
        for i, c in enumerate(cls):
            members[c].append(triples[i])
        units = {int(cls[index[(b, Mon.units[b], f)]]) for b in self.src_levels
                 for f in range(T.hom_count(a, F.level(b)))}
        # structure value of each class, checked to be well defined
        struct = []
        for c, mem in enumerate(members):
            vals = {self._triple_struct(a, t) for t in mem}
            if len(vals) != 1:
                raise AssertionError(f"structure map not constant on letter class {c}")
            struct.append(vals.pop())
        # merge table
        merges: dict[tuple[int, int], set[int]] = {}
        for b in self.src_levels:
            Fb = F.level(b)
            P = T.hom_count(a, Fb)
            act = Gt.action[(a, Fb)]
            mul = Mon.muls[b]
            for y in range(Mon.sizes[b]):
                py = Mon.M.p[b][y]
                for f in range(P):
                    fy = int(act[py, f])
                    c2 = int(cls[index[(b, y, f)]])
                    for x in range(Mon.sizes[b]):
                        c1 = int(cls[index[(b, x, fy)]])
                        merges.setdefault((c1, c2), set()).add(int(cls[index[(b, int(mul[x, y]), f)]]))
        data = {"triples": triples, "index": index, "cls": cls, "reps": reps, "members": members,
                "units": units, "struct": struct, "merges": merges}
        self._levels[a] = data
        return data

    def _triple_struct(self, a: int, t) -> int:
        b, x, f = t
        Fb = self.F.level(b)
        return int(self.Gt.restriction[(a, Fb)][f, self.Mon.M.p[b][x]])

    def letter(self, a: int, b: int, x: int, phi: SiteMorphism) -> int:
        d = self._build(a)
        return int(d["cls"][d["index"][(b, x, self.Gt.site.index(phi))]])

    def letters(self, a: int) -> list[int]:
        d = self._build(a)
        return [c for c in range(len(d["reps"])) if c not in d["units"]]

    def unit_letters(self, a: int) -> set[int]:
        return set(self._build(a)["units"])

    def structure(self, a: int, word) -> int:
        d = self._build(a)
        grp = self.Gt.groups[a]
        g = grp.unit
        for c in word:
            g = int(grp.mul[g, d["struct"][c]])
        return g

    # rewriting
    def _steps(self, a: int, word: tuple) -> list[tuple]:
        d = self._build(a)
        out = []
        for i, c in enumerate(word):
            if c in d["units"]:
                out.append(word[:i] + word[i + 1:])
        for i in range(len(word) - 1):
            for r in d["merges"].get((word[i], word[i + 1]), ()):
                out.append(word[:i] + (r,) + word[i + 2:])
        return out

    def normal_forms(self, a: int, word) -> set[tuple]:
        """Every irreducible word reachable by rewriting."""
        word = tuple(word)
        if len(word) > self.cap:
            raise OverflowError(f"word of length {len(word)} exceeds cap {self.cap}")
        seen = {word}
        queue = deque([word])
        irreducible = set()
        while queue:
            w = queue.popleft()
            nxt = self._steps(a, w)
            if not nxt:
                irreducible.add(w)
            for v in nxt:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return irreducible

    def normal_form(self, a: int, word) -> tuple:
        forms = self.normal_forms(a, word)
        if len(forms) != 1:
            raise NonConfluence(tuple(word), sorted(forms))
        return next(iter(forms))

    def rewrite_preserves_structure(self, a: int, word) -> bool:
        s = self.structure(a, word)
        return all(self.structure(a, v) == s for v in self._steps(a, tuple(word)))

    def mul(self, a: int, u, v) -> tuple:
        return self.normal_form(a, tuple(u) + tuple(v))

    # restriction
    def restrict(self, psi: SiteMorphism, word) -> tuple:
        """``[x_k, phi~_k psi^{q_{k+1} ... q_n}]`` letter by letter."""
        a2, a = psi.dom, psi.cod
        d = self._build(a)
        T = self.Gt.site
        grp = self.Gt.groups[a]
        out = []
        q = grp.unit
        for c in reversed(tuple(word)):
            b, x, f = d["reps"][c]
            psi_q = T.homs(a2, a)[int(self.Gt.action[(a2, a)][q, T.index(psi)])]
            phi = T.homs(a, self.F.level(b))[f]
            out.append(self.letter(a2, b, x, compose(phi, psi_q)))
            q = int(grp.mul[d["struct"][c], q])
        return tuple(reversed(out))

    def restrict_letter_all_reps(self, psi: SiteMorphism, c: int, q: int) -> set[int]:
        """Restriction of one letter, twisted by ``q``, computed from every representative."""
        a2, a = psi.dom, psi.cod
        d = self._build(a)
        T = self.Gt.site
        psi_q = T.homs(a2, a)[int(self.Gt.action[(a2, a)][q, T.index(psi)])]
        out = set()
        for b, x, f in d["members"][c]:
            phi = T.homs(a, self.F.level(b))[f]
            out.add(self.letter(a2, b, x, compose(phi, psi_q)))
        return out

    def unit_map(self, b0: int) -> list[tuple]:
        """``x -> [x, id]`` at the level ``F(b0)``, as normal forms."""
        a = self.F.level(b0)
        ident = SiteMorphism.identity(self.F.target, a)
        return [self.normal_form(a, (self.letter(a, b0, x, ident),)) for x in range(self.Mon.sizes[b0])]

    def words(self, a: int, length: int) -> list[tuple]:
        ls = self.letters(a)
        return [w for k in range(length + 1) for w in itertools.product(ls, repeat=k)]

    def merge_components(self, a: int) -> list[list[int]]:
        """Connected components of non-unit letters under the merge relation."""
        d = self._build(a)
        ls = self.letters(a)
        uf = _UnionFind(len(d["reps"]))
        for (c1, c2), rs in d["merges"].items():
            for r in rs:
                if c1 not in d["units"] and c2 not in d["units"]:
                    uf.union(c1, c2)
                    if r not in d["units"]:
                        uf.union(c1, r)
        comps: dict[int, list[int]] = {}
        for c in ls:
            comps.setdefault(uf.find(c), []).append(c)
        return sorted(comps.values(), key=lambda v: (len(v), v))


def lan_crossed_monoid(Mon, F, Gt, word_cap: int = 4) -> LanCrossedMonoid:
    return LanCrossedMonoid(Mon, F, Gt, word_cap)


# --- pi_0 ------------------------------------------------------------------------------


@dataclass
class Pi0Result:
    classes: list[list[int]]
    projection: np.ndarray
    mul: np.ndarray
    unit: int


def pi0_monoid(Mon: CrossedMonoidTable) -> Pi0Result:
    """Components of ``M_0`` under the two face maps of ``M_1``, with induced products.

    Raises ``AssertionError`` when a product depends on representatives.
    """
    if Mon.M.site.id is not SiteId.DELTA or Mon.M.aset.max_level < 1:
        raise ValueError("pi_0 needs a simplicial monoid truncated at level >= 1")
    R = Mon.M.aset.restriction[(0, 1)]
    uf = _UnionFind(Mon.sizes[0])
    for x in range(Mon.sizes[1]):
        uf.union(int(R[0, x]), int(R[1, x]))
    roots = sorted({uf.find(i) for i in range(Mon.sizes[0])})
    cid = {r: c for c, r in enumerate(roots)}
    proj = np.array([cid[uf.find(i)] for i in range(Mon.sizes[0])], dtype=np.int64)
    classes = [np.flatnonzero(proj == c).tolist() for c in range(len(roots))]
    k = len(roots)
    mul = np.full((k, k), -1, dtype=np.int64)
    m0 = Mon.muls[0]
    for c1, c2 in itertools.product(range(k), repeat=2):
        vals = {int(proj[m0[x, y]]) for x in classes[c1] for y in classes[c2]}
        if len(vals) != 1:
            raise AssertionError(f"product of components {c1}, {c2} is not well defined")
        mul[c1, c2] = vals.pop()
    return Pi0Result(classes, proj, mul, int(proj[Mon.units[0]]))


def _noncrossed_monoid(aset: ASet, units, muls, name: str) -> CrossedMonoidTable:
    G = trivial_crossed_group(aset.site, aset.max_level)
    sl = SlicedObject(aset, G, [np.zeros(s, dtype=np.int64) for s in aset.sizes], name)
    return CrossedMonoidTable(sl, units, muls, name)


def _codiscrete(max_level: int, factor: int):
    """``E(Z/2)`` with an optional constant ``{1, 0}`` factor (``factor`` = 1 or 2)."""
    S = Site(SiteId.DELTA)
    sizes = [(2 ** (n + 1)) * factor for n in range(max_level + 1)]
    restr = {}
    for a in range(max_level + 1):
        for b in range(max_level + 1):
            homs = S.hom_array(b, a)
            tab = np.empty((len(homs), sizes[a]), dtype=np.int32)
            for p, img in enumerate(homs):
                for v in range(2 ** (a + 1)):
                    w = sum(((v >> int(i)) & 1) << j for j, i in enumerate(img))
                    for t in range(factor):
                        tab[p, v * factor + t] = w * factor + t
            restr[(b, a)] = tab
    aset = ASet(S, max_level, sizes, restr)
    muls = []
    for a in range(max_level + 1):
        n = 2 ** (a + 1)
        v = np.arange(n)
        xor = v[:, None] ^ v[None, :]
        if factor == 1:
            muls.append(xor)
        else:
            t = np.array([[0, 1], [1, 1]])
            muls.append((xor[:, None, :, None] * 2 + t[None, :, None, :]).reshape(2 * n, 2 * n))
    return aset, [0] * (max_level + 1), muls


def pi0_fixtures(max_level: int = 2) -> dict:
    """Sample simplicial monoids with their expected component monoids."""
    from .standard_families import weyl_table
    fixtures = {}
    C2 = constant_table(Site(SiteId.DELTA), max_level, cyclic_group(2), "C2")
    fixtures["constant C2"] = (_noncrossed_monoid(C2, [0] * (max_level + 1),
                                                  [g.mul for g in C2.groups], "C2"), np.array([[0, 1], [1, 0]]))
    aset, units, muls = _codiscrete(max_level, 1)
    fixtures["E(Z/2)"] = (_noncrossed_monoid(aset, units, muls, "E(Z/2)"), np.array([[0]]))
    aset, units, muls = _codiscrete(max_level, 2)
    fixtures["E(Z/2) x {1,0}"] = (_noncrossed_monoid(aset, units, muls, "E(Z/2) x {1,0}"),
                                  np.array([[0, 1], [1, 1]]))
    W = weyl_table(SiteId.DELTA, max_level)
    fixtures["W_Delta"] = (crossed_group_as_monoid(W), np.array([[0]]))
    return fixtures
