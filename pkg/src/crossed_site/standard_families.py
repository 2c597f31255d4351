"""Symmetric, cyclic, dihedral, hyperoctahedral and Weyl crossed groups.

Elements of every family here are signed permutations ``(sigma; eps)`` of the
carrier indices of a level, which are identified with hom(s, level) in its
well-order. Restriction along ``phi`` lays the fibers of ``phi`` out in the
order ``sigma`` prescribes, each fiber kept in order when its sign is ``+1``
and reversed when it is ``-1``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .crossed_core import (
    CrossedGroupMap,
    CrossedGroupTable,
    LevelGroup,
    SubgroupFamily,
    generated_subgroup,
    trivial_family,
    whole_family,
)
from .finite_site import (
    Site,
    SiteError,
    SiteId,
    SiteMorphism,
    carrier_size,
    corelation,
    corelation_level,
    generator_level,
    hom_order,
    refl_collapse,
    compose,
)

# --- single elements --------------------------------------------------------


def _perm_array(items, n: int) -> np.ndarray:
    items = list(items)
    return np.array(items, dtype=np.int32).reshape(len(items), n)


def _check_perm(sigma, n: int) -> tuple[int, ...]:
    sigma = tuple(int(v) for v in sigma)
    if sorted(sigma) != list(range(n)):
        raise ValueError(f"{sigma} is not a permutation of {n} points")
    return sigma


def _fibers(images, n: int):
    size = [0] * n
    rank = []
    for v in images:
        rank.append(size[v])
        size[v] += 1
    return size, rank


def _restrict(images, n: int, sigma, eps):
    size, rank = _fibers(images, n)
    inv = [0] * n
    for j, s in enumerate(sigma):
        inv[s] = j
    start, acc = [0] * n, 0
    for j in range(n):
        start[j] = acc
        acc += size[inv[j]]
    tau, sg = [], []
    for p, t in enumerate(images):
        r = rank[p] if eps[t] > 0 else size[t] - 1 - rank[p]
        tau.append(start[sigma[t]] + r)
        sg.append(eps[t])
    return tuple(tau), tuple(sg)


def _act(images, n: int, sigma):
    size, _ = _fibers(images, n)
    inv = [0] * n
    for j, s in enumerate(sigma):
        inv[s] = j
    out = []
    for j in range(n):
        out.extend([j] * size[inv[j]])
    return tuple(out)


def sym_action(sigma, phi: SiteMorphism) -> SiteMorphism:
    """``phi^sigma``: the fiber over ``i`` becomes the fiber over ``sigma(i)``."""
    n = carrier_size(phi.site, phi.cod)
    sigma = _check_perm(sigma, n)
    return SiteMorphism(phi.site, phi.dom, phi.cod, _act(phi.images, n, sigma))


def sym_restrict(phi: SiteMorphism, sigma) -> tuple[int, ...]:
    """``phi*(sigma)``, order-preserving on every fiber."""
    n = carrier_size(phi.site, phi.cod)
    sigma = _check_perm(sigma, n)
    tau, _ = _restrict(phi.images, n, sigma, [1] * n)
    return tau


def rotation(n: int, k: int) -> tuple[int, ...]:
    """``i -> i + k (mod n)`` on ``n`` carrier indices."""
    return tuple((i + k) % n for i in range(n)) if n else ()


def rotation_amount(sigma) -> int:
    n = len(sigma)
    if n == 0:
        return 0
    k = sigma[0] % n
    if tuple(sigma) != rotation(n, k):
        raise ValueError(f"{tuple(sigma)} is not a rotation")
    return k


def cyc_restrict(mu: SiteMorphism, k: int) -> int:
    """Restriction of the rotation by ``k`` along ``mu: <m> -> <n>``.

    Returns the rotation amount at ``<m>``: the number of points of ``<m>``
    sent into the last ``k`` points of ``<n>``, reduced mod ``m``.
    """
    if mu.site is not SiteId.AUG_DELTA:
        raise SiteError("rotations restrict along AugDelta maps")
    m, n = mu.dom, mu.cod
    if m == 0:
        return 0
    k %= n
    moved = sum(1 for v in mu.images if v >= n - k) if k else 0
    return moved % m


def hyp_restrict(phi: SiteMorphism, x: CrossedElement) -> CrossedElement:
    """``(phi*(sigma) beta_phi(eps); phi*(eps))``."""
    return x.restrict(phi)


@dataclass(frozen=True)
class CrossedElement:
    site: SiteId
    level: int
    sigma: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        n = carrier_size(self.site, self.level)
        _check_perm(self.sigma, n)
        if len(self.signs) != n or any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1/-1, one per carrier point")

    @classmethod
    def identity(cls, site: SiteId, level: int) -> CrossedElement:
        n = carrier_size(site, level)
        return cls(site, level, tuple(range(n)), (1,) * n)

    @property
    def size(self) -> int:
        return len(self.sigma)

    def key(self) -> int:
        n = self.size
        p = np.array([self.sigma], dtype=np.int32).reshape(1, n)
        s = np.array([self.signs], dtype=np.int8).reshape(1, n)
        return int(kernels.signed_keys(p, s)[0])

    def __mul__(self, other: CrossedElement) -> CrossedElement:
        if (self.site, self.level) != (other.site, other.level):
            raise ValueError("level mismatch")
        sig = tuple(self.sigma[t] for t in other.sigma)
        sg = tuple(self.signs[t] * e for t, e in zip(other.sigma, other.signs))
        return CrossedElement(self.site, self.level, sig, sg)

    def inverse(self) -> CrossedElement:
        n = self.size
        inv = [0] * n
        for i, s in enumerate(self.sigma):
            inv[s] = i
        return CrossedElement(self.site, self.level, tuple(inv), tuple(self.signs[inv[j]] for j in range(n)))

    def restrict(self, phi: SiteMorphism) -> CrossedElement:
        if phi.site is not self.site or phi.cod != self.level:
            raise ValueError("level mismatch")
        tau, sg = _restrict(phi.images, self.size, self.sigma, self.signs)
        return CrossedElement(self.site, phi.dom, tau, sg)

    def act(self, phi: SiteMorphism) -> SiteMorphism:
        if phi.site is not self.site or phi.cod != self.level:
            raise ValueError("level mismatch")
        return SiteMorphism(phi.site, phi.dom, phi.cod, _act(phi.images, self.size, self.sigma))

    def to_json(self) -> dict:
        return {"site": self.site.value, "level": self.level, "sigma": list(self.sigma),
                "signs": list(self.signs)}


# --- the stabilized permutation groups and Weyl membership ------------------


class StabilizedPermGroup:
    """Permutations of hom(s, level) sending every probe image set into the site.

    A permutation qualifies when acting on each probe map ``c -> level``
    (``c <= stab_cap``) still gives a morphism of the site. For Delta and
    AugDelta every permutation qualifies; for Nabla the end fibers must stay
    nonempty.
    """

    def __init__(self, site: SiteId, level: int, stab_cap: int = 2):
        self.site = SiteId.parse(site)
        self.level = level
        self.stab_cap = stab_cap
        n = carrier_size(self.site, level)
        need_ends = self.site is SiteId.NABLA
        S = Site(self.site)
        rows = [S.hom_array(c, level) for c in range(stab_cap + 1)]
        sizes = [_perm_array([np.bincount(r, minlength=n) for r in arr], n) for arr in rows]
        probe_sizes = np.ascontiguousarray(np.concatenate(sizes) if sizes else np.zeros((0, n), np.int32),
                                           dtype=np.int32)
        self.flags = np.asarray(kernels.stable_table(n, probe_sizes, int(need_ends)), dtype=np.uint8)

    @property
    def order(self) -> int:
        return int(self.flags.sum())

    def contains(self, sigma) -> bool:
        p = np.array([sigma], dtype=np.int32).reshape(1, len(sigma))
        return bool(self.flags[kernels.lehmer_rank(p)[0]])


def all_signed_perms(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Every signed permutation of ``n`` points, sorted by key."""
    perms = _perm_array(itertools.permutations(range(n)), n)
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int8)
    signs = (1 - 2 * bits).astype(np.int8)
    P = np.repeat(perms, len(masks), axis=0)
    S = np.tile(signs, (len(perms), 1))
    return np.ascontiguousarray(P), np.ascontiguousarray(S)


def weyl_members(site, n: int, probe_cap: int | None = None, stab_cap: int = 2):
    """Signed permutations passing the Weyl membership test at level ``n``.

    Every probe ``phi: b -> n`` with ``b <= probe_cap`` must restrict the
    candidate to a permutation lying in the stabilized group at ``b``.
    """
    site = SiteId.parse(site)
    if probe_cap is None:
        probe_cap = n + 2
    if probe_cap < n + 2:
        raise ValueError(f"probe_cap {probe_cap} is below the required {n + 2}")
    N = carrier_size(site, n)
    perms, signs = all_signed_perms(N)
    alive = np.ones(len(perms), dtype=np.uint8)
    S = Site(site)
    for b in range(probe_cap + 1):
        stable = StabilizedPermGroup(site, b, stab_cap).flags
        probes = np.ascontiguousarray(S.hom_array(b, n), dtype=np.int32)
        if probes.shape[0] == 0:
            continue
        kernels.weyl_members_level(perms, signs, alive, probes, N, stable)
    keep = alive.astype(bool)
    return np.ascontiguousarray(perms[keep]), np.ascontiguousarray(signs[keep])


# --- tables from signed permutations ----------------------------------------


def _lookup(perms: np.ndarray, signs: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    keys = kernels.signed_keys(perms, signs)
    table = np.full(math.factorial(N) << N, -1, dtype=np.int32)
    table[keys] = np.arange(len(keys), dtype=np.int32)
    return keys, table


def signed_table(site, levels, name: str = "") -> CrossedGroupTable:
    """Assemble a crossed group from per-level sets of signed permutations.

    Raises ``ValueError`` when a level is not a group or the family is not
    closed under restriction.
    """
    S = Site(site)
    max_level = len(levels) - 1
    data, lookups, groups = [], [], []
    for a, (perms, signs) in enumerate(levels):
        N = carrier_size(S.id, a)
        perms = np.ascontiguousarray(perms, dtype=np.int32).reshape(len(perms), N)
        signs = np.ascontiguousarray(signs, dtype=np.int8).reshape(len(signs), N)
        keys, table = _lookup(perms, signs, N)
        order = np.argsort(keys, kind="stable")
        perms, signs = np.ascontiguousarray(perms[order]), np.ascontiguousarray(signs[order])
        keys, table = _lookup(perms, signs, N)
        mul = kernels.signed_mul_table(perms, signs, table)
        if mul.size and mul.min() < 0:
            raise ValueError(f"level {a} of {name or 'family'} is not closed under products")
        groups.append(LevelGroup(mul))
        data.append((perms, signs))
        lookups.append(table)
    restr, act = {}, {}
    for a in range(max_level + 1):
        perms, signs = data[a]
        N = carrier_size(S.id, a)
        for b in range(max_level + 1):
            homs = S.hom_array(b, a)
            P = homs.shape[0]
            R = np.empty((P, len(perms)), dtype=np.int32)
            A = np.empty((len(perms), P), dtype=np.int32)
            for p in range(P):
                img = np.ascontiguousarray(homs[p], dtype=np.int32)
                tau, sg = kernels.weyl_restrict(img, N, perms, signs)
                idx = lookups[b][kernels.signed_keys(tau, sg)]
                if idx.size and idx.min() < 0:
                    raise ValueError(f"{name or 'family'} is not closed under restriction {b}->{a}")
                R[p] = idx
                moved = kernels.weyl_act(img, N, perms)
                A[:, p] = S.lookup(b, a, moved) if len(perms) else []
            restr[(b, a)] = R
            act[(b, a)] = A
    return CrossedGroupTable(S, max_level, groups, restr, act, signed=data, name=name)


@lru_cache(maxsize=None)
def weyl_table(site, max_level: int, probe_cap: int | None = None) -> CrossedGroupTable:
    """The Weyl crossed group truncated at ``max_level`` (cached)."""
    site = SiteId.parse(site)
    levels = [weyl_members(site, a, None if probe_cap is None else max(probe_cap, a + 2))
              for a in range(max_level + 1)]
    return signed_table(site, levels, name=f"W[{site.value}]")


def weyl_group(site, n: int, probe_cap: int | None = None) -> dict:
    """Level ``n`` of the Weyl group: its elements and multiplication table."""
    perms, signs = weyl_members(site, n, probe_cap)
    T = signed_table(site, [weyl_members(site, a) for a in range(n)] + [(perms, signs)])
    perms, signs = T.signed[n]
    elements = [CrossedElement(SiteId.parse(site), n, tuple(map(int, p)), tuple(map(int, s)))
                for p, s in zip(perms, signs)]
    return {"elements": elements, "mul": T.groups[n].mul, "table": T}


# --- closed forms ------------------------------------------------------------


def hyperoctahedral_closed(n: int) -> tuple[np.ndarray, np.ndarray]:
    """H_n as all signed permutations of ``n`` points."""
    return all_signed_perms(n)


def nabla_weyl_closed(n: int) -> tuple[np.ndarray, np.ndarray]:
    """H_n x C2 on the carrier of the interval object ``<<n>>``.

    The C2 factor swaps the two endpoints; the endpoint signs equal it.
    """
    hp, hs = all_signed_perms(n)
    N = n + 2
    rows_p, rows_s = [], []
    for theta in (1, -1):
        P = np.empty((len(hp), N), dtype=np.int32)
        Sg = np.empty((len(hp), N), dtype=np.int8)
        P[:, 1:N - 1] = hp + 1
        Sg[:, 1:N - 1] = hs
        if theta > 0:
            P[:, 0], P[:, N - 1] = 0, N - 1
        else:
            P[:, 0], P[:, N - 1] = N - 1, 0
        Sg[:, 0] = Sg[:, N - 1] = theta
        rows_p.append(P)
        rows_s.append(Sg)
    return np.concatenate(rows_p), np.concatenate(rows_s)


def hyperoctahedral_table(max_level: int) -> CrossedGroupTable:
    """Closed-form hyperoctahedral crossed group on AugDelta."""
    return signed_table(SiteId.AUG_DELTA, [hyperoctahedral_closed(a) for a in range(max_level + 1)],
                        name="H[aug-delta]")


def symmetric_closed(site, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Unsigned permutations, endpoints fixed on Nabla."""
    site = SiteId.parse(site)
    N = carrier_size(site, n)
    if site is SiteId.NABLA:
        inner = _perm_array(itertools.permutations(range(1, N - 1)), N - 2)
        perms = np.concatenate([np.zeros((len(inner), 1), np.int32), inner,
                                np.full((len(inner), 1), N - 1, np.int32)], axis=1)
    else:
        perms = _perm_array(itertools.permutations(range(N)), N)
    return perms, np.ones(perms.shape, dtype=np.int8)


def symmetric_table(site, max_level: int) -> CrossedGroupTable:
    site = SiteId.parse(site)
    return signed_table(site, [symmetric_closed(site, a) for a in range(max_level + 1)],
                        name=f"S[{site.value}]")


# --- named families inside W --------------------------------------------------


def _element_index(W: CrossedGroupTable, a: int, sigma, signs) -> int:
    perms, sg = W.signed[a]
    N = perms.shape[1]
    key = CrossedElement(W.site_id, a, tuple(sigma), tuple(signs)).key() if N else 0
    keys = W.keys(a)
    i = int(np.searchsorted(keys, key))
    if i >= len(keys) or keys[i] != key:
        raise KeyError(f"({sigma}; {signs}) is not an element of level {a}")
    return i


def _select(W: CrossedGroupTable, pred) -> list[np.ndarray]:
    out = []
    for a in W.levels:
        perms, signs = W.signed[a]
        out.append(np.flatnonzero(pred(perms, signs)) if len(perms) else np.zeros(0, np.int64))
    return out


def _interior(site: SiteId, N: int) -> range:
    return range(1, N - 1) if site is SiteId.NABLA else range(N)


def sym_family(W: CrossedGroupTable) -> SubgroupFamily:
    """All signs +1 (which on Nabla forces fixed endpoints)."""
    return SubgroupFamily(W, _select(W, lambda p, s: np.all(s > 0, axis=1)), "S")


def hyp_family(W: CrossedGroupTable) -> SubgroupFamily:
    """Everything on AugDelta and Delta; the endpoint-fixing part on Nabla."""
    if W.site_id is SiteId.NABLA:
        return SubgroupFamily(W, _select(W, lambda p, s: s[:, 0] > 0), "H")
    return whole_family(W, "H")


def weyl_family(W: CrossedGroupTable) -> SubgroupFamily:
    return whole_family(W, "W")


def reflection(site: SiteId, a: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Full reversal of the carrier with every sign -1."""
    N = carrier_size(site, a)
    return tuple(range(N - 1, -1, -1)), (-1,) * N


def rotation_element(site: SiteId, a: int, k: int = 1):
    """Rotation of the interior points by ``k``, signs +1."""
    N = carrier_size(site, a)
    inner = list(_interior(site, N))
    sigma = list(range(N))
    rot = rotation(len(inner), k)
    for i, j in zip(inner, rot):
        sigma[i] = inner[j]
    return tuple(sigma), (1,) * N


def cyc_family(W: CrossedGroupTable) -> SubgroupFamily:
    """Rotations with all signs +1 (not restriction-closed on Nabla)."""
    members = []
    for a in W.levels:
        N = carrier_size(W.site_id, a)
        n_inner = len(_interior(W.site_id, N))
        elems = {_element_index(W, a, *rotation_element(W.site_id, a, k)) for k in range(max(n_inner, 1))}
        members.append(sorted(elems))
    return SubgroupFamily(W, members, "Lambda")


def refl_family(W: CrossedGroupTable) -> SubgroupFamily:
    """The reflexive family generated by the full reversals."""
    gens = [(a, _element_index(W, a, *reflection(W.site_id, a))) for a in W.levels]
    return generated_subgroup(W, gens, "C2")


def dihedral_family(W: CrossedGroupTable) -> SubgroupFamily:
    gens = []
    for a in W.levels:
        gens.append((a, _element_index(W, a, *reflection(W.site_id, a))))
        gens.append((a, _element_index(W, a, *rotation_element(W.site_id, a, 1))))
    return generated_subgroup(W, gens, "D")


def refsym_family(W: CrossedGroupTable) -> SubgroupFamily:
    S = sym_family(W)
    gens = [(a, x) for a, m in enumerate(S.members) for x in m]
    gens += [(a, _element_index(W, a, *reflection(W.site_id, a))) for a in W.levels]
    return generated_subgroup(W, gens, "S~")


FAMILY_BUILDERS = {
    "trivial": lambda W: trivial_family(W, "*"),
    "sym": sym_family,
    "cyc": cyc_family,
    "dihedral": dihedral_family,
    "hyp": hyp_family,
    "refl": refl_family,
    "refsym": refsym_family,
    "weyl": weyl_family,
}

# sites on which each family is a crossed group
FAMILY_SITES = {
    "trivial": (SiteId.DELTA, SiteId.AUG_DELTA, SiteId.NABLA),
    "sym": (SiteId.DELTA, SiteId.AUG_DELTA, SiteId.NABLA),
    "cyc": (SiteId.DELTA, SiteId.AUG_DELTA),
    "dihedral": (SiteId.DELTA, SiteId.AUG_DELTA),
    "hyp": (SiteId.DELTA, SiteId.AUG_DELTA, SiteId.NABLA),
    "refl": (SiteId.DELTA, SiteId.AUG_DELTA, SiteId.NABLA),
    "refsym": (SiteId.DELTA, SiteId.AUG_DELTA, SiteId.NABLA),
    "weyl": (SiteId.DELTA, SiteId.AUG_DELTA, SiteId.NABLA),
}


def named_family(name: str, site, max_level: int) -> SubgroupFamily:
    site = SiteId.parse(site)
    if name not in FAMILY_BUILDERS:
        raise KeyError(f"unknown family {name!r}")
    return FAMILY_BUILDERS[name](weyl_table(site, max_level))


def family_table(name: str, site, max_level: int) -> CrossedGroupTable:
    site = SiteId.parse(site)
    if site not in FAMILY_SITES[name]:
        raise ValueError(f"{name} is not a crossed group on {site.value}")
    return named_family(name, site, max_level).as_table(f"{name}[{site.value}]")


# --- the canonical map and terminality ----------------------------------------


def _order_rank(site: SiteId, level: int) -> np.ndarray:
    """Position of each hom(s, level) index in the induced well-order."""
    S = Site(site)
    order = hom_order(site, level)
    rank = np.empty(len(order), dtype=np.int64)
    for pos, f in enumerate(order):
        rank[S.index(f)] = pos
    return rank


def canonical_map(G: CrossedGroupTable, a: int, x: int) -> CrossedElement:
    """The signed permutation that ``x`` induces on hom(s, a)."""
    site = G.site_id
    S = G.site
    s, sb = generator_level(site), corelation_level(site)
    points = hom_order(site, a)
    rank = _order_rank(site, a)
    r = refl_collapse(site)
    i0, i1 = corelation(site)
    rank_sb = _order_rank(site, sb)
    i0_idx, i1_idx = S.index(i0), S.index(i1)
    if s > G.max_level or sb > G.max_level:
        raise ValueError("truncation too low to see the co-relation")
    N = len(points)
    sigma = [0] * N
    signs = [1] * N
    act = G.action[(s, a)]
    for alpha in points:
        i = int(rank[S.index(alpha)])
        moved = int(act[x, S.index(alpha)])
        sigma[i] = int(rank[moved])
        y = int(G.restriction[(sb, a)][S.index(compose(alpha, r)), x])
        lo = rank_sb[int(G.action[(s, sb)][y, i0_idx])]
        hi = rank_sb[int(G.action[(s, sb)][y, i1_idx])]
        signs[i] = 1 if lo < hi else -1
    # carrier index order agrees with the well-order (checked in hom_order)
    return CrossedElement(site, a, tuple(sigma), tuple(signs))


def canonical_crossed_map(G: CrossedGroupTable, W: CrossedGroupTable | None = None) -> CrossedGroupMap:
    if W is None:
        W = weyl_table(G.site_id, G.max_level)
    maps = []
    for a in G.levels:
        maps.append(np.array([_element_index(W, a, *_astuple(canonical_map(G, a, x)))
                              for x in range(G.sizes[a])], dtype=np.int64))
    return CrossedGroupMap(G, W, maps)


def _astuple(e: CrossedElement):
    return e.sigma, e.signs


def _generators(group: LevelGroup) -> list[int]:
    from .crossed_core import close_subgroup
    gens: list[int] = []
    cur = close_subgroup(group, [])
    for x in range(group.order):
        if len(cur) == group.order:
            break
        if x not in set(cur.tolist()):
            gens.append(x)
            cur = close_subgroup(group, gens)
    return gens


def _extend_hom(src: LevelGroup, dst: LevelGroup, gens, images) -> np.ndarray | None:
    f = np.full(src.order, -1, dtype=np.int64)
    f[src.unit] = dst.unit
    queue = [src.unit]
    while queue:
        g = queue.pop()
        for s, t in zip(gens, images):
            h = int(src.mul[g, s])
            v = int(dst.mul[f[g], t])
            if f[h] < 0:
                f[h] = v
                queue.append(h)
            elif f[h] != v:
                return None
    return f


def terminality_check(G: CrossedGroupTable, W: CrossedGroupTable | None = None):
    """All crossed-group maps ``G -> W`` found by exhaustive search.

    Returns ``(unique, maps, canonical)``. Candidates at level ``a`` are
    homomorphisms whose images induce the same permutation of hom(s, a) as
    ``x`` (forced by action compatibility); they are then filtered by action
    compatibility on every hom-set and matched across levels by naturality.
    """
    if W is None:
        W = weyl_table(G.site_id, G.max_level)
    s = generator_level(G.site_id)
    per_level = []
    for a in G.levels:
        src, dst = G.groups[a], W.groups[a]
        gens = _generators(src)
        choices = []
        for g in gens:
            want = G.action[(s, a)][g] if s <= G.max_level else None
            cand = [w for w in range(dst.order)
                    if want is None or np.array_equal(W.action[(s, a)][w], want)]
            choices.append(cand)
        homs = []
        for imgs in itertools.product(*choices):
            f = _extend_hom(src, dst, gens, imgs)
            if f is None:
                continue
            if all(np.array_equal(G.action[(b, a)], W.action[(b, a)][f]) for b in G.levels):
                homs.append(f)
        per_level.append(homs)
    found = []

    def search(a, chosen):
        if a > G.max_level:
            found.append(list(chosen))
            return
        for f in per_level[a]:
            ok = True
            for b in range(a + 1):
                fb = f if b == a else chosen[b]
                if not np.array_equal(fb[G.restriction[(b, a)]], W.restriction[(b, a)][:, f]):
                    ok = False
                    break
                if b < a and not np.array_equal(f[G.restriction[(a, b)]], W.restriction[(a, b)][:, fb]):
                    ok = False
                    break
            if ok:
                chosen.append(f)
                search(a + 1, chosen)
                chosen.pop()

    search(0, [])
    canon = canonical_crossed_map(G, W)
    maps = [CrossedGroupMap(G, W, fs) for fs in found]
    unique = len(maps) == 1 and all(np.array_equal(u, v) for u, v in zip(maps[0].maps, canon.maps))
    return unique, maps, canon
