"""Degree-truncated crossed groups as explicit tables.

Conventions used throughout:

* ``restriction[(b, a)][phi, x]`` is ``phi*(x)`` for ``phi: b -> a`` (an index
  into ``Site.homs(b, a)``) and ``x`` an element index of level ``a``.
* ``action[(b, a)][x, phi]`` is the index of ``phi^x`` in the same hom-set.
* ``mul[x, y]`` is the product ``x y``.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .finite_site import Site, SiteId, SiteMorphism, compose

# --- plain presheaves -------------------------------------------------------


class ASet:
    """A presheaf on a site, truncated to levels ``0..max_level``."""

    def __init__(self, site, max_level: int, sizes, restriction: dict, labels=None):
        self.site = site if isinstance(site, Site) else Site(site)
        self.max_level = int(max_level)
        self.sizes = [int(s) for s in sizes]
        if len(self.sizes) != self.max_level + 1:
            raise ValueError("one size per level expected")
        self.restriction = restriction
        self.labels = labels
        for b in self.levels:
            for a in self.levels:
                tab = restriction.get((b, a))
                shape = (self.site.hom_count(b, a), self.sizes[a])
                if tab is None or tab.shape != shape:
                    raise ValueError(f"restriction table for {b}->{a} missing or malformed")

    @property
    def levels(self) -> range:
        return range(self.max_level + 1)

    @property
    def site_id(self) -> SiteId:
        return self.site.id

    def restrict(self, phi: SiteMorphism, x: int) -> int:
        return int(self.restriction[(phi.dom, phi.cod)][self.site.index(phi), x])

    def presheaf_violations(self, limit: int = 20) -> list[dict]:
        out = []
        for a in self.levels:
            ident = self.restriction[(a, a)][self.site.identity_index(a)]
            bad = np.flatnonzero(ident != np.arange(self.sizes[a]))
            for x in bad[:limit]:
                out.append({"kind": "presheaf-identity", "level": a, "x": int(x)})
        for c, b, a in itertools.product(self.levels, repeat=3):
            comp = self.site.compose_table(c, b, a)
            if comp.size == 0 or self.sizes[a] == 0:
                continue
            count, viol = kernels.presheaf_check(
                _c32(comp), _c32(self.restriction[(c, a)]),
                _c32(self.restriction[(b, a)]), _c32(self.restriction[(c, b)]), limit)
            for s, f, x in viol:
                out.append({
                    "kind": "presheaf-composition",
                    "psi": self.site.homs(b, a)[s].to_json(),
                    "phi": self.site.homs(c, b)[f].to_json(),
                    "x": int(x),
                })
        return out

    def is_isomorphic_by_identity(self, other: ASet) -> bool:
        """Equality of the underlying tables (same site, sizes and entries)."""
        if self.site.id is not other.site.id or self.sizes != other.sizes:
            return False
        return all(np.array_equal(self.restriction[k], other.restriction[k]) for k in self.restriction)


def _c32(arr) -> np.ndarray:
    return np.ascontiguousarray(arr, dtype=np.int32)


def terminal_aset(site, max_level: int) -> ASet:
    site = site if isinstance(site, Site) else Site(site)
    restr = {(b, a): np.zeros((site.hom_count(b, a), 1), np.int32)
             for b in range(max_level + 1) for a in range(max_level + 1)}
    return ASet(site, max_level, [1] * (max_level + 1), restr)


def representable(site, level: int, max_level: int) -> ASet:
    """The presheaf ``hom(-, level)``; element indices are hom-set indices."""
    site = site if isinstance(site, Site) else Site(site)
    sizes = [site.hom_count(b, level) for b in range(max_level + 1)]
    restr = {}
    for b in range(max_level + 1):
        for a in range(max_level + 1):
            # phi: b -> a, alpha: a -> level  |->  alpha o phi
            restr[(b, a)] = np.ascontiguousarray(site.compose_table(b, a, level).T, dtype=np.int32)
    labels = [site.homs(b, level) for b in range(max_level + 1)]
    return ASet(site, max_level, sizes, restr, labels)


# --- finite groups ----------------------------------------------------------


class LevelGroup:
    """A finite group given by a dense multiplication table."""

    def __init__(self, mul: np.ndarray):
        mul = np.ascontiguousarray(mul, dtype=np.int32)
        m = mul.shape[0]
        if mul.shape != (m, m):
            raise ValueError("multiplication table must be square")
        self.mul = mul
        ar = np.arange(m)
        units = [e for e in range(m) if np.array_equal(mul[e], ar) and np.array_equal(mul[:, e], ar)]
        if len(units) != 1:
            raise ValueError("table has no two-sided unit")
        self.unit = units[0]
        inv = np.full(m, -1, dtype=np.int32)
        rows, cols = np.nonzero(mul == self.unit)
        inv[rows] = cols
        if np.any(inv < 0) or not np.array_equal(mul[inv, ar], np.full(m, self.unit)):
            raise ValueError("table has non-invertible elements")
        self.inv = inv
        self._mul_t = None

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    @property
    def mul_t(self) -> np.ndarray:
        if self._mul_t is None:
            self._mul_t = np.ascontiguousarray(self.mul.T)
        return self._mul_t

    def is_associative(self) -> bool:
        return _assoc(self.mul)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    @classmethod
    def trivial(cls) -> LevelGroup:
        return cls(np.zeros((1, 1), dtype=np.int32))


def _assoc(m: np.ndarray) -> bool:
    n = m.shape[0]
    for x in range(n):
        # (x y) z vs x (y z) for all y, z
        if not np.array_equal(m[m[x]], m[x][m]):
            return False
    return True


def close_subgroup(group: LevelGroup, gens) -> np.ndarray:
    """Sorted element indices of the subgroup generated by ``gens``."""
    cur = np.unique(np.concatenate([np.asarray(list(gens), dtype=np.int64).ravel(), [group.unit]]))
    while True:
        nxt = np.unique(group.mul[np.ix_(cur, cur)])
        if len(nxt) == len(cur):
            return cur
        cur = nxt


# --- crossed groups ---------------------------------------------------------


class CrossedGroupTable(ASet):
    """A crossed group truncated at ``max_level``.

    ``signed`` optionally carries per level ``(perms, signs)`` arrays when the
    elements are signed permutations of hom(s, a) (Weyl-type families).
    """

    def __init__(self, site, max_level, groups, restriction, action, labels=None,
                 signed=None, name: str = ""):
        sizes = [g.order for g in groups]
        super().__init__(site, max_level, sizes, restriction, labels)
        self.groups = list(groups)
        self.action = action
        self.signed = signed
        self.name = name
        for b in self.levels:
            for a in self.levels:
                tab = action.get((b, a))
                if tab is None or tab.shape != (sizes[a], self.site.hom_count(b, a)):
                    raise ValueError(f"action table for {b}->{a} missing or malformed")

    def __repr__(self):
        return f"<CrossedGroupTable {self.name or '?'} {self.site_id.value} orders={self.orders}>"

    @property
    def orders(self) -> list[int]:
        return [g.order for g in self.groups]

    def unit(self, a: int) -> int:
        return self.groups[a].unit

    def mul(self, a: int, x: int, y: int) -> int:
        return int(self.groups[a].mul[x, y])

    def act(self, x: int, phi: SiteMorphism) -> SiteMorphism:
        idx = int(self.action[(phi.dom, phi.cod)][x, self.site.index(phi)])
        return self.site.homs(phi.dom, phi.cod)[idx]

    def keys(self, a: int) -> np.ndarray | None:
        if self.signed is None:
            return None
        return kernels.signed_keys(*self.signed[a])

    def truncate(self, max_level: int) -> CrossedGroupTable:
        lv = range(max_level + 1)
        return CrossedGroupTable(
            self.site, max_level, self.groups[: max_level + 1],
            {(b, a): self.restriction[(b, a)] for b in lv for a in lv},
            {(b, a): self.action[(b, a)] for b in lv for a in lv},
            None if self.labels is None else self.labels[: max_level + 1],
            None if self.signed is None else self.signed[: max_level + 1],
            self.name)

    def same_tables(self, other: CrossedGroupTable) -> bool:
        """Exact equality of groups, restriction and action tables."""
        if not self.is_isomorphic_by_identity(other):
            return False
        if any(not np.array_equal(g.mul, h.mul) for g, h in zip(self.groups, other.groups)):
            return False
        return all(np.array_equal(self.action[k], other.action[k]) for k in self.action)

    def to_json(self) -> dict:
        levels = [{"n": a, "order": g.order, "mul": g.mul.tolist()} for a, g in enumerate(self.groups)]
        restr = [{"dom": b, "cod": a, "table": self.restriction[(b, a)].tolist()}
                 for a in self.levels for b in self.levels]
        act = [{"dom": b, "cod": a, "table": self.action[(b, a)].tolist()}
               for a in self.levels for b in self.levels]
        return {"site": self.site_id.value, "max_level": self.max_level, "levels": levels, "name": self.name,
                "restriction": restr, "action": act}


def table_from_json(obj: dict) -> CrossedGroupTable:
    """Inverse of :meth:`CrossedGroupTable.to_json`."""
    site = Site(SiteId.parse(obj["site"]))
    L = int(obj["max_level"])
    groups = [LevelGroup(np.array(lv["mul"], dtype=np.int32).reshape(lv["order"], lv["order"]))
              for lv in sorted(obj["levels"], key=lambda v: v["n"])]
    restr, act = {}, {}
    for entry, out, rows in ((obj["restriction"], restr, "hom"), (obj["action"], act, "order")):
        for e in entry:
            b, a = int(e["dom"]), int(e["cod"])
            shape = ((site.hom_count(b, a), groups[a].order) if rows == "hom"
                     else (groups[a].order, site.hom_count(b, a)))
            out[(b, a)] = np.array(e["table"], dtype=np.int32).reshape(shape)
    return CrossedGroupTable(site, L, groups, restr, act, name=obj.get("name", ""))


def trivial_crossed_group(site, max_level: int) -> CrossedGroupTable:
    site = site if isinstance(site, Site) else Site(site)
    lv = range(max_level + 1)
    restr = {(b, a): np.zeros((site.hom_count(b, a), 1), np.int32) for b in lv for a in lv}
    act = {(b, a): np.arange(site.hom_count(b, a), dtype=np.int32)[None, :] for b in lv for a in lv}
    return CrossedGroupTable(site, max_level, [LevelGroup.trivial() for _ in lv], restr, act,
                             name="trivial")


# --- verification -----------------------------------------------------------


@dataclass
class VerificationReport:
    passed: bool
    checked: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checked": dict(sorted(self.checked.items())),
                "violations": self.violations}


def _matches_representation(G: CrossedGroupTable, a: int) -> bool:
    perms, signs = (np.asarray(v) for v in G.signed[a])
    keys = kernels.signed_keys(perms, signs)
    if len(np.unique(keys)) != len(keys):
        return False
    mul = G.groups[a].mul
    for x in range(len(perms)):
        prod = np.ascontiguousarray(perms[x][perms])
        sg = np.ascontiguousarray(signs[x][perms] * signs)
        if not np.array_equal(kernels.signed_keys(prod, sg), keys[mul[x]]):
            return False
    return True


def verify_crossed_axioms(G: CrossedGroupTable, limit: int = 20) -> VerificationReport:
    """Exhaustive check of the presheaf, action, CGi, CGii laws and their consequences.

    Consequences checked: identities fixed by the action, injective and
    surjective maps stay so under the action, units restrict to units.
    """
    site = G.site
    viol: list[dict] = []
    checked: dict[str, int] = {}

    def bump(name, n):
        checked[name] = checked.get(name, 0) + int(n)

    for a in G.levels:
        m = G.sizes[a]
        bump("group", m)
        if m <= 400:
            if not _assoc(G.groups[a].mul):
                viol.append({"kind": "group-associativity", "level": a})
        elif G.signed is not None:
            # a faithful signed-permutation representation makes the table associative
            if not _matches_representation(G, a):
                viol.append({"kind": "group-representation", "level": a})
        else:
            bump("group-associativity-skipped", 1)

    # presheaf laws
    pv = G.presheaf_violations(limit)
    viol.extend(pv)
    for c, b, a in itertools.product(G.levels, repeat=3):
        bump("presheaf", site.hom_count(b, a) * site.hom_count(c, b) * G.sizes[a])

    for b in G.levels:
        for a in G.levels:
            P = site.hom_count(b, a)
            act = G.action[(b, a)]
            restr = G.restriction[(b, a)]
            grp_a, grp_b = G.groups[a], G.groups[b]
            if P == 0:
                continue
            if act.min() < 0 or act.max() >= P:
                viol.append({"kind": "action-range", "dom": b, "cod": a})
                continue
            # unit acts trivially and restricts to the unit
            if not np.array_equal(act[grp_a.unit], np.arange(P)):
                viol.append({"kind": "action-unit", "dom": b, "cod": a})
            bad = np.flatnonzero(restr[:, grp_a.unit] != grp_b.unit)
            bump("unit-restriction", P)
            for p in bad[:limit]:
                viol.append({"kind": "unit-restriction", "phi": site.homs(b, a)[p].to_json()})
            # left action law
            count, vs = kernels.action_check(grp_a.mul, _c32(act), limit)
            bump("action", grp_a.order ** 2 * P)
            for p, x, y in vs:
                viol.append({"kind": "action-law", "phi": site.homs(b, a)[p].to_json(),
                             "x": int(x), "y": int(y), "level": a})
            # CGii
            count, vs = kernels.cgii_check(grp_a.mul_t, grp_b.mul_t, _c32(restr), _c32(act), limit)
            bump("cgii", grp_a.order ** 2 * P)
            for p, x, y in vs:
                viol.append({"kind": "CGii", "phi": site.homs(b, a)[p].to_json(),
                             "x": int(x), "y": int(y), "level": a})
            # derived facts on the action
            homs = site.homs(b, a)
            inj = np.array([f.is_injective() for f in homs])
            surj = np.array([f.is_surjective() for f in homs])
            bump("mono-epi", act.size)
            bad_inj = inj[None, :] & ~inj[act]
            bad_surj = surj[None, :] & ~surj[act]
            for x, p in np.argwhere(bad_inj)[:limit]:
                viol.append({"kind": "mono-not-preserved", "phi": homs[p].to_json(), "x": int(x)})
            for x, p in np.argwhere(bad_surj)[:limit]:
                viol.append({"kind": "epi-not-preserved", "phi": homs[p].to_json(), "x": int(x)})
            if a == b:
                idx = site.identity_index(a)
                bump("identity-fixed", G.sizes[a])
                for x in np.flatnonzero(act[:, idx] != idx)[:limit]:
                    viol.append({"kind": "identity-moved", "level": a, "x": int(x)})

    # CGi
    for c, b, a in itertools.product(G.levels, repeat=3):
        Ps, Pf = site.hom_count(b, a), site.hom_count(c, b)
        if Ps == 0 or Pf == 0:
            continue
        comp = site.compose_table(c, b, a)
        count, vs = kernels.cgi_check(
            _c32(comp), _c32(G.action[(c, a)]), _c32(G.action[(b, a)]),
            _c32(G.restriction[(b, a)]), _c32(G.action[(c, b)]), limit)
        bump("cgi", Ps * Pf * G.sizes[a])
        for s, f, x in vs:
            viol.append({"kind": "CGi", "psi": site.homs(b, a)[s].to_json(),
                         "phi": site.homs(c, b)[f].to_json(), "x": int(x), "level": a})
    return VerificationReport(passed=not viol, checked=checked, violations=viol)


# --- total category ---------------------------------------------------------


def total_compose(G: CrossedGroupTable, second: tuple, first: tuple) -> tuple:
    """``(psi, y) o (phi, x) = (psi o phi^y, phi*(y) x)``."""
    psi, y = second
    phi, x = first
    if phi.cod != psi.dom or phi.site is not psi.site or phi.site is not G.site_id:
        raise ValueError("morphisms are not composable")
    if not (0 <= y < G.sizes[psi.dom] and 0 <= x < G.sizes[phi.dom]):
        raise ValueError("element outside its level")
    phi_y = G.act(y, phi)
    return compose(psi, phi_y), G.mul(phi.dom, G.restrict(phi, y), x)


# --- maps -------------------------------------------------------------------


class CrossedGroupMap:
    def __init__(self, source: CrossedGroupTable, target: CrossedGroupTable, maps):
        if source.site_id is not target.site_id or source.max_level != target.max_level:
            raise ValueError("maps need a common site and truncation")
        self.source = source
        self.target = target
        self.maps = [np.asarray(m, dtype=np.int64) for m in maps]

    def __call__(self, a: int, x: int) -> int:
        return int(self.maps[a][x])

    def violations(self, limit: int = 20) -> list[dict]:
        S, T = self.source, self.target
        out = []
        for a in S.levels:
            f = self.maps[a]
            gs, gt = S.groups[a].mul, T.groups[a].mul
            bad = np.argwhere(f[gs] != gt[np.ix_(f, f)])
            for x, y in bad[:limit]:
                out.append({"kind": "not-homomorphic", "level": a, "x": int(x), "y": int(y)})
            for b in S.levels:
                lhs = self.maps[b][S.restriction[(b, a)]]
                rhs = T.restriction[(b, a)][:, f]
                for p, x in np.argwhere(lhs != rhs)[:limit]:
                    out.append({"kind": "not-natural", "phi": S.site.homs(b, a)[p].to_json(), "x": int(x)})
                bad = np.argwhere(S.action[(b, a)] != T.action[(b, a)][f])
                for x, p in bad[:limit]:
                    out.append({"kind": "action-mismatch", "phi": S.site.homs(b, a)[p].to_json(), "x": int(x)})
        return out

    def is_valid(self) -> bool:
        return not self.violations(1)


def identity_map(G: CrossedGroupTable) -> CrossedGroupMap:
    return CrossedGroupMap(G, G, [np.arange(m) for m in G.sizes])


def unit_map(G: CrossedGroupTable, trivial: CrossedGroupTable) -> CrossedGroupMap:
    return CrossedGroupMap(G, trivial, [np.zeros(m, dtype=np.int64) for m in G.sizes])


# --- subgroup families ------------------------------------------------------


class SubgroupFamily:
    """A levelwise subgroup of an ambient crossed group."""

    def __init__(self, ambient: CrossedGroupTable, members, name: str = ""):
        self.ambient = ambient
        self.members = tuple(tuple(sorted(int(v) for v in lv)) for lv in members)
        if len(self.members) != ambient.max_level + 1:
            raise ValueError("one member list per level expected")
        self.name = name

    def __eq__(self, other):
        return isinstance(other, SubgroupFamily) and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return f"<SubgroupFamily {self.name or '?'} orders={self.orders}>"

    @property
    def orders(self) -> list[int]:
        return [len(m) for m in self.members]

    def contains(self, a: int, x: int) -> bool:
        return int(x) in self._sets[a]

    @functools.cached_property
    def _sets(self):
        return [frozenset(m) for m in self.members]

    def __le__(self, other: SubgroupFamily) -> bool:
        return all(s <= t for s, t in zip(self._sets, other._sets))

    def is_subgroups(self) -> bool:
        for a, mem in enumerate(self.members):
            arr = np.array(mem, dtype=np.int64)
            g = self.ambient.groups[a]
            if g.unit not in self._sets[a]:
                return False
            if not set(np.unique(g.mul[np.ix_(arr, arr)]).tolist()) <= self._sets[a]:
                return False
        return True

    def closure_witness(self, levels=None):
        """A ``(phi, x)`` whose restriction leaves the family, or None."""
        G = self.ambient
        lv = G.levels if levels is None else levels
        for a in lv:
            arr = np.array(self.members[a], dtype=np.int64)
            for b in lv:
                res = G.restriction[(b, a)][:, arr]
                mask = np.zeros(G.sizes[b], dtype=bool)
                mask[list(self.members[b])] = True
                bad = np.argwhere(~mask[res])
                if len(bad):
                    p, i = bad[0]
                    return G.site.homs(b, a)[p], a, int(arr[i])
        return None

    def is_closed(self) -> bool:
        return self.closure_witness() is None

    def is_normal_in(self, other: SubgroupFamily) -> bool:
        for a in range(len(self.members)):
            g = self.ambient.groups[a]
            n = np.array(self.members[a], dtype=np.int64)
            for x in other.members[a]:
                conj = g.mul[g.mul[x, n], g.inv[x]]
                if not set(conj.tolist()) <= self._sets[a]:
                    return False
        return True

    def as_table(self, name: str | None = None) -> CrossedGroupTable:
        G = self.ambient
        pos = []
        for a, mem in enumerate(self.members):
            p = np.full(G.sizes[a], -1, dtype=np.int64)
            p[list(mem)] = np.arange(len(mem))
            pos.append(p)
        groups, restr, act = [], {}, {}
        for a, mem in enumerate(self.members):
            arr = np.array(mem, dtype=np.int64)
            groups.append(LevelGroup(pos[a][G.groups[a].mul[np.ix_(arr, arr)]]))
        for a, mem in enumerate(self.members):
            arr = np.array(mem, dtype=np.int64)
            for b in G.levels:
                r = pos[b][G.restriction[(b, a)][:, arr]]
                if r.size and r.min() < 0:
                    raise ValueError("family is not closed under restriction")
                restr[(b, a)] = np.ascontiguousarray(r, dtype=np.int32)
                act[(b, a)] = np.ascontiguousarray(G.action[(b, a)][arr], dtype=np.int32)
        signed = None
        if G.signed is not None:
            signed = [(G.signed[a][0][list(m)], G.signed[a][1][list(m)]) for a, m in enumerate(self.members)]
        return CrossedGroupTable(G.site, G.max_level, groups, restr, act, signed=signed,
                                 name=name or self.name)

    def inclusion(self) -> CrossedGroupMap:
        return CrossedGroupMap(self.as_table(), self.ambient, [np.array(m) for m in self.members])

    def intersect(self, other: SubgroupFamily) -> SubgroupFamily:
        return SubgroupFamily(self.ambient, [s & t for s, t in zip(self._sets, other._sets)])

    def join(self, other: SubgroupFamily) -> SubgroupFamily:
        gens = [(a, x) for fam in (self, other) for a, m in enumerate(fam.members) for x in m]
        return generated_subgroup(self.ambient, gens)


def whole_family(G: CrossedGroupTable, name: str = "") -> SubgroupFamily:
    return SubgroupFamily(G, [range(m) for m in G.sizes], name)


def trivial_family(G: CrossedGroupTable, name: str = "*") -> SubgroupFamily:
    return SubgroupFamily(G, [[g.unit] for g in G.groups], name)


def generated_subgroup(G: CrossedGroupTable, S, name: str = "") -> SubgroupFamily:
    """The smallest crossed subgroup containing the tagged elements ``S``.

    Level ``a`` is generated by all ``phi*(x)`` and ``phi*(x^-1)`` with
    ``phi: a -> a0`` and ``(a0, x)`` in ``S``.
    """
    by_level: dict[int, set[int]] = {}
    for a0, x in S:
        if not (0 <= a0 <= G.max_level and 0 <= x < G.sizes[a0]):
            raise ValueError(f"element {x} is not in level {a0}")
        by_level.setdefault(int(a0), set()).add(int(x))
    members = []
    for a in G.levels:
        gens = [np.array([G.groups[a].unit])]
        for a0, xs in by_level.items():
            xs = np.array(sorted(xs), dtype=np.int64)
            both = np.concatenate([xs, G.groups[a0].inv[xs]])
            gens.append(G.restriction[(a, a0)][:, both].ravel())
        members.append(close_subgroup(G.groups[a], np.concatenate(gens)))
    return SubgroupFamily(G, members, name)


# --- kernel, image, pullback ------------------------------------------------


def is_non_crossed(G: CrossedGroupTable) -> bool:
    for (b, a), act in G.action.items():
        if act.size and not np.all(act == np.arange(act.shape[1])[None, :]):
            return False
    return True


def image_kernel_factor(f: CrossedGroupMap) -> tuple[CrossedGroupTable, CrossedGroupTable]:
    S, T = f.source, f.target
    ker = SubgroupFamily(S, [np.flatnonzero(f.maps[a] == T.groups[a].unit) for a in S.levels], "ker")
    im = SubgroupFamily(T, [np.unique(f.maps[a]) for a in S.levels], "im")
    for a in S.levels:
        assert len(ker.members[a]) * len(im.members[a]) == S.sizes[a]
    kt, it = ker.as_table(), im.as_table()
    assert verify_crossed_axioms(it).passed, "image failed the crossed axioms"
    assert is_non_crossed(kt), "kernel acts nontrivially"
    return kt, it


def pullback(f: CrossedGroupMap, g: CrossedGroupMap) -> tuple[CrossedGroupTable, CrossedGroupMap, CrossedGroupMap]:
    """Levelwise fiber product with its two projections."""
    if f.target is not g.target and not f.target.same_tables(g.target):
        raise ValueError("codomain mismatch")
    A, B = f.source, g.source
    pairs = []
    for a in A.levels:
        fa, gb = f.maps[a], g.maps[a]
        pairs.append(np.array([(x, y) for x in range(A.sizes[a]) for y in range(B.sizes[a])
                               if fa[x] == gb[y]], dtype=np.int64).reshape(-1, 2))
    index = [{(int(x), int(y)): i for i, (x, y) in enumerate(p)} for p in pairs]
    groups, restr, act = [], {}, {}
    for a, p in enumerate(pairs):
        xs, ys = p[:, 0], p[:, 1]
        mx = A.groups[a].mul[np.ix_(xs, xs)]
        my = B.groups[a].mul[np.ix_(ys, ys)]
        mul = np.vectorize(lambda u, v, a=a: index[a][(u, v)])(mx, my) if len(p) else np.zeros((0, 0))
        groups.append(LevelGroup(np.asarray(mul, dtype=np.int32)))
    for a, p in enumerate(pairs):
        xs, ys = p[:, 0], p[:, 1]
        for b in A.levels:
            rx = A.restriction[(b, a)][:, xs]
            ry = B.restriction[(b, a)][:, ys]
            tab = np.empty(rx.shape, dtype=np.int32)
            for i in np.ndindex(rx.shape):
                tab[i] = index[b][(int(rx[i]), int(ry[i]))]
            restr[(b, a)] = tab
            ax = A.action[(b, a)][xs]
            ay = B.action[(b, a)][ys]
            if not np.array_equal(ax, ay):
                raise AssertionError("actions disagree on the fiber product")
            act[(b, a)] = np.ascontiguousarray(ax, dtype=np.int32)
    P = CrossedGroupTable(A.site, A.max_level, groups, restr, act, labels=[[tuple(r) for r in p] for p in pairs],
                          name="pullback")
    return P, CrossedGroupMap(P, A, [p[:, 0] for p in pairs]), CrossedGroupMap(P, B, [p[:, 1] for p in pairs])


# --- quotients --------------------------------------------------------------


class QuotientASet(ASet):
    """Cosets ``x N(a)`` with the induced restriction maps."""

    def __init__(self, G: CrossedGroupTable, N: SubgroupFamily, coset_of, reps, restriction):
        super().__init__(G.site, G.max_level, [len(r) for r in reps], restriction,
                         labels=[list(r) for r in reps])
        self.group = G
        self.normal = N
        self.coset_of = coset_of
        self.reps = reps

    def projection(self, a: int) -> np.ndarray:
        return self.coset_of[a]


class NotNormalError(ValueError):
    pass


def quotient_aset(G: CrossedGroupTable, N: SubgroupFamily) -> QuotientASet:
    if N.ambient is not G:
        raise ValueError("N must be a family inside G")
    full = whole_family(G)
    if not N.is_subgroups() or not N.is_closed():
        raise ValueError("N is not a crossed subgroup")
    if not N.is_normal_in(full):
        raise NotNormalError("N is not levelwise normal")
    coset_of, reps = [], []
    for a in G.levels:
        mul = G.groups[a].mul
        n = np.array(N.members[a], dtype=np.int64)
        cid = np.full(G.sizes[a], -1, dtype=np.int64)
        rep = []
        for x in range(G.sizes[a]):
            if cid[x] < 0:
                cid[mul[x, n]] = len(rep)
                rep.append(x)
        coset_of.append(cid)
        reps.append(np.array(rep, dtype=np.int64))
    restr = {}
    for a in G.levels:
        n = np.array(N.members[a], dtype=np.int64)
        mul = G.groups[a].mul
        for b in G.levels:
            R = G.restriction[(b, a)]
            tab = coset_of[b][R[:, reps[a]]]
            # independence of representative: phi*(x u) lies in phi*(x) N(b)
            for u in n:
                moved = coset_of[b][R[:, mul[reps[a], u]]]
                if not np.array_equal(moved, tab):
                    raise AssertionError("restriction depends on the coset representative")
            restr[(b, a)] = np.ascontiguousarray(tab, dtype=np.int32)
    return QuotientASet(G, N, coset_of, reps, restr)


# --- free products with amalgamation ----------------------------------------


class WordCapExceeded(ArithmeticError):
    """A product of reduced words would need more syllables than allowed."""


@dataclass(frozen=True)
class Syllable:
    factor: int  # 1 or 2
    element: int


@dataclass(frozen=True)
class ReducedWord:
    """Normal form ``t_1 ... t_k f(h)``: coset representatives then an H element."""

    level: int
    syllables: tuple[Syllable, ...]
    h: int

    def __len__(self):
        return len(self.syllables)


class FreeProduct:
    """The pushout ``G1 *_H G2`` of crossed groups, as capped reduced words.

    ``f1``/``f2`` give per level the index of the image of each element of H.
    The representative of a left coset ``g f_i(H)`` is its lowest element index.
    """

    def __init__(self, G1, H, G2, f1, f2, word_cap: int = 4):
        if not (G1.site_id is H.site_id is G2.site_id):
            raise ValueError("all three crossed groups must live on one site")
        self.G = {1: G1, 2: G2}
        self.H = H
        self.f = {1: [np.asarray(m, dtype=np.int64) for m in f1],
                  2: [np.asarray(m, dtype=np.int64) for m in f2]}
        self.word_cap = word_cap
        self.site = G1.site
        self.max_level = min(G1.max_level, H.max_level, G2.max_level)
        for i in (1, 2):
            for a in range(self.max_level + 1):
                if len(np.unique(self.f[i][a])) != H.sizes[a]:
                    raise ValueError("normal forms need injective amalgamation maps")
        self._rep = {}
        self._h_of = {}
        for i in (1, 2):
            for a in range(self.max_level + 1):
                mul = self.G[i].groups[a].mul
                img = self.f[i][a]
                rep = np.full(self.G[i].sizes[a], -1, dtype=np.int64)
                hpart = np.full(self.G[i].sizes[a], -1, dtype=np.int64)
                for g in range(self.G[i].sizes[a]):
                    if rep[g] < 0:
                        coset = mul[g, img]
                        rep[coset] = coset.min()
                rinv = self.G[i].groups[a].inv
                pos = {int(v): k for k, v in enumerate(img)}
                for g in range(self.G[i].sizes[a]):
                    hpart[g] = pos[int(mul[rinv[rep[g]], g])]
                self._rep[(i, a)] = rep
                self._h_of[(i, a)] = hpart

    # -- construction
    def identity(self, a: int) -> ReducedWord:
        return ReducedWord(a, (), self.H.groups[a].unit)

    def inject(self, i: int, a: int, g: int) -> ReducedWord:
        return self.append(self.identity(a), Syllable(i, g))

    def from_syllables(self, a: int, syllables) -> ReducedWord:
        w = self.identity(a)
        for s in syllables:
            w = self.append(w, s)
        return w

    def append(self, w: ReducedWord, s: Syllable) -> ReducedWord:
        """Right multiplication by one syllable, keeping the normal form."""
        a, i = w.level, s.factor
        G = self.G[i].groups[a]
        y = int(G.mul[self.f[i][a][w.h], s.element])
        syl = list(w.syllables)
        if syl and syl[-1].factor == i:
            y = int(G.mul[syl[-1].element, y])
            syl.pop()
        t = int(self._rep[(i, a)][y])
        h = int(self._h_of[(i, a)][y])
        if t != self._rep[(i, a)][G.unit]:
            syl.append(Syllable(i, t))
        if len(syl) > self.word_cap:
            raise WordCapExceeded(f"word needs {len(syl)} syllables, cap is {self.word_cap}")
        return ReducedWord(a, tuple(syl), h)

    def mul(self, u: ReducedWord, v: ReducedWord) -> ReducedWord:
        if u.level != v.level:
            raise ValueError("level mismatch")
        w = u
        for s in self.as_syllables(v):
            w = self.append(w, s)
        return w

    def inverse(self, w: ReducedWord) -> ReducedWord:
        a = w.level
        syl = [Syllable(s.factor, int(self.G[s.factor].groups[a].inv[s.element]))
               for s in reversed(self.as_syllables(w))]
        return self.from_syllables(a, syl)

    def as_syllables(self, w: ReducedWord) -> list[Syllable]:
        """A syllable word evaluating to ``w`` (the H part merged into the last syllable)."""
        a = w.level
        syl = list(w.syllables)
        if w.h == self.H.groups[a].unit:
            return syl
        if syl:
            last = syl[-1]
            G = self.G[last.factor].groups[a]
            syl[-1] = Syllable(last.factor, int(G.mul[last.element, self.f[last.factor][a][w.h]]))
            return syl
        return [Syllable(1, int(self.f[1][a][w.h]))]

    # -- crossed structure, implemented on arbitrary syllable words
    def act_word(self, a: int, syllables, phi: SiteMorphism) -> SiteMorphism:
        """``phi^{x_1 ... x_n}``: innermost syllable acts first."""
        for s in reversed(list(syllables)):
            phi = self.G[s.factor].act(s.element, phi)
        return phi

    def restrict_word(self, phi: SiteMorphism, syllables) -> ReducedWord:
        """``phi*(x_1..x_n) = (phi^{x_n})*(x_1..x_{n-1}) phi*(x_n)``, unrolled."""
        syllables = list(syllables)
        b = phi.dom
        pieces = []
        cur = phi
        for s in reversed(syllables):
            pieces.append(Syllable(s.factor, self.G[s.factor].restrict(cur, s.element)))
            cur = self.G[s.factor].act(s.element, cur)
        return self.from_syllables(b, reversed(pieces))

    def restrict(self, phi: SiteMorphism, w: ReducedWord) -> ReducedWord:
        if phi.cod != w.level:
            raise ValueError("level mismatch")
        return self.restrict_word(phi, self.as_syllables(w))

    def act(self, w: ReducedWord, phi: SiteMorphism) -> SiteMorphism:
        return self.act_word(w.level, self.as_syllables(w), phi)

    def words(self, a: int, max_syllables: int | None = None) -> list[ReducedWord]:
        """All reduced words at level ``a`` with at most ``max_syllables`` syllables."""
        cap = self.word_cap if max_syllables is None else max_syllables
        reps = {i: sorted(set(self._rep[(i, a)].tolist()) - {int(self._rep[(i, a)][self.G[i].groups[a].unit])})
                for i in (1, 2)}
        out = []
        stack = [()]
        while stack:
            syl = stack.pop()
            for h in range(self.H.sizes[a]):
                out.append(ReducedWord(a, syl, h))
            if len(syl) < cap:
                for i in (1, 2):
                    if syl and syl[-1].factor == i:
                        continue
                    for t in reps[i]:
                        stack.append(syl + (Syllable(i, t),))
        return sorted(out, key=lambda w: (len(w), [(s.factor, s.element) for s in w.syllables], w.h))

    def injection(self, i: int, a: int) -> list[ReducedWord]:
        return [self.inject(i, a, g) for g in range(self.G[i].sizes[a])]


def free_product(G1, H, G2, f1, f2, word_cap: int = 4) -> FreeProduct:
    return FreeProduct(G1, H, G2, f1, f2, word_cap)


# --- non-crossed groups and products ---------------------------------------------


def noncrossed_table(site, max_level: int, groups, restriction, name: str = "") -> CrossedGroupTable:
    """A presheaf of groups with trivial actions on hom-sets."""
    site = site if isinstance(site, Site) else Site(site)
    lv = range(max_level + 1)
    act = {(b, a): np.tile(np.arange(site.hom_count(b, a), dtype=np.int32), (groups[a].order, 1))
           for b in lv for a in lv}
    restr = {k: np.ascontiguousarray(v, dtype=np.int32) for k, v in restriction.items()}
    return CrossedGroupTable(site, max_level, groups, restr, act, name=name)


def constant_table(site, max_level: int, group: LevelGroup, name: str = "") -> CrossedGroupTable:
    """The constant presheaf on ``group`` (every restriction the identity)."""
    site = site if isinstance(site, Site) else Site(site)
    lv = range(max_level + 1)
    m = group.order
    restr = {(b, a): np.tile(np.arange(m, dtype=np.int32), (site.hom_count(b, a), 1)) for b in lv for a in lv}
    return noncrossed_table(site, max_level, [group] * (max_level + 1), restr, name)


def cyclic_group(n: int) -> LevelGroup:
    r = np.arange(n)
    return LevelGroup((r[:, None] + r[None, :]) % n)


def product_with_noncrossed(G: CrossedGroupTable, K: CrossedGroupTable, name: str = "") -> CrossedGroupTable:
    """``G x K`` for a non-crossed ``K``; pairs indexed ``x * |K(a)| + y``, acting through ``x``."""
    if not is_non_crossed(K):
        raise ValueError("second factor must act trivially")
    if G.site_id is not K.site_id or G.max_level != K.max_level:
        raise ValueError("factors must share site and truncation")
    groups, restr, act = [], {}, {}
    for a in G.levels:
        gm, km = G.groups[a].mul.astype(np.int64), K.groups[a].mul.astype(np.int64)
        nk = K.sizes[a]
        mul = (gm[:, None, :, None] * nk + km[None, :, None, :]).reshape(G.sizes[a] * nk, -1)
        groups.append(LevelGroup(mul))
    for a in G.levels:
        for b in G.levels:
            rg, rk = G.restriction[(b, a)].astype(np.int64), K.restriction[(b, a)].astype(np.int64)
            tab = rg[:, :, None] * K.sizes[b] + rk[:, None, :]
            restr[(b, a)] = np.ascontiguousarray(tab.reshape(tab.shape[0], G.sizes[a] * K.sizes[a]), dtype=np.int32)
            act[(b, a)] = np.ascontiguousarray(np.repeat(G.action[(b, a)], K.sizes[a], axis=0))
    return CrossedGroupTable(G.site, G.max_level, groups, restr, act, name=name or f"{G.name} x {K.name}")


def projections(P: CrossedGroupTable, G: CrossedGroupTable, K: CrossedGroupTable):
    """The two projections out of :func:`product_with_noncrossed`, as index arrays."""
    return ([np.arange(P.sizes[a]) // K.sizes[a] for a in P.levels],
            [np.arange(P.sizes[a]) % K.sizes[a] for a in P.levels])


# --- natural maps between small presheaves ---------------------------------------


def natural_maps(X: ASet, Y: ASet, limit: int | None = None) -> list[list[np.ndarray]]:
    """Every natural transformation ``X -> Y`` by backtracking over elements."""
    if X.site_id is not Y.site_id or X.max_level != Y.max_level:
        raise ValueError("presheaves must share site and truncation")
    slots = [(a, x) for a in X.levels for x in range(X.sizes[a])]
    f = [np.full(X.sizes[a], -1, dtype=np.int64) for a in X.levels]
    out = []

    def consistent(a, x):
        for b in X.levels:
            RX, RY = X.restriction[(b, a)], Y.restriction[(b, a)]
            for ph in range(RX.shape[0]):
                fx = f[b][RX[ph, x]]
                if fx >= 0 and fx != RY[ph, f[a][x]]:
                    return False
            RX2, RY2 = X.restriction[(a, b)], Y.restriction[(a, b)]
            for ph in range(RX2.shape[0]):
                for z in np.flatnonzero(RX2[ph] == x):
                    if f[b][z] >= 0 and RY2[ph, f[b][z]] != f[a][x]:
                        return False
        return True

    def rec(i):
        if limit is not None and len(out) >= limit:
            return
        if i == len(slots):
            out.append([v.copy() for v in f])
            return
        a, x = slots[i]
        for y in range(Y.sizes[a]):
            f[a][x] = y
            if consistent(a, x):
                rec(i + 1)
        f[a][x] = -1

    rec(0)
    return out


def is_natural(X: ASet, Y: ASet, f) -> bool:
    return all(np.array_equal(f[b][X.restriction[(b, a)]], Y.restriction[(b, a)][:, f[a]])
               for a in X.levels for b in X.levels)
