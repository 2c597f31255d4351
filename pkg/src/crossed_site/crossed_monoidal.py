"""The semidirect monoidal product over a crossed group, and crossed monoids.

A sliced object is a presheaf ``X`` with a presheaf map ``p: X -> G``; each
element acts on hom-sets through its image, ``phi^x := phi^{p(x)}``.
Elements of ``X (x) Y`` at a level are pairs indexed ``x * |Y(a)| + y``; this
indexing makes the product strictly associative on the nose.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .crossed_core import ASet, CrossedGroupMap, CrossedGroupTable, LevelGroup, terminal_aset
from .finite_site import SiteMorphism, compose


class CapOverflow(ArithmeticError):
    """A word product would exceed the length cap."""


class SlicedObject:
    def __init__(self, aset: ASet, G: CrossedGroupTable, p, name: str = ""):
        if aset.site_id is not G.site_id or aset.max_level != G.max_level:
            raise ValueError("presheaf and crossed group must share site and truncation")
        self.aset = aset
        self.G = G
        self.p = [np.asarray(v, dtype=np.int64) for v in p]
        self.name = name
        if len(self.p) != G.max_level + 1:
            raise ValueError("one structure map per level expected")
        for a in G.levels:
            if len(self.p[a]) != aset.sizes[a]:
                raise ValueError(f"structure map has the wrong length at level {a}")

    @property
    def site(self):
        return self.aset.site

    @property
    def levels(self):
        return self.aset.levels

    @property
    def sizes(self):
        return self.aset.sizes

    def restrict(self, phi: SiteMorphism, x: int) -> int:
        return self.aset.restrict(phi, x)

    def act_index(self, b: int, a: int, x: int, phi_idx: int) -> int:
        return int(self.G.action[(b, a)][self.p[a][x], phi_idx])

    def action_table(self, b: int, a: int) -> np.ndarray:
        """``T[x, phi]`` = index of ``phi^x``."""
        return self.G.action[(b, a)][self.p[a]]

    def structure_violations(self) -> list[tuple]:
        out = []
        for a in self.levels:
            for b in self.levels:
                lhs = self.p[b][self.aset.restriction[(b, a)]]
                rhs = self.G.restriction[(b, a)][:, self.p[a]]
                for ph, x in np.argwhere(lhs != rhs)[:5]:
                    out.append((b, a, int(ph), int(x)))
        return out

    def crs(self, b: int, a: int) -> tuple[np.ndarray, np.ndarray]:
        """``(x, phi) -> (phi^x, phi*(x))`` as two tables indexed ``[x, phi]``."""
        return self.action_table(b, a), self.aset.restriction[(b, a)].T

    def same_tables(self, other: SlicedObject) -> bool:
        return (self.aset.is_isomorphic_by_identity(other.aset)
                and all(np.array_equal(u, v) for u, v in zip(self.p, other.p)))


def unit_object(G: CrossedGroupTable) -> SlicedObject:
    """The terminal presheaf over ``G`` (structure map onto the units)."""
    T = terminal_aset(G.site, G.max_level)
    return SlicedObject(T, G, [[g.unit] for g in G.groups], "*")


def group_as_sliced(H: CrossedGroupTable, f: CrossedGroupMap | None = None, G=None) -> SlicedObject:
    """``H`` sliced over ``G`` via ``f`` (identity when ``f`` is None)."""
    if f is None:
        return SlicedObject(H, H, [np.arange(m) for m in H.sizes], H.name)
    return SlicedObject(H, f.target, f.maps, H.name)


def representable_sliced(G: CrossedGroupTable, level: int, g: int) -> SlicedObject:
    """``A[level]`` over ``G`` with the structure map ``alpha -> alpha*(g)``."""
    from .crossed_core import representable
    R = representable(G.site, level, G.max_level)
    p = [G.restriction[(b, level)][:, g] for b in G.levels]
    return SlicedObject(R, G, p, f"A[{level}]")


def reslice(X: SlicedObject, g: CrossedGroupMap) -> SlicedObject:
    """Push ``X`` forward along a crossed-group map out of its base."""
    return SlicedObject(X.aset, g.target, [g.maps[a][X.p[a]] for a in X.levels], X.name)


def semidirect(K: ASet, X: SlicedObject) -> ASet:
    """``K x| X``: pairs ``(k, x)`` restricting to ``((phi^x)*(k), phi*(x))``."""
    if K.site_id is not X.aset.site_id or K.max_level != X.aset.max_level:
        raise ValueError("level mismatch")
    sizes = [K.sizes[a] * X.sizes[a] for a in X.levels]
    restr = {}
    for a in X.levels:
        nk, nx = K.sizes[a], X.sizes[a]
        for b in X.levels:
            act = X.action_table(b, a)  # (nx, P)
            rK = K.restriction[(b, a)]  # (P, nk)
            rX = X.aset.restriction[(b, a)]  # (P, nx)
            P = rX.shape[0]
            # tab[phi, k, x] = rK[act[x, phi], k] * |X(b)| + rX[phi, x]
            twisted = rK[act.T]  # (P, nx, nk)
            tab = twisted.transpose(0, 2, 1) * X.sizes[b] + rX[:, None, :]
            restr[(b, a)] = np.ascontiguousarray(tab.reshape(P, nk * nx), dtype=np.int32)
    labels = [[(k, x) for k in range(K.sizes[a]) for x in range(X.sizes[a])] for a in X.levels]
    return ASet(K.site, K.max_level, sizes, restr, labels)


def rtimes(X: SlicedObject, Y: SlicedObject) -> SlicedObject:
    """``X x|_G Y`` with structure map ``(x, y) -> p(x) q(y)``."""
    if X.G is not Y.G and not X.G.same_tables(Y.G):
        raise ValueError("sliced objects over different crossed groups")
    U = semidirect(X.aset, Y)
    p = []
    for a in X.levels:
        mul = X.G.groups[a].mul
        p.append(mul[np.repeat(X.p[a], Y.sizes[a]), np.tile(Y.p[a], X.sizes[a])])
    return SlicedObject(U, X.G, p, f"({X.name} x| {Y.name})")


def triple_restriction(X, Y, Z, phi: SiteMorphism, x: int, y: int, z: int) -> tuple[int, int, int]:
    """``(((phi^z)^y)*(x), (phi^z)*(y), phi*(z))`` computed directly."""
    G = X.G
    S = G.site
    b, a = phi.dom, phi.cod
    f = S.index(phi)
    fz = Z.act_index(b, a, z, f)
    fzy = Y.act_index(b, a, y, fz)
    return (int(X.aset.restriction[(b, a)][fzy, x]),
            int(Y.aset.restriction[(b, a)][fz, y]),
            int(Z.aset.restriction[(b, a)][f, z]))


# --- crossed monoids ------------------------------------------------------------


class CrossedMonoidTable:
    """A monoid object in sliced presheaves: unit and multiplication per level."""

    def __init__(self, M: SlicedObject, units, muls, name: str = ""):
        self.M = M
        self.units = [int(u) for u in units]
        self.muls = [np.asarray(m, dtype=np.int64) for m in muls]
        self.name = name or M.name

    @property
    def G(self):
        return self.M.G

    @property
    def levels(self):
        return self.M.levels

    @property
    def sizes(self):
        return self.M.sizes

    def violations(self, limit: int = 20) -> list[dict]:
        out = []
        M, G = self.M, self.G
        for a in self.levels:
            m, e = self.muls[a], self.units[a]
            n = M.sizes[a]
            if not (np.array_equal(m[e], np.arange(n)) and np.array_equal(m[:, e], np.arange(n))):
                out.append({"kind": "unit", "level": a})
            for x in range(n):
                if not np.array_equal(m[m[x]], m[x][m]):
                    out.append({"kind": "associativity", "level": a, "x": x})
                    break
            pm = M.p[a]
            gm = G.groups[a].mul
            if not np.array_equal(pm[m], gm[np.ix_(pm, pm)]):
                out.append({"kind": "structure-not-multiplicative", "level": a})
            if pm[e] != G.groups[a].unit:
                out.append({"kind": "structure-unit", "level": a})
            for b in self.levels:
                R = M.aset.restriction[(b, a)]
                if R.shape[0] and not np.all(R[:, e] == self.units[b]):
                    out.append({"kind": "unit-not-natural", "dom": b, "cod": a})
                act = M.action_table(b, a)  # (n, P)
                # mu(phi*(x, y)) vs phi*(xy)
                for ph in range(R.shape[0]):
                    lhs = self.muls[b][R[act[:, ph]].T, R[ph][None, :]]
                    rhs = R[ph][m]
                    bad = np.argwhere(lhs != rhs)
                    for x, y in bad[:limit]:
                        out.append({"kind": "mul-not-natural", "phi": M.site.homs(b, a)[ph].to_json(),
                                    "x": int(x), "y": int(y)})
        return out

    def is_valid(self) -> bool:
        return not self.violations(1)


def crossed_group_as_monoid(H: CrossedGroupTable, f: CrossedGroupMap | None = None) -> CrossedMonoidTable:
    """``H`` as a monoid over the codomain of ``f`` (over itself by default)."""
    if f is not None and not f.is_valid():
        raise ValueError("structure map is not a crossed-group map")
    X = group_as_sliced(H, f)
    return CrossedMonoidTable(X, [g.unit for g in H.groups], [g.mul for g in H.groups], H.name)


def unit_monoid(G: CrossedGroupTable) -> CrossedMonoidTable:
    U = unit_object(G)
    return CrossedMonoidTable(U, [0] * (G.max_level + 1), [np.zeros((1, 1))] * (G.max_level + 1), "*")


def absorbing_padding(H: CrossedGroupTable, f: CrossedGroupMap | None = None) -> CrossedMonoidTable:
    """``H x {1, 0}``: the group with an absorbing flag; invertibles are ``H x {1}``.

    Index ``2 h + t`` with ``t = 0`` for the flag value 1 and ``t = 1`` for 0.
    """
    G = H if f is None else f.target
    base = [np.arange(m) for m in H.sizes] if f is None else f.maps
    sizes = [2 * m for m in H.sizes]
    restr = {(b, a): np.ascontiguousarray(
        (2 * H.restriction[(b, a)][:, :, None] + np.arange(2)[None, None, :]).reshape(-1, sizes[a]),
        dtype=np.int32) for a in H.levels for b in H.levels}
    aset = ASet(H.site, H.max_level, sizes, restr)
    p = [np.repeat(base[a], 2) for a in H.levels]
    X = SlicedObject(aset, G, p, f"{H.name} x {{1,0}}")
    muls = []
    for a in H.levels:
        hm = H.groups[a].mul
        t = np.array([[0, 1], [1, 1]])
        muls.append((2 * hm[:, None, :, None] + t[None, :, None, :]).reshape(sizes[a], sizes[a]))
    return CrossedMonoidTable(X, [2 * g.unit for g in H.groups], muls, X.name)


def invertibles(Mon: CrossedMonoidTable) -> tuple[CrossedGroupTable, list[np.ndarray]]:
    """Levelwise unit groups, with their element indices in ``Mon``."""
    M = Mon.M
    members = []
    for a in Mon.levels:
        m, e = Mon.muls[a], Mon.units[a]
        inv_l = (m == e)
        two = inv_l & inv_l.T
        members.append(np.flatnonzero(two.any(axis=1)))
    pos = []
    for a, mem in enumerate(members):
        q = np.full(M.sizes[a], -1, dtype=np.int64)
        q[mem] = np.arange(len(mem))
        pos.append(q)
    groups, restr, act = [], {}, {}
    for a, mem in enumerate(members):
        groups.append(LevelGroup(pos[a][Mon.muls[a][np.ix_(mem, mem)]]))
    for a, mem in enumerate(members):
        for b in Mon.levels:
            r = pos[b][M.aset.restriction[(b, a)][:, mem]]
            if r.size and r.min() < 0:
                raise AssertionError("restriction leaves the invertible elements")
            restr[(b, a)] = np.ascontiguousarray(r, dtype=np.int32)
            act[(b, a)] = np.ascontiguousarray(M.action_table(b, a)[mem], dtype=np.int32)
    T = CrossedGroupTable(M.site, M.aset.max_level, groups, restr, act, name=f"units({Mon.name})")
    return T, members


def inverse_restriction_violations(Mon: CrossedMonoidTable) -> list[tuple]:
    """Failures of ``phi*(x)^-1 = (phi^x)*(x^-1)`` over invertible ``x``."""
    U, members = invertibles(Mon)
    out = []
    M = Mon.M
    for a, mem in enumerate(members):
        inv = U.groups[a].inv
        for b in Mon.levels:
            R = M.aset.restriction[(b, a)]
            act = M.action_table(b, a)
            for i, x in enumerate(mem):
                xi = mem[inv[i]]
                for ph in range(R.shape[0]):
                    lhs_el = R[ph, x]
                    rhs = R[act[x, ph], xi]
                    if Mon.muls[b][lhs_el, rhs] != Mon.units[b] or Mon.muls[b][rhs, lhs_el] != Mon.units[b]:
                        out.append((b, a, ph, int(x)))
    return out


# --- free crossed monoids ---------------------------------------------------------


@dataclass(frozen=True)
class Word:
    level: int
    letters: tuple[int, ...]

    def to_json(self) -> dict:
        return {"letters": [{"level": self.level, "index": int(x)} for x in self.letters]}


class FreeCrossedMonoid:
    """Words over ``X`` of length at most ``length_cap``.

    ``phi*(x_1 ... x_n)`` has ``k``-th letter ``(phi^{p(x_{k+1}) ... p(x_n)})*(x_k)``.
    """

    def __init__(self, X: SlicedObject, length_cap: int):
        if length_cap < 1:
            raise ValueError("length_cap must be at least 1")
        self.X = X
        self.cap = length_cap

    @property
    def G(self):
        return self.X.G

    def unit(self, a: int) -> Word:
        return Word(a, ())

    def words(self, a: int, max_length: int | None = None) -> list[Word]:
        L = self.cap if max_length is None else max_length
        n = self.X.sizes[a]
        return [Word(a, w) for k in range(L + 1) for w in itertools.product(range(n), repeat=k)]

    def count(self, a: int) -> int:
        return len(self.words(a))

    def mul(self, u: Word, v: Word) -> Word:
        if u.level != v.level:
            raise ValueError("level mismatch")
        if len(u.letters) + len(v.letters) > self.cap:
            raise CapOverflow(f"product has length {len(u.letters) + len(v.letters)} > {self.cap}")
        return Word(u.level, u.letters + v.letters)

    def structure(self, w: Word) -> int:
        grp = self.G.groups[w.level]
        g = grp.unit
        for x in w.letters:
            g = int(grp.mul[g, self.X.p[w.level][x]])
        return g

    def restrict(self, phi: SiteMorphism, w: Word) -> Word:
        if phi.cod != w.level:
            raise ValueError("level mismatch")
        b, a = phi.dom, phi.cod
        S = self.X.site
        f = S.index(phi)
        out = []
        R = self.X.aset.restriction[(b, a)]
        for x in reversed(w.letters):
            out.append(int(R[f, x]))
            f = self.X.act_index(b, a, x, f)
        return Word(b, tuple(reversed(out)))

    def act(self, w: Word, phi: SiteMorphism) -> SiteMorphism:
        S = self.X.site
        return S.homs(phi.dom, phi.cod)[int(self.G.action[(phi.dom, phi.cod)][self.structure(w), S.index(phi)])]

    def extend(self, f, Mon: CrossedMonoidTable):
        """The word map ``x_1..x_n -> f(x_1)...f(x_n)`` for per-level maps ``f: X -> M``."""
        def ext(w: Word) -> int:
            m = Mon.muls[w.level]
            acc = Mon.units[w.level]
            for x in w.letters:
                acc = int(m[acc, f[w.level][x]])
            return acc
        return ext


def free_crossed_monoid(X: SlicedObject, length_cap: int) -> FreeCrossedMonoid:
    return FreeCrossedMonoid(X, length_cap)


# --- law checks -----------------------------------------------------------------


def associativity_holds(X: SlicedObject, Y: SlicedObject, Z: SlicedObject) -> bool:
    """Both bracketings agree as tables and with the direct triple formula."""
    left = rtimes(rtimes(X, Y), Z)
    right = rtimes(X, rtimes(Y, Z))
    if not left.same_tables(right):
        return False
    S = X.site
    for a in X.levels:
        ny, nz = Y.sizes[a], Z.sizes[a]
        for b in X.levels:
            R = left.aset.restriction[(b, a)]
            my, mz = Y.sizes[b], Z.sizes[b]
            for f, phi in enumerate(S.homs(b, a)):
                for x, y, z in itertools.product(range(X.sizes[a]), range(ny), range(nz)):
                    u, v, w = triple_restriction(X, Y, Z, phi, x, y, z)
                    if R[f, (x * ny + y) * nz + z] != (u * my + v) * mz + w:
                        return False
    return True


def unit_laws_hold(X: SlicedObject) -> bool:
    U = unit_object(X.G)
    return rtimes(U, X).same_tables(X) and rtimes(X, U).same_tables(X)


def free_monoid_violations(F: FreeCrossedMonoid, max_length: int | None = None, limit: int = 20) -> list[dict]:
    """Functoriality of word restriction and ``phi*(uv) = (phi^v)*(u) phi*(v)``."""
    L = F.cap if max_length is None else max_length
    S = F.X.site
    out = []
    for a in F.X.levels:
        words = F.words(a, L)
        for b in F.X.levels:
            for phi in S.homs(b, a):
                for w in words:
                    r = F.restrict(phi, w)
                    if F.structure(r) != int(F.G.restriction[(b, a)][S.index(phi), F.structure(w)]):
                        out.append({"kind": "structure", "phi": phi.to_json(), "word": list(w.letters)})
                    for c in F.X.levels:
                        for psi in S.homs(c, b):
                            if F.restrict(psi, r) != F.restrict(compose(phi, psi), w):
                                out.append({"kind": "functor", "word": list(w.letters)})
                    for k in range(len(w.letters) + 1):
                        u, v = Word(a, w.letters[:k]), Word(a, w.letters[k:])
                        lhs = F.mul(F.restrict(F.act(v, phi), u), F.restrict(phi, v))
                        if lhs != r:
                            out.append({"kind": "product", "phi": phi.to_json(), "word": list(w.letters)})
                    if len(out) >= limit:
                        return out
    return out
