"""Finite models of the sites Delta, augmented Delta and the interval category.

Every level object is a finite totally ordered carrier. Morphisms are stored
as maps between carrier *indices* (``images``); the point encoding used in
printed output and JSON is available through :attr:`SiteMorphism.values`.

Carrier indices by site::

    Delta      level n: points 0..n            -> indices 0..n
    AugDelta   level n: points 1..n            -> indices 0..n-1
    Nabla      level n: points -inf,1..n,inf   -> indices 0..n+1
"""
from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

NEG_INF = -math.inf
POS_INF = math.inf


class SiteId(enum.Enum):
    DELTA = "delta"
    AUG_DELTA = "aug-delta"
    NABLA = "nabla"

    @classmethod
    def parse(cls, text: str | SiteId) -> SiteId:
        if isinstance(text, SiteId):
            return text
        aliases = {
            "delta": cls.DELTA,
            "simplex": cls.DELTA,
            "aug-delta": cls.AUG_DELTA,
            "augdelta": cls.AUG_DELTA,
            "aug_delta": cls.AUG_DELTA,
            "nabla": cls.NABLA,
            "interval": cls.NABLA,
        }
        try:
            return aliases[text.lower()]
        except KeyError:
            raise ValueError(f"unknown site {text!r}") from None


def carrier_size(site: SiteId, n: int) -> int:
    if n < 0:
        raise ValueError("level must be non-negative")
    if site is SiteId.DELTA:
        return n + 1
    if site is SiteId.AUG_DELTA:
        return n
    return n + 2


def point_of(site: SiteId, n: int, index: int):
    """Carrier point for a carrier index."""
    size = carrier_size(site, n)
    if not 0 <= index < size:
        raise ValueError(f"index {index} outside carrier of level {n}")
    if site is SiteId.DELTA:
        return index
    if site is SiteId.AUG_DELTA:
        return index + 1
    if index == 0:
        return NEG_INF
    if index == size - 1:
        return POS_INF
    return index


def index_of(site: SiteId, n: int, point) -> int:
    """Carrier index of a carrier point (inverse of :func:`point_of`)."""
    size = carrier_size(site, n)
    if site is SiteId.NABLA:
        if point == NEG_INF or point == "-inf":
            return 0
        if point == POS_INF or point == "inf":
            return size - 1
        if isinstance(point, (int, np.integer)) and 1 <= point <= n:
            return int(point)
    elif isinstance(point, (int, np.integer)):
        idx = int(point) if site is SiteId.DELTA else int(point) - 1
        if 0 <= idx < size:
            return idx
    raise ValueError(f"point {point!r} not in the carrier of {site.value} level {n}")


def carrier(site: SiteId, n: int) -> tuple:
    return tuple(point_of(site, n, i) for i in range(carrier_size(site, n)))


@dataclass(frozen=True)
class LevelObject:
    site: SiteId
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("level must be non-negative")

    @property
    def size(self) -> int:
        return carrier_size(self.site, self.n)

    @property
    def carrier(self) -> tuple:
        return carrier(self.site, self.n)


class SiteError(ValueError):
    pass


@dataclass(frozen=True)
class SiteMorphism:
    """An order-preserving map ``dom -> cod`` stored on carrier indices."""

    site: SiteId
    dom: int
    cod: int
    images: tuple[int, ...]

    def __post_init__(self):
        m = carrier_size(self.site, self.dom)
        n = carrier_size(self.site, self.cod)
        imgs = self.images
        if len(imgs) != m:
            raise SiteError(f"expected {m} images, got {len(imgs)}")
        if any(not 0 <= v < n for v in imgs):
            raise SiteError(f"images {imgs} leave the codomain carrier")
        if any(imgs[i] > imgs[i + 1] for i in range(m - 1)):
            raise SiteError(f"images {imgs} are not weakly increasing")
        if self.site is SiteId.NABLA and (imgs[0] != 0 or imgs[-1] != n - 1):
            raise SiteError("interval maps must fix both endpoints")

    @classmethod
    def from_values(cls, site: SiteId, dom: int, cod: int, values) -> SiteMorphism:
        """Build from the point encoding (interior values only for Nabla)."""
        body = [index_of(site, cod, v) for v in values]
        if site is SiteId.NABLA:
            body = [0] + body + [carrier_size(site, cod) - 1]
        return cls(site, dom, cod, tuple(body))

    @classmethod
    def identity(cls, site: SiteId, n: int) -> SiteMorphism:
        return cls(site, n, n, tuple(range(carrier_size(site, n))))

    @property
    def values(self) -> tuple:
        pts = tuple(point_of(self.site, self.cod, i) for i in self.images)
        if self.site is SiteId.NABLA:
            return pts[1:-1]
        return pts

    def __call__(self, point):
        idx = index_of(self.site, self.dom, point)
        return point_of(self.site, self.cod, self.images[idx])

    def is_identity(self) -> bool:
        return self.dom == self.cod and self.images == tuple(range(len(self.images)))

    def is_injective(self) -> bool:
        return len(set(self.images)) == len(self.images)

    def is_surjective(self) -> bool:
        return len(set(self.images)) == carrier_size(self.site, self.cod)

    def fiber_sizes(self) -> tuple[int, ...]:
        sizes = [0] * carrier_size(self.site, self.cod)
        for v in self.images:
            sizes[v] += 1
        return tuple(sizes)

    def to_json(self) -> dict:
        vals = [_json_point(v) for v in self.values]
        return {"site": self.site.value, "dom": self.dom, "cod": self.cod, "values": vals}

    @classmethod
    def from_json(cls, obj: dict) -> SiteMorphism:
        site = SiteId.parse(obj["site"])
        return cls.from_values(site, int(obj["dom"]), int(obj["cod"]), obj["values"])

    def __repr__(self) -> str:
        vals = ",".join(str(_json_point(v)) for v in self.values)
        return f"<{self.site.value} {self.dom}->{self.cod} ({vals})>"


def _json_point(v):
    if v == NEG_INF:
        return "-inf"
    if v == POS_INF:
        return "inf"
    return int(v)


def compose(psi: SiteMorphism, phi: SiteMorphism) -> SiteMorphism:
    """``psi o phi`` (apply ``phi`` first)."""
    if psi.site is not phi.site:
        raise SiteError("cannot compose morphisms of different sites")
    if phi.cod != psi.dom:
        raise SiteError(f"codomain {phi.cod} does not match domain {psi.dom}")
    return SiteMorphism(psi.site, phi.dom, psi.cod, tuple(psi.images[i] for i in phi.images))


def fiber(phi: SiteMorphism, target_point) -> list:
    """Preimage of ``target_point`` listed in increasing carrier order."""
    t = index_of(phi.site, phi.cod, target_point)
    return [point_of(phi.site, phi.dom, i) for i, v in enumerate(phi.images) if v == t]


def _weak_sequences(length: int, top: int):
    return itertools.combinations_with_replacement(range(top), length)


@functools.lru_cache(maxsize=None)
def _hom_images(site: SiteId, m: int, n: int) -> tuple[tuple[int, ...], ...]:
    size_m = carrier_size(site, m)
    size_n = carrier_size(site, n)
    if site is SiteId.NABLA:
        return tuple((0, *body, size_n - 1) for body in _weak_sequences(size_m - 2, size_n))
    if size_n == 0:
        return ((),) if size_m == 0 else ()
    return tuple(_weak_sequences(size_m, size_n))


def hom_set(site: SiteId, m: int, n: int) -> list[SiteMorphism]:
    """All morphisms ``m -> n`` in lexicographic order of their values."""
    site = SiteId.parse(site)
    if m < 0 or n < 0:
        raise ValueError("levels must be non-negative")
    return [SiteMorphism(site, m, n, imgs) for imgs in _hom_images(site, m, n)]


def hom_count(site: SiteId, m: int, n: int) -> int:
    return len(_hom_images(site, m, n))


# --- generator object, co-relation and the well-order on hom(s, a) ---------

def generator_level(site: SiteId) -> int:
    """The level of the generating object s."""
    return 0 if site is SiteId.DELTA else 1


def corelation_level(site: SiteId) -> int:
    """The level of the object s-bar carrying the two inclusions."""
    return generator_level(site) + 1


def corelation(site: SiteId) -> tuple[SiteMorphism, SiteMorphism]:
    """The pair iota0, iota1 : s -> s-bar."""
    s, sb = generator_level(site), corelation_level(site)
    homs = [f for f in hom_set(site, s, sb) if f.is_injective()]
    if site is SiteId.NABLA:
        homs = [f for f in homs if f.values[0] not in (NEG_INF, POS_INF)]
    if len(homs) != 2:
        raise AssertionError("co-relation should consist of exactly two maps")
    return homs[0], homs[1]


def refl_collapse(site: SiteId) -> SiteMorphism:
    """The common section s-bar -> s of the two inclusions."""
    s, sb = generator_level(site), corelation_level(site)
    i0, i1 = corelation(site)
    for f in hom_set(site, sb, s):
        if compose(f, i0).is_identity() and compose(f, i1).is_identity():
            return f
    raise AssertionError("no common section")


def refl(alpha: SiteMorphism) -> SiteMorphism:
    """``refl(alpha) = alpha o r`` where ``r`` is the common section."""
    return compose(alpha, refl_collapse(alpha.site))


def hom_order(site: SiteId, n: int) -> list[SiteMorphism]:
    """hom(s, n) sorted by the relation induced from the co-relation.

    ``alpha <= beta`` iff some ``gamma: s-bar -> n`` has ``gamma iota0 = alpha``
    and ``gamma iota1 = beta``. Raises if the relation is not a total order.
    """
    s, sb = generator_level(site), corelation_level(site)
    i0, i1 = corelation(site)
    points = hom_set(site, s, n)
    related = {(compose(g, i0), compose(g, i1)) for g in hom_set(site, sb, n)}
    for a in points:
        for b in points:
            if a != b and ((a, b) in related) == ((b, a) in related):
                raise AssertionError(f"{a} and {b} are not strictly comparable")
    key = functools.cmp_to_key(lambda a, b: 0 if a == b else (-1 if (a, b) in related else 1))
    return sorted(points, key=key)


# --- the functors j and the interval embedding ------------------------------

def j_level(k: int) -> int:
    return k + 1


def j_map(theta: SiteMorphism) -> SiteMorphism:
    """Delta -> AugDelta, ``[k] -> <k+1>``."""
    if theta.site is not SiteId.DELTA:
        raise SiteError("j is defined on Delta")
    return SiteMorphism(SiteId.AUG_DELTA, theta.dom + 1, theta.cod + 1, theta.images)


def j_preimage(mu: SiteMorphism) -> SiteMorphism | None:
    if mu.site is not SiteId.AUG_DELTA or mu.dom == 0:
        return None
    return SiteMorphism(SiteId.DELTA, mu.dom - 1, mu.cod - 1, mu.images)


def interval_map(mu: SiteMorphism) -> SiteMorphism:
    """AugDelta -> Nabla, ``<n> -> <<n>>`` adjoining fixed endpoints."""
    if mu.site is not SiteId.AUG_DELTA:
        raise SiteError("the interval embedding is defined on AugDelta")
    top = carrier_size(SiteId.NABLA, mu.cod) - 1
    return SiteMorphism(SiteId.NABLA, mu.dom, mu.cod, (0, *(v + 1 for v in mu.images), top))


def interval_preimage(phi: SiteMorphism) -> SiteMorphism | None:
    """The AugDelta map ``mu`` with ``J(mu) = phi``, or None."""
    if phi.site is not SiteId.NABLA:
        return None
    top = len(phi.images) - 1
    cod_top = carrier_size(SiteId.NABLA, phi.cod) - 1
    body = phi.images[1:top]
    if any(v in (0, cod_top) for v in body):
        return None
    return SiteMorphism(SiteId.AUG_DELTA, phi.dom, phi.cod, tuple(v - 1 for v in body))


def forget_interval(phi: SiteMorphism) -> SiteMorphism:
    """The underlying AugDelta map ``<m+2> -> <n+2>`` of an interval map."""
    return SiteMorphism(SiteId.AUG_DELTA, phi.dom + 2, phi.cod + 2, phi.images)


def is_interior_bijective(phi: SiteMorphism) -> bool:
    """Membership in the class I: interior preimage maps bijectively onto the interior."""
    if phi.site is not SiteId.NABLA:
        return False
    top = carrier_size(SiteId.NABLA, phi.cod) - 1
    hits = [v for v in phi.images if 0 < v < top]
    return sorted(hits) == list(range(1, top)) and len(set(hits)) == len(hits)


def interval_factor(phi: SiteMorphism) -> tuple[SiteMorphism, SiteMorphism]:
    """Unique ``(mu, rho)`` with ``phi = J(mu) o rho`` and ``rho`` in I."""
    if phi.site is not SiteId.NABLA:
        raise SiteError("interval_factor needs an interval map")
    top_n = carrier_size(SiteId.NABLA, phi.cod) - 1
    interior = [i for i, v in enumerate(phi.images) if 0 < v < top_n]
    k = len(interior)
    top_k = k + 1
    rho_imgs = []
    rank = 0
    for v in phi.images:
        if v == 0:
            rho_imgs.append(0)
        elif v == top_n:
            rho_imgs.append(top_k)
        else:
            rank += 1
            rho_imgs.append(rank)
    rho = SiteMorphism(SiteId.NABLA, phi.dom, k, tuple(rho_imgs))
    mu = SiteMorphism(SiteId.AUG_DELTA, k, phi.cod, tuple(phi.images[i] - 1 for i in interior))
    return mu, rho


# --- indexed hom-set tables -------------------------------------------------

def _encode(images: np.ndarray, base: int) -> np.ndarray:
    """Lexicographic integer code of each row."""
    images = np.asarray(images, dtype=np.int64)
    if images.ndim == 1:
        images = images[None, :]
    code = np.zeros(images.shape[:-1], dtype=np.int64)
    for col in range(images.shape[-1]):
        code = code * base + images[..., col]
    return code


class Site:
    """Cached hom-set tables of one site.

    ``homs(b, a)`` lists morphisms ``b -> a``; indices into that list are the
    morphism indices used by every table in the library.
    """

    _instances: dict[SiteId, Site] = {}

    def __new__(cls, site_id: SiteId):
        site_id = SiteId.parse(site_id)
        inst = cls._instances.get(site_id)
        if inst is None:
            inst = super().__new__(cls)
            inst.id = site_id
            inst._arrays = {}
            inst._codes = {}
            inst._index = {}
            inst._comp = {}
            inst._lists = {}
            cls._instances[site_id] = inst
        return inst

    def __repr__(self):
        return f"Site({self.id.value})"

    def __reduce__(self):
        return (Site, (self.id,))

    def size(self, n: int) -> int:
        return carrier_size(self.id, n)

    def homs(self, b: int, a: int) -> list[SiteMorphism]:
        key = (b, a)
        if key not in self._lists:
            self._lists[key] = hom_set(self.id, b, a)
        return self._lists[key]

    def hom_count(self, b: int, a: int) -> int:
        return len(_hom_images(self.id, b, a))

    def hom_array(self, b: int, a: int) -> np.ndarray:
        key = (b, a)
        arr = self._arrays.get(key)
        if arr is None:
            imgs = _hom_images(self.id, b, a)
            arr = np.array(imgs, dtype=np.int32).reshape(len(imgs), self.size(b))
            arr.setflags(write=False)
            self._arrays[key] = arr
        return arr

    def _hom_codes(self, b: int, a: int) -> np.ndarray:
        key = (b, a)
        codes = self._codes.get(key)
        if codes is None:
            arr = self.hom_array(b, a)
            codes = _encode(arr, max(self.size(a), 1)) if arr.shape[1] else np.zeros(len(arr), np.int64)
            self._codes[key] = codes
        return codes

    def lookup(self, b: int, a: int, images: np.ndarray) -> np.ndarray:
        """Morphism indices of image rows (raises if a row is not a morphism)."""
        images = np.asarray(images)
        codes = self._hom_codes(b, a)
        if images.shape[-1] == 0:
            out = np.zeros(images.shape[:-1], dtype=np.int64)
        else:
            query = _encode(images, max(self.size(a), 1))
            out = np.searchsorted(codes, query)
            bad = (out >= len(codes)) | (codes[np.minimum(out, len(codes) - 1)] != query)
            if np.any(bad):
                raise SiteError("image rows outside the hom-set")
        return out

    def index(self, phi: SiteMorphism) -> int:
        key = (phi.dom, phi.cod)
        table = self._index.get(key)
        if table is None:
            table = {f.images: i for i, f in enumerate(self.homs(*key))}
            self._index[key] = table
        return table[phi.images]

    def compose_table(self, c: int, b: int, a: int) -> np.ndarray:
        """``T[psi, phi]`` = index of ``psi o phi`` for ``phi: c -> b``, ``psi: b -> a``."""
        key = (c, b, a)
        table = self._comp.get(key)
        if table is None:
            psi = self.hom_array(b, a)
            phi = self.hom_array(c, b)
            if psi.shape[0] == 0 or phi.shape[0] == 0:
                table = np.zeros((psi.shape[0], phi.shape[0]), dtype=np.int32)
            elif phi.shape[1] == 0:
                table = np.zeros((psi.shape[0], phi.shape[0]), dtype=np.int32)
            else:
                comp = psi[:, phi]  # (P, F, size c)
                table = self.lookup(c, a, comp).astype(np.int32)
            table.setflags(write=False)
            self._comp[key] = table
        return table

    def identity_index(self, n: int) -> int:
        return self.index(SiteMorphism.identity(self.id, n))
