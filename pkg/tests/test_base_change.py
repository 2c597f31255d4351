import itertools

import numpy as np
import pytest

import oracles as O
from crossed_site import base_change as bc
from crossed_site.crossed_core import (
    is_natural,
    natural_maps,
    representable,
    terminal_aset,
    verify_crossed_axioms,
)
from crossed_site.crossed_monoidal import absorbing_padding, crossed_group_as_monoid
from crossed_site.finite_site import Site, SiteId, compose
from crossed_site.standard_families import named_family, weyl_table


@pytest.fixture(scope="module")
def WA4():
    return weyl_table("aug-delta", 4)


def test_functor_hom_maps():
    for F in (bc.J_SHIFT, bc.INTERVAL):
        S, T = Site(F.source), Site(F.target)
        for b, a in itertools.product(range(3), repeat=2):
            idx = F.hom_index(b, a)
            homs = S.homs(b, a)
            assert [T.homs(F.level(b), F.level(a))[i] for i in idx] == [F.map(f) for f in homs]
            assert all(F.preimage(F.map(f)) == f for f in homs)
    assert bc.J_SHIFT.is_fully_faithful() and not bc.INTERVAL.is_fully_faithful()
    assert bc.get_functor("interval") is bc.INTERVAL
    with pytest.raises(ValueError):
        bc.get_functor("k")


def test_restriction_along_j_is_the_simplicial_weyl_group(WA4):
    R = bc.restrict_crossed(bc.J_SHIFT, WA4)
    assert R.orders == [2, 8, 48, 384]
    assert R.same_tables(weyl_table("delta", 3))


def test_interval_restriction_is_stable_and_crossed():
    W = weyl_table("nabla", 3)
    assert bc.stability_witness(bc.INTERVAL, W) is None
    R = bc.restrict_crossed(bc.INTERVAL, W)
    assert R.orders == [2, 4, 16, 96]
    assert verify_crossed_axioms(R).passed


def test_restriction_checks_the_site(WA4):
    with pytest.raises(ValueError):
        bc.restrict_crossed(bc.INTERVAL, WA4)


def test_ran_j_inverts_restriction(WA4):
    WD = weyl_table("delta", 3)
    R = bc.ran_j(WD)
    assert R.same_tables(WA4)
    assert bc.restrict_crossed(bc.J_SHIFT, R).same_tables(WD)
    X = representable("delta", 1, 2)
    assert bc.restrict_aset(bc.J_SHIFT, bc.ran_j(X)).is_isomorphic_by_identity(X)


def _sample_monoids():
    WD = weyl_table("delta", 2)
    S = named_family("sym", "delta", 2)
    fx = bc.pi0_fixtures(2)
    return {
        "W_Delta": crossed_group_as_monoid(WD),
        "S x {1,0}": absorbing_padding(S.as_table(), S.inclusion()),
        "E(Z/2) x {1,0}": fx["E(Z/2) x {1,0}"][0],
    }


@pytest.mark.parametrize("name", sorted(_sample_monoids()))
def test_ran_j_counit_is_an_isomorphism(name):
    M = _sample_monoids()[name]
    R = bc.ran_j_monoid(M)
    assert R.is_valid()
    assert bc.same_monoid_tables(bc.restrict_monoid(bc.J_SHIFT, R), M)


@pytest.mark.parametrize("L", [3, 4])
def test_interval_right_adjoint_of_weyl_times_c2(L):
    Mon, theta = bc.weyl_times_c2(L)
    I = bc.ran_interval_monoid(Mon, theta)
    assert I.sizes == [2 ** (n + 1) * [1, 1, 2, 6][n] for n in range(L - 1)]
    assert I.is_valid()
    assert bc.interval_monoid_matches_weyl(I)


def test_interval_condition():
    assert bc.interval_condition((0, 1, 2), (1, 1, 1), 1)
    assert bc.interval_condition((2, 1, 0), (-1, 1, -1), -1)
    assert not bc.interval_condition((2, 1, 0), (1, 1, 1), 1)
    assert not bc.interval_condition((1, 0, 2), (1, 1, 1), 1)


def test_theta_must_be_multiplicative():
    Mon, theta = bc.weyl_times_c2(3)
    bad = [np.ones_like(t) for t in theta]
    bad[2][3] = -1
    with pytest.raises(ValueError):
        bc.ran_interval_monoid(Mon, bad)


def test_tau_images():
    W = weyl_table("nabla", 4)
    for n in range(3):
        assert bc.tau_image_matches(W, n)


# --- interval left Kan extension ------------------------------------------------------


def test_lan_interval_is_a_presheaf_with_the_expected_adjunction():
    X = representable("aug-delta", 1, 2)
    Y = representable("nabla", 1, 2)
    LX = bc.lan_interval(X)
    assert not LX.presheaf_violations()
    JY = bc.restrict_aset(bc.INTERVAL, Y)
    left = natural_maps(X, JY)
    right = natural_maps(LX, Y)
    assert len(left) == len(right) > 0
    images = set()
    for g in left:
        f = bc.lan_adjunct(X, Y, g)
        assert is_natural(LX, Y, f)
        back = bc.lan_unadjunct(X, f)
        assert all(np.array_equal(u, v) for u, v in zip(back, g))
        images.add(tuple(tuple(v.tolist()) for v in f))
    assert images == {tuple(tuple(v.tolist()) for v in f) for f in right}


def test_lan_interval_of_terminal():
    LT = bc.lan_interval(terminal_aset("aug-delta", 3))
    # one element per interior-bijective map out of each level
    assert LT.sizes == [sum(len(bc.interior_bijections(n, k)) for k in range(n + 1)) for n in range(4)]


# --- left adjoint on crossed monoids ---------------------------------------------------


def brute_letter_classes(Mon, F, Gt, a):
    """Classes of ``(b, x, phi~)`` computed on morphism objects, plus the unit classes."""
    S, T = Site(F.source), Site(F.target)
    triples = [(b, x, f) for b in Mon.levels if F.level(b) <= Gt.max_level
               for x in range(Mon.sizes[b]) for f in T.homs(a, F.level(b))]
    uf = O.UnionFind()
    for t in triples:
        uf.find(t)
    for b, b2 in itertools.product(Mon.levels, repeat=2):
        if F.level(b) > Gt.max_level or F.level(b2) > Gt.max_level:
            continue
        for theta in S.homs(b, b2):
            for z in range(Mon.sizes[b2]):
                for f in T.homs(a, F.level(b)):
                    uf.union((b, Mon.M.aset.restrict(theta, z), f), (b2, z, compose(F.map(theta), f)))
    classes = {}
    for t in triples:
        classes.setdefault(uf.find(t), []).append(t)
    units = {r for r, mem in classes.items() if any(x == Mon.units[b] for b, x, _ in mem)}
    return classes, units


@pytest.mark.parametrize("functor,site,L", [("J", "nabla", 2), ("j", "aug-delta", 3)])
def test_lan_letters_match_brute_force(functor, site, L):
    F = bc.get_functor(functor)
    G = weyl_table(site, L)
    M = crossed_group_as_monoid(bc.restrict_crossed(F, G))
    lan = bc.lan_crossed_monoid(M, F, G)
    for a in range(L + 1):
        classes, units = brute_letter_classes(M, F, G, a)
        assert len(lan.letters(a)) == len(classes) - len(units)
        # the package partition is the brute-force partition
        for mem in classes.values():
            assert len({lan.letter(a, b, x, f) for b, x, f in mem}) == 1


@pytest.mark.parametrize("functor,site,L", [("J", "nabla", 2), ("j", "aug-delta", 2)])
def test_lan_rewriting_is_confluent_and_well_defined(functor, site, L):
    F = bc.get_functor(functor)
    G = weyl_table(site, L)
    M = crossed_group_as_monoid(bc.restrict_crossed(F, G))
    lan = bc.lan_crossed_monoid(M, F, G, word_cap=3)
    S = G.site
    for a in range(L + 1):
        for w in lan.words(a, 2):
            lan.normal_form(a, w)
            assert lan.rewrite_preserves_structure(a, w)
        for c in lan.letters(a):
            for b in range(L + 1):
                for psi in S.homs(b, a):
                    for q in range(G.sizes[a]):
                        assert len(lan.restrict_letter_all_reps(psi, c, q)) == 1


def test_lan_unit_is_bijective_for_j():
    F = bc.J_SHIFT
    G = weyl_table("aug-delta", 3)
    M = crossed_group_as_monoid(bc.restrict_crossed(F, G))
    lan = bc.lan_crossed_monoid(M, F, G)
    for b0 in range(3):
        u = lan.unit_map(b0)
        assert len(set(u)) == len(u) == M.sizes[b0]
        assert set(u) == {(c,) for c in lan.letters(b0 + 1)} | {()}


# --- pi_0 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["constant C2", "E(Z/2)", "E(Z/2) x {1,0}", "W_Delta"])
def test_pi0_fixtures(name):
    Mon, expected = bc.pi0_fixtures(2)[name]
    assert Mon.is_valid()
    res = bc.pi0_monoid(Mon)
    assert np.array_equal(res.mul, expected)
    # every pair of representatives gives the same component
    m0 = Mon.muls[0]
    for x, y in itertools.product(range(Mon.sizes[0]), repeat=2):
        assert res.mul[res.projection[x], res.projection[y]] == res.projection[m0[x, y]]
    # components agree with an independent union-find over the face maps
    S = Site(SiteId.DELTA)
    edges = [(Mon.M.aset.restrict(d, x), Mon.M.aset.restrict(e, x))
             for x in range(Mon.sizes[1]) for d, e in [S.homs(0, 1)]]
    assert [sorted(c) for c in O.components(Mon.sizes[0], edges)] == res.classes


def test_pi0_needs_a_simplicial_monoid():
    with pytest.raises(ValueError):
        bc.pi0_monoid(crossed_group_as_monoid(weyl_table("aug-delta", 2)))
