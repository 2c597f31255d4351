import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crossed_site.crossed_core import natural_maps, representable, terminal_aset, verify_crossed_axioms
from crossed_site.crossed_monoidal import (
    CapOverflow,
    CrossedMonoidTable,
    SlicedObject,
    absorbing_padding,
    associativity_holds,
    crossed_group_as_monoid,
    free_crossed_monoid,
    free_monoid_violations,
    group_as_sliced,
    inverse_restriction_violations,
    invertibles,
    reslice,
    representable_sliced,
    rtimes,
    semidirect,
    unit_laws_hold,
    unit_object,
)
from crossed_site.standard_families import named_family, weyl_table


def family_sliced(name, site="aug-delta", L=2):
    F = named_family(name, site, L)
    return group_as_sliced(F.as_table(name), F.inclusion())


@pytest.fixture(scope="module")
def W2():
    return weyl_table("aug-delta", 2)


def test_semidirect_over_the_trivial_structure_is_the_product(W2):
    K = representable(W2.site, 1, 2)
    X = unit_object(W2)
    P = semidirect(K, X)
    assert P.sizes == K.sizes
    assert all(np.array_equal(P.restriction[k], K.restriction[k]) for k in K.restriction)


def test_semidirect_with_terminal_factor_is_the_second(W2):
    X = family_sliced("hyp")
    P = semidirect(terminal_aset(W2.site, 2), X)
    assert P.is_isomorphic_by_identity(X.aset)


def test_semidirect_twists_by_the_structure_map(W2):
    K = representable(W2.site, 1, 2)
    X = family_sliced("hyp")
    P = semidirect(K, X)
    S = W2.site
    for a, b in itertools.product(range(3), repeat=2):
        for f, phi in enumerate(S.homs(b, a)):
            for k in range(K.sizes[a]):
                for x in range(X.sizes[a]):
                    phix = X.G.act(int(X.p[a][x]), phi)
                    want = (K.restrict(phix, k), X.restrict(phi, x))
                    got = P.restriction[(b, a)][f, k * X.sizes[a] + x]
                    assert divmod(int(got), X.sizes[b]) == want
    assert not P.presheaf_violations()


def test_rtimes_structure_map_is_a_presheaf_map(W2):
    X = representable_sliced(W2, 1, W2.unit(1))
    Y = family_sliced("sym")
    P = rtimes(X, Y)
    assert not P.structure_violations()
    assert not P.aset.presheaf_violations()


def test_monoidal_laws_on_a_sample(W2):
    objs = [representable_sliced(W2, 1, W2.unit(1)), family_sliced("sym"), family_sliced("hyp")]
    for X in objs:
        assert unit_laws_hold(X)
    for X, Y, Z in itertools.product(objs, repeat=3):
        assert associativity_holds(X, Y, Z)


def sliced_maps(X, Y):
    """Natural maps ``X -> Y`` commuting with the structure maps."""
    return [f for f in natural_maps(X.aset, Y.aset)
            if all(np.array_equal(Y.p[a][f[a]], X.p[a]) for a in X.levels)]


@pytest.mark.parametrize("site", ["aug-delta", "nabla"])
def test_crs_is_natural_in_the_sliced_object(site):
    W = weyl_table(site, 2)
    g = next(x for x in range(W.sizes[2]) if x != W.unit(2))
    Y = representable_sliced(W, 2, g)
    pairs = [(representable_sliced(W, 1, int(W.restriction[(1, 2)][t, g])), Y) for t in range(len(W.site.homs(1, 2)))]
    pairs.append((Y, group_as_sliced(W)))
    total = 0
    for X, Y in pairs:
        maps = sliced_maps(X, Y)
        assert maps
        for f in maps:
            total += 1
            for a, b in itertools.product(X.levels, repeat=2):
                actX, resX = X.crs(b, a)
                actY, resY = Y.crs(b, a)
                # (id x f) o crs_X = crs_Y o (f x id)
                assert np.array_equal(actX, actY[f[a]])
                assert np.array_equal(f[b][resX], resY[f[a]])
    assert total >= len(pairs)


def test_pushforward_along_a_crossed_map_is_monoidal():
    S = named_family("sym", "aug-delta", 2)
    T = S.as_table("S")
    inc = S.inclusion()
    objs = [group_as_sliced(T), representable_sliced(T, 1, T.unit(1)), representable_sliced(T, 2, T.sizes[2] - 1)]
    for X, Y in itertools.product(objs, repeat=2):
        left = reslice(rtimes(X, Y), inc)
        right = rtimes(reslice(X, inc), reslice(Y, inc))
        assert left.same_tables(right)


def test_rtimes_rejects_different_bases(W2):
    X = family_sliced("sym")
    Y = group_as_sliced(weyl_table("aug-delta", 3))
    with pytest.raises(ValueError):
        rtimes(X, Y)


def test_sliced_object_validates_lengths(W2):
    with pytest.raises(ValueError):
        SlicedObject(terminal_aset(W2.site, 2), W2, [[0], [0]])


def test_groups_and_padding_are_crossed_monoids():
    H = named_family("hyp", "nabla", 2)
    M = crossed_group_as_monoid(H.as_table(), H.inclusion())
    assert M.is_valid()
    P = absorbing_padding(H.as_table(), H.inclusion())
    assert P.is_valid()
    U, members = invertibles(P)
    assert U.orders == H.orders
    assert [list(m) for m in members] == [[2 * i for i in range(s)] for s in H.orders]
    assert verify_crossed_axioms(U).passed
    assert not inverse_restriction_violations(P)


def test_monoid_checks_catch_a_bad_product(W2):
    M = crossed_group_as_monoid(W2)
    muls = [m.copy() for m in M.muls]
    muls[2][1, 1] = muls[2][1, 2]
    bad = CrossedMonoidTable(M.M, M.units, muls)
    assert not bad.is_valid()


def test_free_monoid_counts_and_laws(W2):
    X = representable_sliced(W2, 1, W2.unit(1))
    F = free_crossed_monoid(X, 3)
    for a in X.levels:
        n = X.sizes[a]
        assert F.count(a) == sum(n ** k for k in range(4))
    assert not free_monoid_violations(F, 3)
    with pytest.raises(CapOverflow):
        F.mul(F.words(2, 2)[-1], F.words(2, 2)[-1])
    with pytest.raises(ValueError):
        free_crossed_monoid(X, 0)


@given(st.data())
def test_free_monoid_extension_is_natural(data):
    """Evaluating words in a group commutes with restriction."""
    H = named_family("sym", "nabla", 2)
    T = H.as_table()
    Mon = crossed_group_as_monoid(T, H.inclusion())
    F = free_crossed_monoid(Mon.M, 4)
    ext = F.extend([np.arange(s) for s in T.sizes], Mon)
    a = data.draw(st.integers(0, 2))
    b = data.draw(st.integers(0, 2))
    w = data.draw(st.sampled_from(F.words(a, 3)))
    phi = data.draw(st.sampled_from(T.site.homs(b, a)))
    assert ext(F.restrict(phi, w)) == T.restrict(phi, ext(w))
    assert F.act(w, phi) == T.act(ext(w), phi)
