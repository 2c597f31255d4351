import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from crossed_site.crossed_core import (
    CrossedGroupMap,
    CrossedGroupTable,
    LevelGroup,
    NotNormalError,
    SubgroupFamily,
    Syllable,
    WordCapExceeded,
    constant_table,
    cyclic_group,
    free_product,
    generated_subgroup,
    identity_map,
    image_kernel_factor,
    is_non_crossed,
    natural_maps,
    product_with_noncrossed,
    projections,
    pullback,
    quotient_aset,
    representable,
    table_from_json,
    terminal_aset,
    total_compose,
    trivial_crossed_group,
    trivial_family,
    unit_map,
    verify_crossed_axioms,
    whole_family,
)
from crossed_site.standard_families import named_family, sym_family, weyl_table


def test_level_group_validation():
    with pytest.raises(ValueError):
        LevelGroup(np.array([[0, 1], [0, 1]]))
    with pytest.raises(ValueError):
        LevelGroup(np.array([[0, 1, 2], [1, 2, 0]]))
    g = cyclic_group(5)
    assert g.order == 5 and g.unit == 0 and g.is_abelian() and g.is_associative()
    assert list(g.inv) == [0, 4, 3, 2, 1]


def test_representable_and_terminal_are_presheaves():
    for site in ("delta", "aug-delta", "nabla"):
        assert not terminal_aset(site, 3).presheaf_violations()
        R = representable(site, 2, 3)
        assert not R.presheaf_violations()
        assert R.sizes == [len(O.homs(site, b, 2)) for b in range(4)]


def test_trivial_group_passes():
    for site in ("delta", "aug-delta", "nabla"):
        assert verify_crossed_axioms(trivial_crossed_group(site, 3)).passed


def _copy(G: CrossedGroupTable) -> CrossedGroupTable:
    return CrossedGroupTable(G.site, G.max_level, G.groups,
                             {k: v.copy() for k, v in G.restriction.items()},
                             {k: v.copy() for k, v in G.action.items()}, name="copy")


@pytest.mark.parametrize("kind", ["restriction", "action"])
def test_axiom_suite_catches_a_single_corrupted_entry(weyl_aug3, kind):
    G = _copy(weyl_aug3)
    tab = getattr(G, kind)[(2, 3)]
    if kind == "restriction":
        tab[1, 5] = (tab[1, 5] + 1) % G.sizes[2]
    else:
        P = tab.shape[1]
        tab[5, 1] = (tab[5, 1] + 1) % P
    rep = verify_crossed_axioms(G)
    assert not rep.passed
    kinds = {v["kind"] for v in rep.violations}
    assert kinds & {"CGi", "CGii", "presheaf-composition", "action-law", "unit-restriction",
                    "mono-not-preserved", "epi-not-preserved", "identity-moved"}


def test_axiom_suite_catches_wrong_multiplication(weyl_aug3):
    G = weyl_aug3
    groups = list(G.groups)
    m = groups[2].mul.copy()
    # relabel two non-unit elements in the table only
    u = groups[2].unit
    x, y = [i for i in range(m.shape[0]) if i != u][:2]
    perm = np.arange(m.shape[0])
    perm[[x, y]] = [y, x]
    groups[2] = LevelGroup(perm[m[np.ix_(perm, perm)]])
    bad = CrossedGroupTable(G.site, G.max_level, groups, G.restriction, G.action)
    assert not verify_crossed_axioms(bad).passed


def test_json_round_trip(weyl_aug3):
    T = table_from_json(weyl_aug3.to_json())
    assert T.same_tables(weyl_aug3) and T.name == weyl_aug3.name


@given(st.data())
def test_total_category_is_associative_and_unital(data):
    G = weyl_table("nabla", 2)
    S = G.site
    lv = st.integers(0, 2)
    a, b, c, d = (data.draw(lv) for _ in range(4))
    phi = data.draw(st.sampled_from(S.homs(a, b)))
    psi = data.draw(st.sampled_from(S.homs(b, c)))
    chi = data.draw(st.sampled_from(S.homs(c, d)))
    x, y, z = (data.draw(st.integers(0, G.sizes[k] - 1)) for k in (a, b, c))
    left = total_compose(G, (chi, z), total_compose(G, (psi, y), (phi, x)))
    right = total_compose(G, total_compose(G, (chi, z), (psi, y)), (phi, x))
    assert left == right
    from crossed_site.finite_site import SiteMorphism
    ident = (SiteMorphism.identity(G.site_id, b), G.unit(b))
    assert total_compose(G, ident, (phi, x)) == (phi, x)


def test_generated_subgroup_is_closed(weyl_aug3):
    W = weyl_aug3
    for a in W.levels:
        for x in range(W.sizes[a]):
            F = generated_subgroup(W, [(a, x)])
            assert F.is_subgroups() and F.is_closed() and F.contains(a, x)
    assert generated_subgroup(W, []) == trivial_family(W)


@pytest.mark.parametrize("site", ["aug-delta", "nabla"])
def test_generated_subgroup_is_the_least_family_containing_the_generators(site):
    from crossed_site.classification import enumerate_crossed_subgroups
    W = weyl_table(site, 2)
    fams = enumerate_crossed_subgroups(W)
    for a in W.levels:
        for x in range(W.sizes[a]):
            holding = [F for F in fams if x in F.members[a]]
            least = [F.members for F in holding if all(F <= K for K in holding)]
            assert generated_subgroup(W, [(a, x)]).members == least[0]
            assert len(least) == 1


def test_generated_subgroup_rejects_bad_generators(weyl_aug3):
    with pytest.raises(ValueError):
        generated_subgroup(weyl_aug3, [(2, 10 ** 6)])


def test_family_table_is_a_crossed_group(weyl_aug3):
    F = named_family("dihedral", "aug-delta", 3)
    T = F.as_table()
    assert verify_crossed_axioms(T).passed
    assert F.inclusion().is_valid()


def test_quotient_of_refsym_by_sym_is_constant_c2():
    W = weyl_table("aug-delta", 4)
    St = named_family("refsym", "aug-delta", 4)
    T = St.as_table()
    N = SubgroupFamily(T, [[St.members[a].index(x) for x in m] for a, m in enumerate(sym_family(W).members)])
    Q = quotient_aset(T, N)
    assert Q.sizes[1:] == [2, 2, 2, 2]
    C2 = constant_table(W.site, 4, cyclic_group(2))
    # up to the level-0 degeneracy, the quotient is constant: every restriction
    # between nonempty levels is a bijection matching the coset of the reversal
    for a in range(1, 5):
        for b in range(1, 5):
            for row in Q.restriction[(b, a)]:
                assert sorted(row.tolist()) == [0, 1]
                assert list(row) == list(C2.restriction[(b, a)][0])


def test_quotient_restriction_is_representative_independent():
    St = named_family("refsym", "aug-delta", 3)
    T = St.as_table()
    N = SubgroupFamily(T, [[St.members[a].index(x) for x in m]
                           for a, m in enumerate(sym_family(weyl_table("aug-delta", 3)).members)])
    for a in T.levels:
        mul = T.groups[a].mul
        for b in T.levels:
            R = T.restriction[(b, a)]
            for x in range(T.sizes[a]):
                for u in N.members[a]:
                    for ph in range(R.shape[0]):
                        # phi*(u x) N(b) = phi*(x) N(b)
                        y, z = int(R[ph, mul[u, x]]), int(R[ph, x])
                        coset = {int(T.groups[b].mul[z, n]) for n in N.members[b]}
                        assert y in coset


def test_quotient_needs_normality(weyl_aug3):
    W = weyl_aug3
    full = whole_family(W)
    H = next(F for F in (generated_subgroup(W, [(3, x)]) for x in range(W.sizes[3])) if not F.is_normal_in(full))
    with pytest.raises(NotNormalError):
        quotient_aset(W, H)


def test_image_kernel_and_pullback(weyl_aug3):
    W = weyl_aug3
    f = identity_map(W)
    K, I = image_kernel_factor(f)
    assert K.orders == [1] * 4 and I.orders == W.orders
    T = trivial_crossed_group(W.site, W.max_level)
    # W acts on hom-sets, the trivial group does not: no crossed map W -> *
    assert not unit_map(W, T).is_valid()
    P, p1, p2 = pullback(f, f)
    assert P.orders == W.orders and p1.is_valid() and p2.is_valid()
    C2 = constant_table(W.site, W.max_level, cyclic_group(2))
    u = unit_map(C2, T)
    assert u.is_valid()
    P, p1, p2 = pullback(u, u)
    assert P.orders == [4] * 4 and p1.is_valid() and p2.is_valid()
    assert verify_crossed_axioms(P).passed


def test_product_with_noncrossed():
    W = weyl_table("aug-delta", 3)
    C2 = constant_table(W.site, 3, cyclic_group(2), "C2")
    assert is_non_crossed(C2) and not is_non_crossed(W)
    P = product_with_noncrossed(W, C2)
    assert P.orders == [2 * m for m in W.orders]
    assert verify_crossed_axioms(P).passed
    pw, pk = projections(P, W, C2)
    assert CrossedGroupMap(P, W, pw).is_valid()
    with pytest.raises(ValueError):
        product_with_noncrossed(C2, W)


def test_natural_maps_from_a_representable_are_its_elements():
    R = representable("aug-delta", 1, 2)
    G = weyl_table("aug-delta", 2)
    maps = natural_maps(R, G)
    assert len(maps) == G.sizes[1]


# --- free products ---------------------------------------------------------------


def _amalgam(L=2):
    D = named_family("dihedral", "aug-delta", L)
    Lam = named_family("cyc", "aug-delta", L)
    St = named_family("refsym", "aug-delta", L)
    f1 = [[D.members[a].index(x) for x in Lam.members[a]] for a in range(L + 1)]
    f2 = [[St.members[a].index(x) for x in Lam.members[a]] for a in range(L + 1)]
    return D.as_table(), Lam.as_table(), St.as_table(), f1, f2


def _free_c2(L=3):
    Lam = named_family("cyc", "aug-delta", L).as_table()
    C2 = constant_table(Lam.site, L, cyclic_group(2), "C2")
    T = trivial_crossed_group(Lam.site, L)
    f = [[0] for _ in range(L + 1)]
    return Lam, T, C2, f, [[C2.unit(a)] for a in range(L + 1)]


def _partitions_agree(uf, words, nf):
    by_class, by_form = {}, {}
    for w in words:
        by_class.setdefault(uf.find(w), set()).add(nf[w])
        by_form.setdefault(nf[w], set()).add(uf.find(w))
    return all(len(v) == 1 for v in by_class.values()) and all(len(v) == 1 for v in by_form.values())


@pytest.mark.parametrize("make", [_amalgam, _free_c2], ids=["D*S~ over Lambda", "Lambda*C2"])
def test_free_product_normal_forms_match_congruence_closure(make):
    G1, H, G2, f1, f2 = make()
    FP = free_product(G1, H, G2, f1, f2, word_cap=10)
    for a in range(FP.max_level + 1):
        uf, words = O.amalgam_classes(G1.groups[a].mul.tolist(), G2.groups[a].mul.tolist(),
                                      G1.unit(a), G2.unit(a), f1[a], f2[a], 4)
        nf = {w: FP.from_syllables(a, [Syllable(i, g) for i, g in w]) for w in words}
        assert _partitions_agree(uf, words, nf)


@pytest.mark.parametrize("make", [_amalgam, _free_c2], ids=["D*S~ over Lambda", "Lambda*C2"])
def test_free_product_group_laws(make):
    G1, H, G2, f1, f2 = make()
    FP = free_product(G1, H, G2, f1, f2, word_cap=8)
    for a in range(FP.max_level + 1):
        for i in (1, 2):
            inj = FP.injection(i, a)
            assert len(set(inj)) == len(inj)
        words = FP.words(a, 2)
        e = FP.identity(a)
        for u in words:
            assert FP.mul(u, FP.inverse(u)) == e
            assert FP.mul(e, u) == u == FP.mul(u, e)
        for u, v, w in itertools.islice(itertools.product(words, repeat=3), 400):
            assert FP.mul(FP.mul(u, v), w) == FP.mul(u, FP.mul(v, w))


def test_free_product_restriction_is_representative_independent():
    G1, H, G2, f1, f2 = _amalgam()
    FP = free_product(G1, H, G2, f1, f2, word_cap=10)
    S = G1.site
    for a in range(FP.max_level + 1):
        uf, words = O.amalgam_classes(G1.groups[a].mul.tolist(), G2.groups[a].mul.tolist(),
                                      G1.unit(a), G2.unit(a), f1[a], f2[a], 3)
        classes = {}
        for w in words:
            classes.setdefault(uf.find(w), []).append([Syllable(i, g) for i, g in w])
        for reps in classes.values():
            for b in range(FP.max_level + 1):
                for phi in S.homs(b, a):
                    assert len({FP.restrict_word(phi, r) for r in reps}) == 1
                    assert len({FP.act_word(a, r, phi) for r in reps}) == 1


def test_word_cap_is_enforced():
    G1, H, G2, f1, f2 = _free_c2()
    FP = free_product(G1, H, G2, f1, f2, word_cap=2)
    a = 2
    x = FP.injection(1, a)[1]
    z = FP.injection(2, a)[1]
    with pytest.raises(WordCapExceeded):
        FP.mul(FP.mul(x, z), x)
