import itertools

import pytest

from crossed_site.classification import (
    GuardExceeded,
    all_quintuples,
    candidate_quadruples,
    enumerate_crossed_subgroups,
    goursat_backward,
    goursat_forward,
    interval_setup,
    is_virtual_product,
    quadruple_label,
    reproduce_table,
    reproduce_table1,
    reproduce_table2,
    reproduce_table3,
)
from crossed_site.crossed_core import (
    SubgroupFamily,
    generated_subgroup,
    trivial_family,
    verify_crossed_axioms,
    whole_family,
)
from crossed_site.standard_families import named_family, weyl_table


def brute_subgroups(mul):
    """All subgroups of a finite group given by its table, by repeated one-element joins."""
    n = mul.shape[0]
    e = next(i for i in range(n) if all(mul[i, j] == j for j in range(n)))

    def close(gens):
        s = set(gens) | {e}
        while True:
            new = {int(mul[x, y]) for x in s for y in s} - s
            if not new:
                return frozenset(s)
            s |= new

    found = {close([])}
    frontier = list(found)
    while frontier:
        nxt = []
        for S in frontier:
            for g in range(n):
                if g not in S:
                    T = close(S | {g})
                    if T not in found:
                        found.add(T)
                        nxt.append(T)
        frontier = nxt
    return found


def brute_crossed_subgroups(G):
    per_level = [sorted(brute_subgroups(G.groups[a].mul), key=sorted) for a in G.levels]
    out = set()
    for choice in itertools.product(*per_level):
        ok = all(set(G.restriction[(b, a)][:, sorted(choice[a])].ravel().tolist()) <= choice[b]
                 for a in G.levels for b in G.levels)
        if ok:
            out.add(tuple(tuple(sorted(c)) for c in choice))
    return out


@pytest.mark.parametrize("site,L", [("aug-delta", 3), ("nabla", 2), ("delta", 2)])
def test_enumeration_matches_brute_force(site, L):
    G = weyl_table(site, L)
    got = {tuple(tuple(m) for m in F.members) for F in enumerate_crossed_subgroups(G)}
    assert got == brute_crossed_subgroups(G)


def test_guard():
    with pytest.raises(GuardExceeded):
        enumerate_crossed_subgroups(weyl_table("aug-delta", 3), guard=40)


@pytest.fixture(scope="module")
def setup3():
    return interval_setup(3)


def test_hyperoctahedral_and_end_swap_form_a_virtual_product(setup3):
    S = setup3
    ok, w = is_virtual_product(S.JW, S.G1, S.G2)
    assert ok and w is None
    # H is trivial at level 0, so it cannot meet itself there
    ok, w = is_virtual_product(S.JW, S.G1, S.G1)
    assert not ok and w["condition"] == "generate" and w["level"] == 0
    ok, w = is_virtual_product(S.JW, S.G1, whole_family(S.JW))
    assert not ok and w["condition"] == "intersection"
    triv = SubgroupFamily(S.JW, [[S.JW.unit(a)] for a in S.JW.levels])
    ok, w = is_virtual_product(S.JW, S.G1, triv)
    assert not ok and w["condition"] == "generate"


def test_virtual_product_rejects_foreign_families(setup3):
    other = whole_family(weyl_table("nabla", 3))
    with pytest.raises(ValueError):
        is_virtual_product(setup3.JW, setup3.G1, other)


def test_goursat_round_trips(setup3):
    S = setup3
    subs = enumerate_crossed_subgroups(S.JW)
    quints = all_quintuples(S, 3)
    assert len(subs) == len(quints) == 24
    for H in subs:
        Q = goursat_forward(S.JW, S.G1, S.G2, H)
        assert Q.is_valid()
        assert goursat_backward(Q).members == H.members
    for Q in quints:
        H = goursat_backward(Q)
        assert goursat_forward(S.JW, S.G1, S.G2, H) == Q
    assert {goursat_forward(S.JW, S.G1, S.G2, H) for H in subs} == set(quints)


def test_virtual_product_examples(weyl_aug3):
    W = weyl_aug3
    full, triv = whole_family(W), trivial_family(W)
    assert is_virtual_product(W, full, triv)[0]
    S = named_family("sym", "aug-delta", 3)
    T = S.as_table()
    F = whole_family(T)
    ok, w = is_virtual_product(T, F, F)
    assert not ok and w["condition"] == "intersection" and w["level"] >= 2


def test_goursat_examples_and_sizes(setup3):
    S = setup3
    JW = S.JW
    Q = goursat_forward(JW, S.G1, S.G2, whole_family(JW))
    assert (Q.Ht1.members, Q.H1.members, Q.Ht2.members, Q.H2.members) == \
        (S.G1.members, S.G1.members, S.G2.members, S.G2.members)
    Q = goursat_forward(JW, S.G1, S.G2, trivial_family(JW))
    units = tuple((JW.unit(a),) for a in JW.levels)
    assert all(F.members == units for F in (Q.Ht1, Q.H1, Q.Ht2, Q.H2))
    assert goursat_backward(Q).members == units
    for Q in all_quintuples(S, 3):
        H = goursat_backward(Q)
        assert H.orders == [len(Q.Ht1.members[a]) * len(Q.H2.members[a]) for a in JW.levels]


@pytest.mark.parametrize("site", ["aug-delta", "nabla"])
def test_singleton_generated_subgroups_are_table_families(site):
    W = weyl_table(site, 3)
    fams = enumerate_crossed_subgroups(W)
    assert len(fams) == {"aug-delta": 7, "nabla": 6}[site]
    members = {tuple(F.members) for F in fams}
    for a in W.levels:
        for x in range(W.sizes[a]):
            assert tuple(generated_subgroup(W, [(a, x)]).members) in members
    for F in fams:
        assert verify_crossed_axioms(F.as_table()).passed


def test_invalid_quintuple_is_rejected(setup3):
    S = setup3
    Q = goursat_forward(S.JW, S.G1, S.G2, whole_family(S.JW))
    triv = SubgroupFamily(S.JW, [[S.JW.unit(a)] for a in S.JW.levels])
    # H2 is all of C2 while Ht2 shrinks to the unit
    bad = type(Q)(Q.G, Q.G1, Q.G2, Q.Ht1, Q.H1, triv, Q.H2, Q.chi)
    assert Q.H2.members != triv.members
    assert not bad.is_valid()
    with pytest.raises(ValueError):
        goursat_backward(bad)


TABLE2_ORDERS = {
    "*": lambda n: 1, "C2": lambda n: 2, "Lambda": lambda n: n, "D": lambda n: 2 * n,
    "S": lambda n: [1, 1, 2, 6, 24][n], "S~": lambda n: 2 * [1, 1, 2, 6, 24][n],
    "H": lambda n: 2 ** n * [1, 1, 2, 6, 24][n],
}


def test_table2():
    rep = reproduce_table2(4)
    assert rep.ok and len(rep.rows) == 7 and not rep.unmatched
    for row in rep.rows:
        assert row["orders_by_level"][2:] == [TABLE2_ORDERS[row["symbol"]](n) for n in range(2, 5)]


def test_table2_families_are_generated_by_named_families():
    W = weyl_table("aug-delta", 3)
    fams = {tuple(F.members) for F in enumerate_crossed_subgroups(W)}
    for name in ("trivial", "refl", "cyc", "dihedral", "sym", "refsym", "hyp"):
        assert tuple(named_family(name, "aug-delta", 3).members) in fams


def test_table1_shifts_the_index():
    rep = reproduce_table1(4)
    assert rep.ok and len(rep.rows) == 7
    assert rep.extra["ambient_equals_weyl_delta"]
    for row in rep.rows:
        assert row["orders_by_level"] == row["expected_orders"]


def test_table3_and_candidates():
    rep = reproduce_table3(4)
    assert rep.ok and len(rep.rows) == 6 and not rep.unmatched
    assert all(r["quadruple"] == r["expected_quadruple"] for r in rep.rows)
    assert rep.extra["candidates_valid"] == 8
    assert rep.extra["candidates_failing"] == ["(*,*;C2,C2)", "(S,S;C2,C2)"]


def test_candidate_witnesses_leave_the_family(setup3):
    S = setup3
    res = candidate_quadruples(3, S)
    assert len(res) == 8 and all(c.valid for c in res)
    for c in res:
        H = goursat_backward(c.quintuple)
        assert quadruple_label(S, c.quintuple) == c.label
        if c.nabla_closed:
            assert c.witness is None
            continue
        w = c.witness
        a = w["level"]
        perms, signs = S.W.signed[a]
        x = next(i for i in range(S.W.sizes[a])
                 if perms[i].tolist() == w["element"]["sigma"] and signs[i].tolist() == w["element"]["signs"])
        assert x in H.members[a]
        b = w["morphism"]["dom"]
        homs = S.W.site.homs(b, a)
        p = next(i for i, f in enumerate(homs) if f.to_json() == w["morphism"])
        assert int(S.W.restriction[(b, a)][p, x]) not in H.members[b]


def test_unknown_table():
    with pytest.raises(ValueError):
        reproduce_table(4)
