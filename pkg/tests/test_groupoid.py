import pytest

from crskit import fixtures as fx, groups
from crskit.coeffs import GGroup, constant_ggroup, trivial_ggroup
from crskit.groupoid import (codiscrete, discrete, disjoint_union, from_group,
                             identity_functor, interval, product_with_group,
                             semidirect, GroupoidFunctor)


def test_fixture_groupoids_validate():
    for name, g in fx.all_groupoid_fixtures().items():
        ok, msgs = g.validate()
        assert ok, (name, msgs)


def test_pi0_examples():
    blocks, _ = interval().pi0()
    assert list(blocks.values()) == [["a", "b"]]
    blocks, _ = discrete(["x", "y"]).pi0()
    assert len(blocks) == 2
    blocks, _ = fx.groupoid_i_plus_z2().pi0()
    assert len(blocks) == 2


def test_end_group_examples():
    assert len(interval().end_group("a")) == 1
    assert len(fx.groupoid_z2().end_group("*")) == 2
    dj = fx.groupoid_i_plus_z2()
    eg = dj.end_group("R.*")
    assert eg.is_isomorphic_to(groups.cyclic(2))
    with pytest.raises(KeyError):
        dj.end_group("nope")


def test_quotient_by_image():
    g = fx.groupoid_z4()
    n = {"*": {"0", "2"}}
    q, fun = g.quotient_by_image(n)
    assert len(q.end_group("*")) == 2
    assert fun.validate()[0]
    # identity-only quotient is an isomorphic copy
    g2 = interval()
    q2, _ = g2.quotient_by_image({x: {g2.id_map[x]} for x in g2.objects})
    assert len(q2.arrows) == len(g2.arrows)
    # full end groups of Z/2 x I collapse to the interval
    zi = fx.groupoid_z2_times_interval()
    n = {x: set(zi.endos(x)) for x in zi.objects}
    q3, fun3 = zi.quotient_by_image(n)
    assert len(q3.arrows) == 4 and all(len(q3.hom(x, y)) == 1
                                       for x in q3.objects for y in q3.objects)
    # quotient functor coequalizes the inclusion of N and the zero functor
    for x in zi.objects:
        for nn in n[x]:
            assert fun3.arr_map[nn] == q3.id_map[x]
    # pi0 is unchanged (identity on objects)
    assert q3.pi0()[0].keys() == zi.pi0()[0].keys()


def test_quotient_rejects_unstable():
    zi = fx.groupoid_z2_times_interval()
    bad = {x: {zi.id_map[x]} for x in zi.objects}
    bad["a"] = set(zi.endos("a"))
    with pytest.raises(ValueError):
        zi.quotient_by_image(bad)


def test_is_fibration_examples():
    g = fx.groupoid_z2()
    assert identity_functor(g).is_fibration()
    t = discrete(["*"])
    to_point = GroupoidFunctor(g, t, {"*": "*"},
                               {f: t.id_map["*"] for f in g.arrows})
    assert to_point.is_fibration()
    i = interval()
    d = discrete(["a", "b"])
    incl = GroupoidFunctor(d, i, {"a": "a", "b": "b"},
                           {d.id_map[x]: i.id_map[x] for x in d.objects})
    assert not incl.is_fibration()


def test_semidirect_examples():
    g = fx.groupoid_z2()
    sd, proj, sect = semidirect(g, trivial_ggroup(g))
    assert len(sd.arrows) == len(g.arrows)
    # trivial base with Z/2 fiber is the Z/2 groupoid
    t = discrete(["*"])
    sd2, _, _ = semidirect(t, constant_ggroup(t, groups.cyclic(2)))
    assert sd2.end_group("*").is_isomorphic_to(groups.cyclic(2))
    # Z/2 acting on Z/3 by inversion gives S3
    z3 = groups.cyclic(3)
    inv = {"0": {a: a for a in z3.elements}, "1": {"0": "0", "1": "2", "2": "1"}}
    c = GGroup(g, {"*": z3}, inv)
    sd3, proj3, sect3 = semidirect(g, c)
    assert sd3.end_group("*").is_isomorphic_to(groups.symmetric(3))
    assert proj3.is_fibration()
    # s o i = identity
    for u in g.arrows:
        assert proj3.arr_map[sect3.arr_map[u]] == u


def test_codiscrete_universal_property():
    cd = codiscrete(["p", "q"])
    assert cd.validate()[0]
    # exactly one arrow between each ordered pair
    assert all(len(cd.hom(x, y)) == 1 for x in cd.objects for y in cd.objects)
    # any groupoid maps to it in exactly one way per object assignment
    from crskit.xmod import enumerate_functors
    fns = enumerate_functors(fx.groupoid_z2(), cd)
    assert len(fns) == 2
