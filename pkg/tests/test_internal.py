import pytest

from crskit import fixtures as fx
from crskit import intlin as il
from crskit.coeffs import GModule, constant_gmodule
from crskit.crs import Boundary3, BoundaryN, CrossedComplex
from crskit.fgab import FgAbelian
from crskit.internal_gpd import (InternalGroupoidMod, crs_n,
                                 endomorphism_splitting, gpd_n,
                                 internal_mod_isomorphic_via, pi0_internal)


def rank_ge3_fixtures():
    return {k: v for k, v in fx.all_complex_fixtures().items() if v.rank >= 3}


def test_round_trip_crs_gpd_exact():
    for name, c in rank_ge3_fixtures().items():
        g = gpd_n(c)
        assert crs_n(g).levels_equal(c), name


def test_pi0_equals_reflect():
    for name, c in rank_ge3_fixtures().items():
        g = gpd_n(c)
        pref, _ = c.reflect(c.rank - 1)
        assert pi0_internal(g).levels_equal(pref), name


def test_discrete_internal_groupoid():
    # zero top level: arrows reduce to the objects complex
    cc4 = fx.cc4()
    t3 = cc4.truncate(3)
    padded = CrossedComplex(
        t3.base, t3.dim2,
        {**t3.higher,
         4: (constant_gmodule(t3.base, FgAbelian(0)),
             BoundaryN({"*": il.zeros(1, 0)}))}, 4, check=False)
    g = gpd_n(padded)
    assert g.arr_mod.value("*").rank == g.obj_mod.value("*").rank
    assert crs_n(g).levels_equal(padded)


def hand_built():
    """Arrows Z + Z with s the first projection and t(a, b) = a + 2b."""
    tail2 = fx.rank2_complex(fx.xm_z2_z2_zero())
    idg = tail2.dim2.c.value("*").identity
    obj_mod = GModule(tail2.base, {"*": FgAbelian(1)},
                      {t: il.eye(1) for t in tail2.base.arrows}, check=False)
    arr_mod = GModule(tail2.base, {"*": FgAbelian(2)},
                      {t: il.eye(2) for t in tail2.base.arrows}, check=False)
    return InternalGroupoidMod(
        tail2, 3, obj_mod, Boundary3({"*": [idg]}),
        arr_mod, Boundary3({"*": [idg, idg]}),
        {"*": il.mat([[1, 0]])}, {"*": il.mat([[1, 2]])},
        {"*": il.mat([[1], [0]])})


def test_hand_built_kernel_and_boundary():
    g = hand_built()
    out = crs_n(g)
    assert out.module(4).value("*").invariant_string() == "Z^1"
    assert il.tolists(out.boundary(4).matrices["*"]) == [[2]]
    # coequalizer: t(ker s) = 2Z
    p0 = pi0_internal(g)
    assert p0.module(3).value("*").invariant_string() == "Z/2"
    assert p0.levels_equal(out.reflect(3)[0])


def test_gpd_of_crs_of_hand_built_isomorphic():
    g = hand_built()
    rebuilt = gpd_n(crs_n(g))
    iso = {"*": il.hstack([il.mat([[0], [1]]), il.mat([[1], [0]])])}
    assert internal_mod_isomorphic_via(rebuilt, g, iso)


def test_endomorphism_splitting():
    for name, c in rank_ge3_fixtures().items():
        if c.rank < 4:
            continue
        rep = endomorphism_splitting(gpd_n(c))
        assert "*" in rep, name
    rep = endomorphism_splitting(hand_built())
    assert rep["*"]["pi_top"] == "0"
    # nonzero top homotopy shows up as the second factor
    rep = endomorphism_splitting(gpd_n(fx.cc5_torsion()))
    assert rep["*"]["pi_top"] == "Z/2"
    assert rep["*"]["endomorphisms"] == "Z^1 + Z/2"


def test_splitting_on_finite_hybrid():
    # rank-3 complex with finite module part exercises the n = 2 splitting
    tail = fx.rank2_complex(fx.xm_z2_z2_zero())
    from crskit.fgab import cyclic_ab
    mod = GModule(tail.base, {"*": cyclic_ab(2)},
                  {t: il.eye(1) for t in tail.base.arrows}, check=False)
    crs = CrossedComplex(tail.base, tail.dim2,
                         {3: (mod, Boundary3({"*": ["0"]}))}, 3)
    g = gpd_n(crs)
    rep = endomorphism_splitting(g)
    assert rep["*"]["endomorphisms"] == 4  # |C2| x |pi3| = 2 x 2
    assert rep["*"]["pi_top"] == "Z/2"


def test_rank_mismatch_rejected():
    with pytest.raises(ValueError):
        gpd_n(fx.rank2_complex(fx.xm_z2_z2_zero()))
