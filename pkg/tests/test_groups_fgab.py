import pytest
from hypothesis import given, settings, strategies as st

from crskit import fgab, groups
from crskit import intlin as il


def test_cyclic_and_symmetric():
    z4 = groups.cyclic(4)
    assert len(z4) == 4 and z4.is_abelian()
    assert z4.element_order("1") == 4
    s3 = groups.symmetric(3)
    assert len(s3) == 6 and not s3.is_abelian()
    assert s3.center() == {s3.identity}


def test_quotient_and_closure():
    z4 = groups.cyclic(4)
    sub = z4.subgroup({"2"})
    assert sub == {"0", "2"}
    q, rep = z4.quotient(sub)
    assert len(q) == 2
    s3 = groups.symmetric(3)
    a3 = s3.normal_closure({"120"})
    assert len(a3) == 3
    q, _ = s3.quotient(a3)
    assert len(q) == 2


def test_hom_enumeration():
    z2 = groups.cyclic(2)
    z4 = groups.cyclic(4)
    assert len(z2.homomorphisms_to(z4)) == 2  # 0 and x -> 2x
    assert len(z4.homomorphisms_to(z2)) == 2
    s3 = groups.symmetric(3)
    # homs S3 -> Z/2: trivial and sign
    assert len(s3.homomorphisms_to(z2)) == 2
    assert s3.is_isomorphic_to(groups.symmetric(3))
    assert not s3.is_isomorphic_to(groups.cyclic(6))


def test_fgab_normal_forms():
    a = fgab.FgAbelian(2, il.mat([[2, 0], [0, 0]]))
    assert a.eq((3, 5), (1, 5))
    assert not a.eq((1, 5), (1, 6))
    assert a.invariant_string() == "Z^1 + Z/2"
    assert not a.is_finite()
    z6 = fgab.FgAbelian(2, il.mat([[2, 0], [0, 3]]))
    assert z6.order() == 6
    assert len(z6.elements()) == 6


def test_kernel_image_cokernel_presentations():
    # x2 : Z -> Z/4 (the spec's bookkeeping example)
    dom = fgab.free(1)
    cod = fgab.cyclic_ab(4)
    f = il.mat([[2]])
    k, inc = fgab.kernel(dom, cod, f)
    assert k.invariant_string() == "Z^1"
    assert il.tolists(inc) == [[2]]
    im, _ = fgab.image(dom, cod, f)
    assert im.invariant_string() == "Z/2"
    ck, _ = fgab.cokernel(dom, cod, f)
    assert ck.invariant_string() == "Z/2"
    # zero map Z -> Z
    k, _ = fgab.kernel(dom, fgab.free(1), il.mat([[0]]))
    assert k.invariant_string() == "Z^1"
    ck, _ = fgab.cokernel(dom, fgab.free(1), il.mat([[0]]))
    assert ck.invariant_string() == "Z^1"
    # x2: Z -> Z
    k, _ = fgab.kernel(dom, fgab.free(1), il.mat([[2]]))
    assert k.is_trivial()
    ck, _ = fgab.cokernel(dom, fgab.free(1), il.mat([[2]]))
    assert ck.invariant_string() == "Z/2"


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=12))
def test_finite_abelian_presentation_roundtrip(n):
    g = groups.cyclic(n)
    pres, to_vec, from_vec = fgab.finite_abelian_presentation(g)
    assert pres.order() == n
    for e in g.elements:
        assert from_vec(to_vec(e)) == e
    a, b = g.elements[0], g.elements[-1]
    assert pres.eq(pres.add(to_vec(a), to_vec(b)), to_vec(g.mul(a, b)))


def test_simplified_is_canonical():
    a = fgab.FgAbelian(3, il.mat([[2, 0], [0, 4], [0, 0]]))
    small, to_m, from_m = a.simplified()
    assert small.invariant_string() == "Z^1 + Z/2 + Z/4"
    # to o from = identity on the small presentation
    comp = il.matmul(to_m, from_m)
    assert fgab.maps_equal(small, small, comp, il.eye(small.rank))
