import pytest

from crskit import fgab, fixtures as fx, groups
from crskit import intlin as il
from crskit.coeffs import (GGroup, GModule, GModuleMorphism, constant_ggroup,
                           constant_gmodule, end_functor,
                           hom_kernel_image_cokernel, restrict_ggroup,
                           restrict_gmodule, trivial_ggroup)
from crskit.groupoid import discrete, from_group, identity_functor


def test_hat_examples():
    i = fx.groupoid_interval()
    h = trivial_ggroup(i).hat()
    assert len(h.arrows) == 2 and all(h.src(f) == h.tgt(f) for f in h.arrows)
    g = fx.groupoid_z2()
    h2 = constant_ggroup(discrete(["*"]), groups.cyclic(2)).hat()
    assert h2.end_group("*").is_isomorphic_to(groups.cyclic(2))
    s3g = fx.groupoid_s3()
    endf = end_functor(s3g)
    h3 = endf.hat()
    assert sorted(h3.endos("*")) == sorted(a + "@*" for a in s3g.endos("*"))


def test_hat_size_cap(monkeypatch):
    monkeypatch.setenv("CK_SIZE_CAP", "3")
    g = fx.groupoid_z4()
    from crskit.groups import SizeCapError
    with pytest.raises(SizeCapError):
        constant_ggroup(g, groups.cyclic(4)).hat()


def test_end_functor_conjugation():
    s3g = fx.groupoid_s3()
    endf = end_functor(s3g)
    ok, msgs = endf.validate()
    assert ok, msgs
    s3 = groups.symmetric(3)
    t = "102"  # a transposition
    for a in s3.elements:
        assert endf.act(t, a) == s3.conj(t, a)
    # discrete base gives the constant trivial GGroup
    d = end_functor(discrete(["x", "y"]))
    assert all(len(d.value(x)) == 1 for x in d.base.objects)


def test_restrict():
    g = fx.groupoid_z2()
    c = constant_ggroup(g, groups.cyclic(3))
    r = restrict_ggroup(c, identity_functor(g))
    assert r.value("*").elements == c.value("*").elements
    # restrict a module with inversion action along the quotient map
    m = fx.xm_z4_z2_two()
    p1, q = m.pi1()
    a = fx.pi_module_z2_inversion(p1)
    res = restrict_gmodule(a, q)
    ok, msgs = res.validate()
    assert ok, msgs
    for t in m.base.arrows:
        assert il.mat_eq(res.actions[t], a.actions[q.arr_map[t]])


def test_hom_kernel_image_cokernel():
    g = fx.groupoid_z2()
    z = constant_gmodule(g, fgab.free(1))
    z4 = constant_gmodule(g, fgab.cyclic_ab(4))
    # zero map Z -> Z
    phi = GModuleMorphism(z, z, {"*": il.mat([[0]])})
    (ker, kmap), (im, imap), (cok, cmap) = hom_kernel_image_cokernel(phi)
    assert ker.value("*").invariant_string() == "Z^1"
    assert im.value("*").is_trivial()
    assert cok.value("*").invariant_string() == "Z^1"
    # x2 : Z -> Z
    phi = GModuleMorphism(z, z, {"*": il.mat([[2]])})
    (ker, _), (im, _), (cok, _) = hom_kernel_image_cokernel(phi)
    assert ker.value("*").is_trivial()
    assert im.value("*").invariant_string() == "Z^1"
    assert cok.value("*").invariant_string() == "Z/2"
    # 1 -> 2 : Z -> Z/4
    phi = GModuleMorphism(z, z4, {"*": il.mat([[2]])})
    (ker, kmap), (im, _), (cok, _) = hom_kernel_image_cokernel(phi)
    assert ker.value("*").invariant_string() == "Z^1"
    assert cok.value("*").invariant_string() == "Z/2"
    # composing kernel inclusion with the projection gives zero
    comp = il.matmul(cmap.matrices["*"],
                     il.matmul(phi.matrices["*"], kmap.matrices["*"]))
    assert cok.value("*").is_zero(tuple(il.col(comp, 0)))


def test_rank_nullity_over_q():
    g = fx.groupoid_z2()
    dom = constant_gmodule(g, fgab.FgAbelian(2))
    cod = constant_gmodule(g, fgab.FgAbelian(2, il.mat([[0, 0], [0, 3]])))
    phi = GModuleMorphism(dom, cod, {"*": il.mat([[1, 0], [0, 0]])})
    (ker, _), (im, _), _ = hom_kernel_image_cokernel(phi)
    assert ker.value("*").qdim() + im.value("*").qdim() == dom.value("*").qdim()


def test_induced_actions_natural():
    # inversion action on Z, kernel of multiplication by 2 into Z/4
    g = fx.groupoid_z2()
    z_inv = fx.pi_module_z2_inversion(g)
    z4 = GModule(g, {"*": fgab.cyclic_ab(4)},
                 {t: il.eye(1) if g.is_identity(t) else il.mat([[-1]])
                  for t in g.arrows})
    phi = GModuleMorphism(z_inv, z4, {"*": il.mat([[2]])})
    (ker, kmap), (im, imap), (cok, cmap) = hom_kernel_image_cokernel(phi)
    assert kmap.validate()[0] and imap.validate()[0] and cmap.validate()[0]


def test_hat_full_and_faithful_on_morphisms():
    # distinct natural transformations induce distinct functors of hats
    g = fx.groupoid_z2()
    z2 = groups.cyclic(2)
    c = constant_ggroup(g, z2)
    from crskit.coeffs import GGroupMorphism
    idm = GGroupMorphism(c, c, {"*": {"0": "0", "1": "1"}})
    zero = GGroupMorphism(c, c, {"*": {"0": "0", "1": "0"}})

    def hat_functor(mor):
        return {f"{a}@*": f"{mor.apply('*', a)}@*" for a in z2.elements}
    assert hat_functor(idm) != hat_functor(zero)
    # and every functor of hats fixing objects comes from a morphism (full)
    h = c.hat()
    from crskit.xmod import enumerate_functors
    fns = [f for f in enumerate_functors(h, h)
           if all(f.obj_map[x] == x for x in h.objects)]
    homs = z2.homomorphisms_to(z2)
    assert len(fns) == len(homs)
