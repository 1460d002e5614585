"""Canonical small objects used by the test suite and the bundled examples."""

from __future__ import annotations

from . import groups
from .coeffs import GGroup, GModule, constant_ggroup
from .fgab import FgAbelian, cyclic_ab, free
from .groupoid import (FiniteGroupoid, disjoint_union, from_group, interval,
                       product_with_group)
from .xmod import CrossedModule
from . import intlin as il


def groupoid_interval():
    return interval()


def groupoid_z2():
    return from_group(groups.cyclic(2))


def groupoid_z4():
    return from_group(groups.cyclic(4))


def groupoid_s3():
    return from_group(groups.symmetric(3))


def groupoid_i_plus_z2():
    return disjoint_union(interval(), from_group(groups.cyclic(2)))


def groupoid_z2_times_interval():
    return product_with_group(interval(), groups.cyclic(2))


def xm_z2_z2_zero() -> CrossedModule:
    base = groupoid_z2()
    c = constant_ggroup(base, groups.cyclic(2))
    delta = {"*": {a: base.id_map["*"] for a in c.value("*").elements}}
    return CrossedModule(base, c, delta)


def xm_z2_z2_id() -> CrossedModule:
    base = groupoid_z2()
    z2 = groups.cyclic(2)
    actions = {t: {a: a for a in z2.elements} for t in base.arrows}
    c = GGroup(base, {"*": z2}, actions, check=False)
    delta = {"*": {"0": "0", "1": "1"}}
    return CrossedModule(base, c, delta)


def xm_z4_z2_two() -> CrossedModule:
    """Base Z/4, fiber Z/2, delta sending the generator to 2."""
    base = groupoid_z4()
    z2 = groups.cyclic(2)
    c = constant_ggroup(base, z2)
    delta = {"*": {"0": "0", "1": "2"}}
    return CrossedModule(base, c, delta)


def pxm_s3_nonpeiffer():
    """Pre-crossed but not crossed: constant S3 fiber with zero boundary.

    Peiffer fails on every non-commuting pair; the Peiffer quotient
    collapses the fiber to its abelianization Z/2.
    """
    from .xmod import PreCrossedModule
    base = groupoid_s3()
    s3 = groups.symmetric(3)
    c = constant_ggroup(base, s3)
    delta = {"*": {a: base.id_map["*"] for a in s3.elements}}
    return PreCrossedModule(base, c, delta)


def cc4():
    """Rank-3 complex [Z --x2--> Z/4 --0--> Z/2 groupoid], trivial actions."""
    from .crs import Boundary3, CrossedComplex
    xm = _xm_z2_z4_zero()
    base = xm.base
    c3 = GModule(base, {"*": free(1)}, {t: il.eye(1) for t in base.arrows},
                 check=False)
    d3 = Boundary3({"*": ["2"]})
    return CrossedComplex(base, xm, {3: (c3, d3)}, rank=3)


def _xm_z2_z4_zero() -> CrossedModule:
    base = groupoid_z2()
    z4 = groups.cyclic(4)
    c = constant_ggroup(base, z4)
    delta = {"*": {a: base.id_map["*"] for a in z4.elements}}
    return CrossedModule(base, c, delta)


def cc5():
    """Rank-4 complex [Z --x2--> Z --x2--> Z/4 --0--> Z/2 groupoid]."""
    from .crs import Boundary3, BoundaryN, CrossedComplex
    xm = _xm_z2_z4_zero()
    base = xm.base
    eye1 = {t: il.eye(1) for t in base.arrows}
    c3 = GModule(base, {"*": free(1)}, dict(eye1), check=False)
    c4 = GModule(base, {"*": free(1)}, dict(eye1), check=False)
    d3 = Boundary3({"*": ["2"]})
    d4 = BoundaryN({"*": il.mat([[2]])})
    return CrossedComplex(base, xm, {3: (c3, d3), 4: (c4, d4)}, rank=4)


def cc5_torsion():
    """Rank-4 complex [Z/2 --0--> Z --x2--> Z/4 --0--> Z/2 groupoid]."""
    from .crs import Boundary3, BoundaryN, CrossedComplex
    xm = _xm_z2_z4_zero()
    base = xm.base
    eye1 = {t: il.eye(1) for t in base.arrows}
    c3 = GModule(base, {"*": free(1)}, dict(eye1), check=False)
    c4 = GModule(base, {"*": cyclic_ab(2)}, dict(eye1), check=False)
    d3 = Boundary3({"*": ["2"]})
    d4 = BoundaryN({"*": il.mat([[0]])})
    return CrossedComplex(base, xm, {3: (c3, d3), 4: (c4, d4)}, rank=4)


def rank2_complex(xm: CrossedModule):
    from .crs import CrossedComplex
    return CrossedComplex(xm.base, xm, {}, rank=2)


def pi_module_z2_inversion(pi_base=None):
    """Z as a module over the one-object Z/2 groupoid, acting by negation."""
    base = pi_base or groupoid_z2()
    vals = {x: free(1) for x in base.objects}
    acts = {}
    for t, (x, y) in base.arrows.items():
        acts[t] = il.eye(1) if base.is_identity(t) else il.mat([[-1]])
    return GModule(base, vals, acts, check=False)


def all_crossed_module_fixtures():
    return {
        "xm_z2_z2_zero": xm_z2_z2_zero(),
        "xm_z2_z2_id": xm_z2_z2_id(),
        "xm_z4_z2_two": xm_z4_z2_two(),
    }


def all_groupoid_fixtures():
    return {
        "interval": groupoid_interval(),
        "z2": groupoid_z2(),
        "z4": groupoid_z4(),
        "s3": groupoid_s3(),
        "i_plus_z2": groupoid_i_plus_z2(),
    }


def all_complex_fixtures():
    out = {name: rank2_complex(xm)
           for name, xm in all_crossed_module_fixtures().items()}
    out["cc4"] = cc4()
    out["cc5"] = cc5()
    out["cc5_torsion"] = cc5_torsion()
    return out


def write_fixture_files(directory):
    """Serialize the bundled fixtures as JSON files for the CLI."""
    import os
    from . import serialize as sz
    from .simplicial import constant_simplicial_groupoid, constant_simplicial_xmod
    os.makedirs(directory, exist_ok=True)

    def put(name, payload):
        with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
            fh.write(sz.dumps(payload))

    for name, g in all_groupoid_fixtures().items():
        put(f"groupoid_{name}.json", sz.dump_groupoid(g))
    for name, xm in all_crossed_module_fixtures().items():
        put(f"{name}.json", sz.dump_xmod(xm))
    for name, c in all_complex_fixtures().items():
        put(f"{name}.json", sz.dump_crs(c))
    put("sgpd_z2.json", sz.dump_simplicial_groupoid(
        constant_simplicial_groupoid(groupoid_z2(), 2)))
    put("sxmod_z2.json", sz.dump_simplicial_xmod(
        constant_simplicial_xmod(xm_z2_z2_zero(), 1)))
    pi = groupoid_z2()
    put("coeff_z2_inversion_Z.json", {
        "pi": sz.dump_groupoid(pi),
        "A": sz.dump_gmodule(pi_module_z2_inversion(pi)),
    })
    from .coeffs import constant_gmodule
    from .fgab import cyclic_ab
    put("coeff_z2_const_Z2.json", {
        "pi": sz.dump_groupoid(pi),
        "A": sz.dump_gmodule(constant_gmodule(pi, cyclic_ab(2))),
    })
