"""Coefficient functors on a groupoid: group-valued and abelian-valued.

A GGroup assigns a finite group to every object and a group isomorphism to
every arrow, functorially.  A GModule does the same with finitely generated
abelian groups and integer matrices.
"""

from __future__ import annotations

from . import fgab
from . import intlin as il
from .fgab import FgAbelian
from .groups import FiniteGroup, SizeCapError, size_cap
from .groupoid import FiniteGroupoid, GroupoidFunctor


class GGroup:
    def __init__(self, base: FiniteGroupoid, values, actions, check=True):
        """values: obj -> FiniteGroup; actions: arrow -> dict elem -> elem."""
        self.base = base
        self.values = dict(values)
        self.actions = {f: dict(m) for f, m in actions.items()}
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid GGroup: " + "; ".join(msgs[:3]))

    def value(self, x) -> FiniteGroup:
        return self.values[x]

    def act(self, t, a):
        return self.actions[t][a]

    def validate(self):
        msgs = []
        for t, (x, y) in self.base.arrows.items():
            m = self.actions.get(t)
            gx, gy = self.values[x], self.values[y]
            if m is None or set(m) != set(gx.elements):
                msgs.append(f"action of {t} has wrong domain")
                continue
            if sorted(m.values()) != sorted(gy.elements):
                msgs.append(f"action of {t} is not bijective")
            for a in gx.elements:
                for b in gx.elements:
                    if m[gx.mul(a, b)] != gy.mul(m[a], m[b]):
                        msgs.append(f"action of {t} is not a homomorphism")
                        break
        for x in self.base.objects:
            i = self.base.id_map[x]
            if any(self.actions[i][a] != a for a in self.values[x].elements):
                msgs.append(f"identity action at {x} is not the identity")
        for (g, f), gf in self.base.comp.items():
            x = self.base.src(f)
            for a in self.values[x].elements:
                if self.actions[gf][a] != self.actions[g][self.actions[f][a]]:
                    msgs.append(f"functoriality fails at ({g},{f})")
                    break
        return (not msgs), msgs

    def hat(self):
        """Totally disconnected groupoid with end groups the values."""
        cap = size_cap()
        arrows = {}
        ids = {}
        comp = {}
        for x in self.base.objects:
            g = self.values[x]
            if len(g) > cap:
                raise SizeCapError(f"value group at {x} exceeds cap {cap}")
            for a in g.elements:
                arrows[f"{a}@{x}"] = (x, x)
            ids[x] = f"{g.identity}@{x}"
            for a in g.elements:
                for b in g.elements:
                    comp[(f"{a}@{x}", f"{b}@{x}")] = f"{g.mul(a, b)}@{x}"
        return FiniteGroupoid(self.base.objects, arrows, ids, comp, check=False)


def constant_ggroup(base, group: FiniteGroup):
    values = {x: group for x in base.objects}
    actions = {t: {a: a for a in group.elements} for t in base.arrows}
    return GGroup(base, values, actions, check=False)


def trivial_ggroup(base):
    from .groups import trivial
    return constant_ggroup(base, trivial())


def end_functor(base: FiniteGroupoid) -> GGroup:
    """The groupoid acting on its own endomorphism groups by conjugation."""
    values = {x: base.end_group(x) for x in base.objects}
    actions = {}
    for t, (x, y) in base.arrows.items():
        actions[t] = {a: base.comp[(base.comp[(t, a)], base.inv[t])]
                      for a in values[x].elements}
    return GGroup(base, values, actions, check=False)


def restrict_ggroup(c: GGroup, f: GroupoidFunctor) -> GGroup:
    """Pull c back along f (values and actions through f)."""
    if f.cod is not c.base and f.cod.arrows != c.base.arrows:
        raise ValueError("functor does not land in the base of the coefficient")
    values = {x: c.values[f.obj_map[x]] for x in f.dom.objects}
    actions = {t: dict(c.actions[f.arr_map[t]]) for t in f.dom.arrows}
    return GGroup(f.dom, values, actions, check=False)


class GGroupMorphism:
    """Natural transformation of GGroups over a change-of-base functor."""

    def __init__(self, dom: GGroup, cod: GGroup, components, base_functor=None,
                 check=True):
        self.dom = dom
        self.cod = cod
        self.components = {x: dict(m) for x, m in components.items()}
        self.base_functor = base_functor
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid GGroup morphism: " + "; ".join(msgs[:3]))

    def obj_image(self, x):
        return self.base_functor.obj_map[x] if self.base_functor else x

    def arr_image(self, t):
        return self.base_functor.arr_map[t] if self.base_functor else t

    def apply(self, x, a):
        return self.components[x][a]

    def validate(self):
        msgs = []
        for x in self.dom.base.objects:
            gx = self.dom.values[x]
            gy = self.cod.values[self.obj_image(x)]
            m = self.components.get(x)
            if m is None or set(m) != set(gx.elements):
                msgs.append(f"component at {x} has wrong domain")
                continue
            for a in gx.elements:
                for b in gx.elements:
                    if m[gx.mul(a, b)] != gy.mul(m[a], m[b]):
                        msgs.append(f"component at {x} is not a homomorphism")
                        break
        for t, (x, y) in self.dom.base.arrows.items():
            for a in self.dom.values[x].elements:
                lhs = self.components[y][self.dom.act(t, a)]
                rhs = self.cod.act(self.arr_image(t), self.components[x][a])
                if lhs != rhs:
                    msgs.append(f"naturality fails at {t}")
                    break
        return (not msgs), msgs

    def is_surjective(self):
        return all(set(self.components[x].values())
                   == set(self.cod.values[self.obj_image(x)].elements)
                   for x in self.dom.base.objects)


class GModule:
    def __init__(self, base: FiniteGroupoid, values, actions, check=True):
        """values: obj -> FgAbelian; actions: arrow -> integer matrix."""
        self.base = base
        self.values = dict(values)
        self.actions = dict(actions)
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid GModule: " + "; ".join(msgs[:3]))

    def value(self, x) -> FgAbelian:
        return self.values[x]

    def act(self, t, v):
        m = self.actions[t]
        return tuple(sum(m[i, j] * v[j] for j in range(m.shape[1]))
                     for i in range(m.shape[0]))

    def action_matrix(self, t):
        return self.actions[t]

    def validate(self):
        msgs = []
        for t, (x, y) in self.base.arrows.items():
            m = self.actions.get(t)
            ax, ay = self.values[x], self.values[y]
            if m is None or m.shape != (ay.rank, ax.rank):
                msgs.append(f"action matrix of {t} has wrong shape")
                continue
            if not fgab.map_well_defined(ax, ay, m):
                msgs.append(f"action of {t} does not respect relations")
            minv = self.actions.get(self.base.inv[t])
            if minv is not None and minv.shape == (ax.rank, ay.rank):
                if not fgab.maps_equal(ax, ax, il.matmul(minv, m), il.eye(ax.rank)):
                    msgs.append(f"action of {t} is not invertible")
        for x in self.base.objects:
            i = self.base.id_map[x]
            if not fgab.maps_equal(self.values[x], self.values[x],
                                   self.actions[i], il.eye(self.values[x].rank)):
                msgs.append(f"identity action at {x} is not the identity")
        for (g, f), gf in self.base.comp.items():
            x = self.base.src(f)
            y = self.base.tgt(g)
            lhs = self.actions[gf]
            rhs = il.matmul(self.actions[g], self.actions[f])
            if not fgab.maps_equal(self.values[x], self.values[y], lhs, rhs):
                msgs.append(f"functoriality fails at ({g},{f})")
        return (not msgs), msgs

    def is_finite(self):
        return all(v.is_finite() for v in self.values.values())

    def to_ggroup(self):
        """Materialize as a GGroup of additive groups (finite values only)."""
        groups = {}
        bridges = {}
        for x in self.base.objects:
            a = self.values[x]
            elems = a.elements()
            names = {v: "v" + ",".join(map(str, v)) for v in elems}
            mult = {(names[v], names[w]): names[a.normal_form(a.add(v, w))]
                    for v in elems for w in elems}
            groups[x] = FiniteGroup(list(names.values()), mult, check=False)
            bridges[x] = names
        actions = {}
        for t, (x, y) in self.base.arrows.items():
            ay = self.values[y]
            actions[t] = {bridges[x][v]: bridges[y][ay.normal_form(self.act(t, v))]
                          for v in self.values[x].elements()}
        gg = GGroup(self.base, groups, actions, check=False)
        return gg, bridges


def constant_gmodule(base, a: FgAbelian):
    values = {x: a for x in base.objects}
    actions = {t: il.eye(a.rank) for t in base.arrows}
    return GModule(base, values, actions, check=False)


def zero_gmodule(base):
    return constant_gmodule(base, FgAbelian(0))


def restrict_gmodule(a: GModule, f: GroupoidFunctor) -> GModule:
    values = {x: a.values[f.obj_map[x]] for x in f.dom.objects}
    actions = {t: a.actions[f.arr_map[t]] for t in f.dom.arrows}
    return GModule(f.dom, values, actions, check=False)


class GModuleMorphism:
    def __init__(self, dom: GModule, cod: GModule, matrices, check=True):
        """matrices: obj -> matrix cod.value(x).rank x dom.value(x).rank."""
        self.dom = dom
        self.cod = cod
        self.matrices = dict(matrices)
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid GModule morphism: " + "; ".join(msgs[:3]))

    def matrix(self, x):
        return self.matrices[x]

    def apply(self, x, v):
        m = self.matrices[x]
        return tuple(sum(m[i, j] * v[j] for j in range(m.shape[1]))
                     for i in range(m.shape[0]))

    def validate(self):
        msgs = []
        for x in self.dom.base.objects:
            m = self.matrices.get(x)
            dx, cx = self.dom.values[x], self.cod.values[x]
            if m is None or m.shape != (cx.rank, dx.rank):
                msgs.append(f"component at {x} has wrong shape")
                continue
            if not fgab.map_well_defined(dx, cx, m):
                msgs.append(f"component at {x} not defined on relations")
        for t, (x, y) in self.dom.base.arrows.items():
            lhs = il.matmul(self.matrices[y], self.dom.actions[t])
            rhs = il.matmul(self.cod.actions[t], self.matrices[x])
            if not fgab.maps_equal(self.dom.values[x], self.cod.values[y], lhs, rhs):
                msgs.append(f"naturality square fails at {t}")
        return (not msgs), msgs

    def is_zero(self):
        return all(fgab.maps_equal(self.dom.values[x], self.cod.values[x],
                                   self.matrices[x],
                                   il.zeros(self.cod.values[x].rank,
                                            self.dom.values[x].rank))
                   for x in self.dom.base.objects)


def _induced_action(value_maker, dom_mod, incl, t, x, y):
    """Solve for the action on a sub/quotient presentation along inclusion."""
    m = dom_mod.actions[t]
    target = il.matmul(m, incl[x])
    sol = il.solve(incl[y], target)
    return sol


def hom_kernel_image_cokernel(phi: GModuleMorphism):
    """Objectwise kernel, image and cokernel of a natural map of GModules.

    Returns three pairs (module, map): kernel with its inclusion into the
    domain, image with its inclusion into the codomain, cokernel with the
    projection from the codomain.  Actions are induced and verified.
    """
    dom, cod = phi.dom, phi.cod
    base = dom.base
    ker_vals, ker_incl = {}, {}
    im_vals, im_incl = {}, {}
    cok_vals, cok_proj = {}, {}
    for x in base.objects:
        k, b = fgab.kernel(dom.values[x], cod.values[x], phi.matrices[x])
        ker_vals[x], ker_incl[x] = k, b
        im, inc = fgab.image(dom.values[x], cod.values[x], phi.matrices[x])
        im_vals[x], im_incl[x] = im, inc
        ck, pr = fgab.cokernel(dom.values[x], cod.values[x], phi.matrices[x])
        cok_vals[x], cok_proj[x] = ck, pr

    ker_act = {}
    im_act = {}
    cok_act = {}
    for t, (x, y) in base.arrows.items():
        sol = _induced_action(None, dom, ker_incl, t, x, y)
        if sol is None:
            raise ValueError(f"kernel not stable under action of {t}")
        ker_act[t] = sol
        # image is presented on domain generators, so the domain action works
        im_act[t] = dom.actions[t]
        cok_act[t] = cod.actions[t]

    ker_mod = GModule(base, ker_vals, ker_act, check=False)
    im_mod = GModule(base, im_vals, im_act, check=False)
    cok_mod = GModule(base, cok_vals, cok_act, check=False)
    ker_map = GModuleMorphism(ker_mod, dom, ker_incl, check=True)
    im_map = GModuleMorphism(im_mod, cod, im_incl, check=True)
    cok_map = GModuleMorphism(cod, cok_mod, cok_proj, check=True)
    return (ker_mod, ker_map), (im_mod, im_map), (cok_mod, cok_map)
