"""Finite groupoids with explicit composition tables, and their functors.

Composition is written comp(g, f) = g after f, defined when tgt(f) = src(g).
Identifiers for objects and arrows are opaque strings; every axiom is
checked by exhaustive enumeration.
"""

from __future__ import annotations

import itertools

from .groups import FiniteGroup, SizeCapError, size_cap


class FiniteGroupoid:
    def __init__(self, objects, arrows, id_map, comp, check=True):
        """arrows: name -> (src, tgt); comp: (g, f) -> g o f for composables."""
        self.objects = tuple(sorted(objects))
        self.arrows = dict(arrows)
        self.id_map = dict(id_map)
        self.comp = dict(comp)
        self.inv = {}
        self._derive_inverses()
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid groupoid: " + "; ".join(msgs[:3]))

    def _derive_inverses(self):
        for f, (x, y) in self.arrows.items():
            for g, (x2, y2) in self.arrows.items():
                if x2 == y and y2 == x:
                    if (self.comp.get((g, f)) == self.id_map[x]
                            and self.comp.get((f, g)) == self.id_map[y]):
                        self.inv[f] = g
                        break

    def validate(self):
        msgs = []
        for x in self.objects:
            i = self.id_map.get(x)
            if i is None or self.arrows.get(i) != (x, x):
                msgs.append(f"identity of {x} missing or mistyped")
        for f, (x, y) in self.arrows.items():
            for g, (x2, z) in self.arrows.items():
                if x2 == y:
                    gf = self.comp.get((g, f))
                    if gf is None:
                        msgs.append(f"composite {g}o{f} undefined")
                    elif self.arrows[gf] != (x, z):
                        msgs.append(f"composite {g}o{f} mistyped")
                elif (g, f) in self.comp:
                    msgs.append(f"composite {g}o{f} defined but not composable")
        for f, (x, y) in self.arrows.items():
            i_y, i_x = self.id_map.get(y), self.id_map.get(x)
            if i_y and self.comp.get((i_y, f)) != f:
                msgs.append(f"left unit fails at {f}")
            if i_x and self.comp.get((f, i_x)) != f:
                msgs.append(f"right unit fails at {f}")
        for f in self.arrows:
            if f not in self.inv:
                msgs.append(f"no inverse for {f}")
        for h, f in itertools.product(list(self.arrows), repeat=2):
            (xf, yf), (xh, yh) = self.arrows[f], self.arrows[h]
            for g in self.arrows:
                xg, yg = self.arrows[g]
                if xg == yf and xh == yg:
                    if self.comp[(self.comp[(h, g)], f)] != self.comp[(h, self.comp[(g, f)])]:
                        msgs.append(f"associativity fails at ({h},{g},{f})")
        return (not msgs), msgs

    # -- basic access --

    def src(self, f):
        return self.arrows[f][0]

    def tgt(self, f):
        return self.arrows[f][1]

    def compose(self, g, f):
        return self.comp[(g, f)]

    def inverse(self, f):
        return self.inv[f]

    def identity_of(self, x):
        return self.id_map[x]

    def hom(self, x, y):
        return sorted(f for f, (a, b) in self.arrows.items() if a == x and b == y)

    def star(self, x):
        return sorted(f for f, (a, _) in self.arrows.items() if a == x)

    def endos(self, x):
        return self.hom(x, x)

    def arrow_names(self):
        return sorted(self.arrows)

    def is_identity(self, f):
        return f == self.id_map[self.src(f)]

    # -- operations --

    def pi0(self):
        """Connected components; returns (blocks, obj -> component name).

        A component is named by its minimal object.
        """
        parent = {x: x for x in self.objects}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for _, (x, y) in self.arrows.items():
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
        blocks = {}
        for x in self.objects:
            blocks.setdefault(find(x), []).append(x)
        named = {min(v): sorted(v) for v in blocks.values()}
        comp_of = {x: min(blocks[find(x)]) for x in self.objects}
        return {k: named[k] for k in sorted(named)}, comp_of

    def end_group(self, x):
        if x not in self.objects:
            raise KeyError(f"unknown object {x}")
        elems = self.endos(x)
        mult = {(g, f): self.comp[(g, f)] for g in elems for f in elems}
        return FiniteGroup(elems, mult, check=False)

    def full_subgroupoid(self, objs):
        objs = sorted(objs)
        arrows = {f: st for f, st in self.arrows.items()
                  if st[0] in objs and st[1] in objs}
        comp = {k: v for k, v in self.comp.items()
                if k[0] in arrows and k[1] in arrows}
        ids = {x: self.id_map[x] for x in objs}
        return FiniteGroupoid(objs, arrows, ids, comp, check=False)

    def quotient_by_image(self, n_map):
        """Quotient by a totally disconnected subgroupoid of endomorphisms.

        n_map: object -> set of endo arrows, a subgroup of each end group,
        required to be stable under conjugation along every arrow.  Returns
        (groupoid, quotient functor); identity on objects, arrows become
        cosets named by their minimal member.
        """
        for x in self.objects:
            sub = set(n_map.get(x, {self.id_map[x]}))
            if not self.end_group(x).is_subgroup(sub):
                raise ValueError(f"N({x}) is not a subgroup")
        for t, (x, y) in self.arrows.items():
            for n in n_map.get(x, ()):
                c = self.comp[(self.comp[(t, n)], self.inv[t])]
                if c not in n_map.get(y, ()):
                    raise ValueError(
                        f"N not conjugation-stable along {t} at {n}")
        rep = {}
        for f, (x, y) in self.arrows.items():
            orbit = sorted(self.comp[(n, f)] for n in n_map.get(y, {self.id_map[y]}))
            rep[f] = f"[{orbit[0]}]"
        arrows = {}
        for f, st in self.arrows.items():
            arrows[rep[f]] = st
        ids = {x: rep[self.id_map[x]] for x in self.objects}
        comp = {}
        for (g, f), gf in self.comp.items():
            comp[(rep[g], rep[f])] = rep[gf]
        q = FiniteGroupoid(self.objects, arrows, ids, comp, check=False)
        functor = GroupoidFunctor(self, q, {x: x for x in self.objects}, rep)
        return q, functor

    def __repr__(self):
        return f"FiniteGroupoid({len(self.objects)} objects, {len(self.arrows)} arrows)"


class GroupoidFunctor:
    def __init__(self, dom, cod, obj_map, arr_map, check=True):
        self.dom = dom
        self.cod = cod
        self.obj_map = dict(obj_map)
        self.arr_map = dict(arr_map)
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid functor: " + "; ".join(msgs[:3]))

    def validate(self):
        msgs = []
        for f, (x, y) in self.dom.arrows.items():
            ff = self.arr_map.get(f)
            if ff is None or ff not in self.cod.arrows:
                msgs.append(f"arrow {f} unmapped")
                continue
            if self.cod.arrows[ff] != (self.obj_map[x], self.obj_map[y]):
                msgs.append(f"src/tgt not preserved at {f}")
        for x in self.dom.objects:
            if self.arr_map.get(self.dom.id_map[x]) != self.cod.id_map[self.obj_map[x]]:
                msgs.append(f"identity not preserved at {x}")
        for (g, f), gf in self.dom.comp.items():
            lhs = self.arr_map[gf]
            rhs = self.cod.comp[(self.arr_map[g], self.arr_map[f])]
            if lhs != rhs:
                msgs.append(f"composition not preserved at ({g},{f})")
        return (not msgs), msgs

    def on_obj(self, x):
        return self.obj_map[x]

    def on_arr(self, f):
        return self.arr_map[f]

    def is_fibration(self):
        """Star surjectivity: every arrow out of f(x) lifts to an arrow out of x."""
        for x in self.dom.objects:
            fx = self.obj_map[x]
            star_image = {self.arr_map[h] for h in self.dom.star(x)}
            for g in self.cod.star(fx):
                if g not in star_image:
                    return False
        return True

    def compose_with(self, other):
        """self after other."""
        if other.cod is not self.dom:
            raise ValueError("functors not composable")
        return GroupoidFunctor(
            other.dom, self.cod,
            {x: self.obj_map[other.obj_map[x]] for x in other.dom.objects},
            {f: self.arr_map[other.arr_map[f]] for f in other.dom.arrows},
            check=False)


def identity_functor(g):
    return GroupoidFunctor(g, g, {x: x for x in g.objects},
                           {f: f for f in g.arrows}, check=False)


def discrete(objects):
    objects = sorted(objects)
    arrows = {f"id_{x}": (x, x) for x in objects}
    ids = {x: f"id_{x}" for x in objects}
    comp = {(f"id_{x}", f"id_{x}"): f"id_{x}" for x in objects}
    return FiniteGroupoid(objects, arrows, ids, comp, check=False)


def codiscrete(objects):
    """One arrow between each ordered pair of objects."""
    objects = sorted(objects)
    arrows = {f"<{x}>{y}": (x, y) for x in objects for y in objects}
    ids = {x: f"<{x}>{x}" for x in objects}
    comp = {}
    for x in objects:
        for y in objects:
            for z in objects:
                comp[(f"<{y}>{z}", f"<{x}>{y}")] = f"<{x}>{z}"
    return FiniteGroupoid(objects, arrows, ids, comp, check=False)


def from_group(group: FiniteGroup, obj="*"):
    arrows = {g: (obj, obj) for g in group.elements}
    comp = {(g, f): group.mul(g, f) for g in group.elements for f in group.elements}
    return FiniteGroupoid([obj], arrows, {obj: group.identity}, comp, check=False)


def interval(a="a", b="b"):
    """The groupoid I: two objects and a single isomorphism between them."""
    arrows = {f"id_{a}": (a, a), f"id_{b}": (b, b), "f": (a, b), "f~": (b, a)}
    ids = {a: f"id_{a}", b: f"id_{b}"}
    comp = {
        (f"id_{a}", f"id_{a}"): f"id_{a}", (f"id_{b}", f"id_{b}"): f"id_{b}",
        ("f", f"id_{a}"): "f", (f"id_{b}", "f"): "f",
        ("f~", f"id_{b}"): "f~", (f"id_{a}", "f~"): "f~",
        ("f~", "f"): f"id_{a}", ("f", "f~"): f"id_{b}",
    }
    return FiniteGroupoid([a, b], arrows, ids, comp, check=False)


def disjoint_union(g1, g2, tag1="L", tag2="R"):
    objs = [f"{tag1}.{x}" for x in g1.objects] + [f"{tag2}.{x}" for x in g2.objects]
    arrows = {}
    comp = {}
    ids = {}
    for tag, g in ((tag1, g1), (tag2, g2)):
        for f, (x, y) in g.arrows.items():
            arrows[f"{tag}.{f}"] = (f"{tag}.{x}", f"{tag}.{y}")
        for x in g.objects:
            ids[f"{tag}.{x}"] = f"{tag}.{g.id_map[x]}"
        for (a, b), c in g.comp.items():
            comp[(f"{tag}.{a}", f"{tag}.{b}")] = f"{tag}.{c}"
    return FiniteGroupoid(objs, arrows, ids, comp, check=False)


def product_with_group(g, group: FiniteGroup):
    """Groupoid with the same objects and hom(x,y) = hom_g(x,y) x group."""
    arrows = {}
    comp = {}
    ids = {}
    for f, (x, y) in g.arrows.items():
        for a in group.elements:
            arrows[f"{f}|{a}"] = (x, y)
    for x in g.objects:
        ids[x] = f"{g.id_map[x]}|{group.identity}"
    for (p, q), r in g.comp.items():
        for a in group.elements:
            for b in group.elements:
                comp[(f"{p}|{a}", f"{q}|{b}")] = f"{r}|{group.mul(a, b)}"
    return FiniteGroupoid(g.objects, arrows, ids, comp, check=False)


def induced_along(obj_map, g):
    """The groupoid induced on a new object set via obj_map into obj(g):
    hom(x', y') = hom(obj_map x', obj_map y').  Returns (groupoid, functor)."""
    objs = sorted(obj_map)
    arrows = {}
    comp = {}
    ids = {}
    arr_map = {}
    for x in objs:
        for y in objs:
            for u in g.hom(obj_map[x], obj_map[y]):
                nm = f"{x}>{y}:{u}"
                arrows[nm] = (x, y)
                arr_map[nm] = u
    for x in objs:
        ids[x] = f"{x}>{x}:{g.id_map[obj_map[x]]}"
    for n1, (x, y) in arrows.items():
        for n2, (y2, z) in arrows.items():
            if y2 != y:
                continue
            comp[(n2, n1)] = f"{x}>{z}:{g.comp[(arr_map[n2], arr_map[n1])]}"
    out = FiniteGroupoid(objs, arrows, ids, comp, check=False)
    fun = GroupoidFunctor(out, g, dict(obj_map), arr_map, check=False)
    return out, fun


def semidirect(g, c):
    """Grothendieck construction of a GGroup c over g.

    Arrows x -> y are pairs (u, a) with u: x -> y in g and a in c(y);
    (v, b)(u, a) = (vu, b * va).  Returns (groupoid, projection, section).
    """
    total = sum(len(c.value(y)) for y in g.objects)
    if total * len(g.arrows) > size_cap() * max(1, len(g.objects)):
        raise SizeCapError("semidirect construction exceeds size cap")
    name = {}
    arrows = {}
    for u, (x, y) in g.arrows.items():
        for a in c.value(y).elements:
            nm = f"({u}|{a})"
            name[(u, a)] = nm
            arrows[nm] = (x, y)
    ids = {x: name[(g.id_map[x], c.value(x).identity)] for x in g.objects}
    comp = {}
    for u, (x, y) in g.arrows.items():
        for v, (y2, z) in g.arrows.items():
            if y2 != y:
                continue
            vu = g.comp[(v, u)]
            for a in c.value(y).elements:
                va = c.act(v, a)
                for b in c.value(z).elements:
                    comp[(name[(v, b)], name[(u, a)])] = \
                        name[(vu, c.value(z).mul(b, va))]
    sd = FiniteGroupoid(g.objects, arrows, ids, comp, check=False)
    proj = GroupoidFunctor(sd, g, {x: x for x in g.objects},
                           {name[(u, a)]: u for (u, a) in name}, check=False)
    sect = GroupoidFunctor(g, sd, {x: x for x in g.objects},
                           {u: name[(u, c.value(g.arrows[u][1]).identity)]
                            for u in g.arrows}, check=False)
    return sd, proj, sect
