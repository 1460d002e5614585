"""Pre-crossed and crossed modules over a groupoid.

A pre-crossed module is a GGroup C together with a natural map delta into
the conjugation GGroup End_G.  The Peiffer identity singles out crossed
modules; its failure can be repaired by the Peiffer quotient.  Crossed
modules are also internal groupoids in groupoids (2-groupoids), and both
directions of that isomorphism are implemented here.
"""

from __future__ import annotations

import itertools

from . import fgab
from . import intlin as il
from .coeffs import GGroup, GGroupMorphism, GModule, end_functor
from .groups import FiniteGroup
from .groupoid import FiniteGroupoid, GroupoidFunctor, semidirect


class PreCrossedModule:
    def __init__(self, base: FiniteGroupoid, c: GGroup, delta, check=True):
        """delta: obj -> dict(element -> endo arrow of base at that object)."""
        self.base = base
        self.c = c
        self.delta = {x: dict(m) for x, m in delta.items()}
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid pre-crossed module: " + "; ".join(msgs[:3]))

    def d(self, x, u):
        return self.delta[x][u]

    def validate(self):
        msgs = []
        for x in self.base.objects:
            grp = self.c.value(x)
            dx = self.delta.get(x)
            if dx is None or set(dx) != set(grp.elements):
                msgs.append(f"delta at {x} has wrong domain")
                continue
            endos = set(self.base.endos(x))
            for u in grp.elements:
                if dx[u] not in endos:
                    msgs.append(f"delta({u}) is not an endo of {x}")
            for u in grp.elements:
                for v in grp.elements:
                    if self.base.comp[(dx[u], dx[v])] != dx[grp.mul(u, v)]:
                        msgs.append(f"delta at {x} is not a homomorphism")
                        break
        for t, (x, y) in self.base.arrows.items():
            for u in self.c.value(x).elements:
                lhs = self.delta[y][self.c.act(t, u)]
                rhs = self.base.comp[(self.base.comp[(t, self.delta[x][u])],
                                      self.base.inv[t])]
                if lhs != rhs:
                    msgs.append(f"delta not natural along {t}")
                    break
        return (not msgs), msgs

    def peiffer_violations(self):
        """All (x, u, v) where the Peiffer identity fails."""
        out = []
        for x in self.base.objects:
            grp = self.c.value(x)
            for u in grp.elements:
                action = self.c.actions[self.delta[x][u]]
                for v in grp.elements:
                    if action[v] != grp.conj(u, v):
                        out.append((x, u, v))
        return out

    def is_crossed(self):
        return not self.peiffer_violations()

    def peiffer_quotient(self):
        """Factor out the Peiffer subgroup; returns (CrossedModule, quotient map).

        The Peiffer subgroup is the smallest family of normal subgroups that
        contains all Peiffer elements and is stable under every arrow action.
        """
        seeds = {x: set() for x in self.base.objects}
        for (x, u, v) in self.peiffer_violations():
            grp = self.c.value(x)
            lhs = self.c.actions[self.delta[x][u]][v]
            seeds[x].add(grp.mul(lhs, grp.inv(grp.conj(u, v))))
        changed = True
        while changed:
            changed = False
            for x in self.base.objects:
                grp = self.c.value(x)
                closed = grp.normal_closure(seeds[x]) if seeds[x] else {grp.identity}
                if closed != seeds[x]:
                    seeds[x] = closed
                    changed = True
            for t, (x, y) in self.base.arrows.items():
                for n in list(seeds[x]):
                    img = self.c.act(t, n)
                    if img not in seeds[y]:
                        seeds[y].add(img)
                        changed = True
        values = {}
        projections = {}
        for x in self.base.objects:
            grp = self.c.value(x)
            sub = seeds[x] if seeds[x] else {grp.identity}
            q, rep = grp.quotient(sub)
            values[x] = q
            projections[x] = rep
        actions = {}
        for t, (x, y) in self.base.arrows.items():
            actions[t] = {projections[x][a]: projections[y][self.c.act(t, a)]
                          for a in self.c.value(x).elements}
        qgg = GGroup(self.base, values, actions, check=False)
        delta = {}
        for x in self.base.objects:
            delta[x] = {}
            for a in self.c.value(x).elements:
                delta[x][projections[x][a]] = self.delta[x][a]
        quotient = CrossedModule(self.base, qgg, delta)
        qmap = GGroupMorphism(self.c, qgg, projections, check=True)
        return quotient, qmap


class CrossedModule(PreCrossedModule):
    def __init__(self, base, c, delta, check=True):
        super().__init__(base, c, delta, check=check)
        if check:
            bad = self.peiffer_violations()
            if bad:
                raise ValueError(f"Peiffer identity fails, e.g. at {bad[0]}")

    # -- structural consequences, used as invariants in tests --

    def kernel_elements(self, x):
        idx = self.base.id_map[x]
        return [u for u in self.c.value(x).elements if self.delta[x][u] == idx]

    def kernel_is_central(self):
        return all(self.c.value(x).is_central_subset(self.kernel_elements(x))
                   for x in self.base.objects)

    def image_acts_trivially_on_kernel(self):
        for x in self.base.objects:
            for u in self.c.value(x).elements:
                act = self.c.actions[self.delta[x][u]]
                if any(act[k] != k for k in self.kernel_elements(x)):
                    return False
        return True

    # -- homotopy --

    def pi0(self):
        return self.base.pi0()

    def image_subgroupoid(self):
        return {x: {self.delta[x][u] for u in self.c.value(x).elements}
                for x in self.base.objects}

    def pi1(self):
        """Fundamental groupoid base/im(delta) with its projection."""
        return self.base.quotient_by_image(self.image_subgroupoid())

    def pi2(self):
        """ker(delta) as a module over pi1, with element bridges.

        Returns (GModule over pi1, bridges) where bridges[x] is a pair
        (to_vec, from_vec) between kernel elements and coordinates.
        """
        p1, q = self.pi1()
        values = {}
        bridges = {}
        for x in self.base.objects:
            elems = self.kernel_elements(x)
            grp = self.c.value(x)
            mult = {(a, b): grp.mul(a, b) for a in elems for b in elems}
            sub = FiniteGroup(elems, mult, check=False)
            pres, to_vec, from_vec = fgab.finite_abelian_presentation(sub)
            values[x] = pres
            bridges[x] = (to_vec, from_vec)
        actions = {}
        for tq in p1.arrows:
            lifts = [t for t in self.base.arrows if q.arr_map[t] == tq]
            x, y = p1.arrows[tq]
            mats = []
            for t in lifts:
                to_y = bridges[y][0]
                from_x = bridges[x][1]
                cols = []
                for j in range(values[x].rank):
                    vec = [0] * values[x].rank
                    vec[j] = 1
                    elem = from_x(tuple(vec))
                    cols.append(list(to_y(self.c.act(t, elem))))
                mats.append(il.from_cols(cols, values[y].rank))
            for m in mats[1:]:
                if not fgab.maps_equal(values[x], values[y], mats[0], m):
                    raise ValueError(
                        f"pi2 descent obstruction along {tq}: lifts disagree")
            actions[tq] = mats[0]
        mod = GModule(p1, values, actions, check=False)
        return mod, bridges

    def ceil2(self):
        return self.c


def zero_crossed_module(base) -> CrossedModule:
    from .coeffs import trivial_ggroup
    c = trivial_ggroup(base)
    delta = {x: {c.value(x).identity: base.id_map[x]} for x in base.objects}
    return CrossedModule(base, c, delta, check=False)


def terminal_crossed_module(base) -> CrossedModule:
    """End_G with the identity map; the chain bottom '1_G'."""
    c = end_functor(base)
    delta = {x: {u: u for u in c.value(x).elements} for x in base.objects}
    return CrossedModule(base, c, delta, check=False)


# -- crossed modules as 2-groupoids ------------------------------------------


class TwoGroupoid:
    """Internal groupoid in groupoids with identity-on-objects structure maps."""

    def __init__(self, g0, g1, s, t, i, vcomp, check=True):
        self.g0 = g0
        self.g1 = g1
        self.s = s
        self.t = t
        self.i = i
        self.vcomp = dict(vcomp)
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid 2-groupoid: " + "; ".join(msgs[:3]))

    def validate(self):
        msgs = []
        for fun, nm in ((self.s, "s"), (self.t, "t"), (self.i, "i")):
            ok, sub = fun.validate()
            if not ok:
                msgs.append(f"{nm} is not a functor: {sub[0]}")
            if any(fun.obj_map[x] != x for x in fun.dom.objects):
                msgs.append(f"{nm} is not the identity on objects")
        for u in self.g0.arrows:
            if self.s.arr_map[self.i.arr_map[u]] != u:
                msgs.append(f"s(i({u})) != {u}")
            if self.t.arr_map[self.i.arr_map[u]] != u:
                msgs.append(f"t(i({u})) != {u}")
        arrows = list(self.g1.arrows)
        for a in arrows:
            for b in arrows:
                composable = self.s.arr_map[b] == self.t.arr_map[a]
                if composable != ((b, a) in self.vcomp):
                    msgs.append(f"vertical composability wrong at ({b},{a})")
                    continue
                if composable:
                    c = self.vcomp[(b, a)]
                    if self.s.arr_map[c] != self.s.arr_map[a] \
                            or self.t.arr_map[c] != self.t.arr_map[b]:
                        msgs.append(f"vertical composite mistyped at ({b},{a})")
        for a in arrows:
            ia = self.i.arr_map[self.s.arr_map[a]]
            if self.vcomp.get((a, ia)) != a:
                msgs.append(f"vertical right unit fails at {a}")
            ta = self.i.arr_map[self.t.arr_map[a]]
            if self.vcomp.get((ta, a)) != a:
                msgs.append(f"vertical left unit fails at {a}")
        for (b, a), c in self.vcomp.items():
            for d in arrows:
                if (d, c) in self.vcomp and (d, b) in self.vcomp:
                    if self.vcomp[(d, c)] != self.vcomp[(self.vcomp[(d, b)], a)]:
                        msgs.append("vertical associativity fails")
        # vertical inverses
        for a in arrows:
            has = any(self.vcomp.get((b, a)) == self.i.arr_map[self.s.arr_map[a]]
                      and self.vcomp.get((a, b)) == self.i.arr_map[self.t.arr_map[a]]
                      for b in arrows
                      if (b, a) in self.vcomp and (a, b) in self.vcomp)
            if not has:
                msgs.append(f"no vertical inverse for {a}")
        # interchange: composition is a functor on the pullback groupoid
        for (b, a) in list(self.vcomp):
            for (b2, a2) in list(self.vcomp):
                xa, ya = self.g1.arrows[a]
                xa2, ya2 = self.g1.arrows[a2]
                if xa2 != ya:
                    continue
                lhs = self.g1.comp[(self.vcomp[(b2, a2)], self.vcomp[(b, a)])]
                rhs = self.vcomp.get((self.g1.comp[(b2, b)], self.g1.comp[(a2, a)]))
                if lhs != rhs:
                    msgs.append(f"interchange fails at (({b2},{a2}),({b},{a}))")
        return (not msgs), msgs

    def pi0(self):
        """Coequalizer of s and t; a quotient groupoid of g0."""
        n_map = {x: {self.t.arr_map[a] for a in self.g1.arrows
                     if self.g1.arrows[a] == (x, x)
                     and self.s.arr_map[a] == self.g0.id_map[x]}
                 for x in self.g0.objects}
        return self.g0.quotient_by_image(n_map)


def gpd_of_xm(m: CrossedModule) -> TwoGroupoid:
    """The 2-groupoid with objects m.base and arrows the semidirect product."""
    sd, proj, sect = semidirect(m.base, m.c)
    names = {}
    for u, (x, y) in m.base.arrows.items():
        for a in m.c.value(y).elements:
            names[(u, a)] = f"({u}|{a})"
    t_arr = {}
    for (u, a), nm in names.items():
        y = m.base.tgt(u)
        t_arr[nm] = m.base.comp[(m.delta[y][a], u)]
    t_fun = GroupoidFunctor(sd, m.base, {x: x for x in m.base.objects},
                            t_arr, check=False)
    vcomp = {}
    for (u, a), nm_a in names.items():
        y = m.base.tgt(u)
        v = t_arr[nm_a]
        for b in m.c.value(y).elements:
            nm_b = names[(v, b)]
            vcomp[(nm_b, nm_a)] = names[(u, m.c.value(y).mul(b, a))]
    return TwoGroupoid(m.base, sd, proj, t_fun, sect, vcomp, check=False)


def xm_of_gpd(tg: TwoGroupoid) -> CrossedModule:
    """Recover the crossed module: kernel of s under horizontal structure."""
    g0, g1 = tg.g0, tg.g1
    values = {}
    for x in g0.objects:
        elems = [a for a in g1.endos(x)
                 if tg.s.arr_map[a] == g0.id_map[x]]
        mult = {(a, b): g1.comp[(a, b)] for a in elems for b in elems}
        values[x] = FiniteGroup(elems, mult, check=False)
    actions = {}
    for w, (x, y) in g0.arrows.items():
        iw = tg.i.arr_map[w]
        iw_inv = g1.inv[iw]
        actions[w] = {a: g1.comp[(g1.comp[(iw, a)], iw_inv)]
                      for a in values[x].elements}
    c = GGroup(g0, values, actions, check=False)
    delta = {x: {a: tg.t.arr_map[a] for a in values[x].elements}
             for x in g0.objects}
    return CrossedModule(g0, c, delta)


def xm_isomorphic_via(m1: CrossedModule, m2: CrossedModule, elem_map):
    """Check that elem_map[x]: C1(x) -> C2(x) is an isomorphism of crossed
    modules over the identity of the (shared) base."""
    if m1.base.objects != m2.base.objects:
        return False
    for x in m1.base.objects:
        g1, g2 = m1.c.value(x), m2.c.value(x)
        f = elem_map[x]
        if sorted(f.values()) != sorted(g2.elements) or set(f) != set(g1.elements):
            return False
        for a in g1.elements:
            for b in g1.elements:
                if f[g1.mul(a, b)] != g2.mul(f[a], f[b]):
                    return False
        for a in g1.elements:
            if m1.delta[x][a] != m2.delta[x][f[a]]:
                return False
    for t, (x, y) in m1.base.arrows.items():
        for a in m1.c.value(x).elements:
            if elem_map[y][m1.c.act(t, a)] != m2.c.act(t, elem_map[x][a]):
                return False
    return True


def two_groupoids_isomorphic_via(t1: TwoGroupoid, t2: TwoGroupoid, arr_map):
    """Check an identity-on-g0 bijection of 2-cells is a 2-groupoid iso."""
    if set(arr_map) != set(t1.g1.arrows) \
            or sorted(arr_map.values()) != sorted(t2.g1.arrows):
        return False
    for a, (x, y) in t1.g1.arrows.items():
        if t2.g1.arrows[arr_map[a]] != (x, y):
            return False
        if t2.s.arr_map[arr_map[a]] != t1.s.arr_map[a]:
            return False
        if t2.t.arr_map[arr_map[a]] != t1.t.arr_map[a]:
            return False
    for (g, f), gf in t1.g1.comp.items():
        if t2.g1.comp[(arr_map[g], arr_map[f])] != arr_map[gf]:
            return False
    for (b, a), c in t1.vcomp.items():
        if t2.vcomp.get((arr_map[b], arr_map[a])) != arr_map[c]:
            return False
    for u in t1.g0.arrows:
        if arr_map[t1.i.arr_map[u]] != t2.i.arr_map[u]:
            return False
    return True


# -- free pre-crossed modules -------------------------------------------------


class FreePreCrossedModule:
    """Free pre-crossed module on (X, f, G): words in generators <t, u>.

    A generator <t, u> lives at tgt(t) where t: z -> x is an arrow of the
    base and f(u) is an endomorphism of z.  Elements are reduced words
    (tuples of (generator, sign)); equality is word equality.
    """

    def __init__(self, base: FiniteGroupoid, labels, fmap):
        self.base = base
        self.labels = list(labels)
        self.fmap = dict(fmap)
        for u, arr in self.fmap.items():
            x, y = base.arrows[arr]
            if x != y:
                raise ValueError(f"f({u}) is not an endomorphism")

    def generators_at(self, x):
        out = []
        for t, (z, y) in sorted(self.base.arrows.items()):
            if y != x:
                continue
            for u in self.labels:
                if self.base.src(self.fmap[u]) == z:
                    out.append((t, u))
        return out

    @staticmethod
    def reduce(word):
        out = []
        for g, e in word:
            if out and out[-1][0] == g and out[-1][1] == -e:
                out.pop()
            else:
                out.append((g, e))
        return tuple(out)

    def mul(self, w1, w2):
        return self.reduce(tuple(w1) + tuple(w2))

    def inv(self, w):
        return tuple((g, -e) for (g, e) in reversed(w))

    def gen(self, t, u):
        return (((t, u), 1),)

    def delta(self, x, word):
        out = self.base.id_map[x]
        for (t, u), e in word:
            conj = self.base.comp[(self.base.comp[(t, self.fmap[u])],
                                   self.base.inv[t])]
            if e < 0:
                conj = self.base.inv[conj]
            out = self.base.comp[(out, conj)]
        return out

    def act(self, s, word):
        return tuple((((self.base.comp[(s, t)], u), e)) for (t, u), e in word)

    def peiffer_quotient(self):
        """Rejected: the Peiffer quotient of a free pre-crossed module needs
        the word problem of a free-group quotient, undecidable in this
        representation.  Quotient finite pre-crossed modules instead."""
        raise NotImplementedError(
            "Peiffer quotients are only computed for finite value groups")

    def evaluate(self, word, beta: GroupoidFunctor, gen_images, target: PreCrossedModule):
        """Image of a word under the transpose of u -> gen_images[u]."""
        x = None
        out = None
        for (t, u), e in word:
            y = self.base.tgt(t)
            if x is None:
                x = y
                out = target.c.value(beta.obj_map[x]).identity
            val = target.c.act(beta.arr_map[t], gen_images[u])
            grp = target.c.value(beta.obj_map[x])
            if e < 0:
                val = grp.inv(val)
            out = grp.mul(out, val)
        return out


def enumerate_functors(g: FiniteGroupoid, h: FiniteGroupoid):
    """All functors g -> h, by DFS over non-identity arrows."""
    results = []
    arrows = [f for f in sorted(g.arrows) if not g.is_identity(f)]

    def consistent(amap):
        for f1 in amap:
            for f2 in amap:
                if (f1, f2) in g.comp:
                    c = g.comp[(f1, f2)]
                    img = h.comp[(amap[f1], amap[f2])]
                    if c in amap:
                        if amap[c] != img:
                            return False
                    elif g.is_identity(c):
                        if img != h.id_map[h.arrows[amap[f2]][0]]:
                            return False
        return True

    for objs in itertools.product(h.objects, repeat=len(g.objects)):
        omap = dict(zip(g.objects, objs))
        amap0 = {g.id_map[x]: h.id_map[omap[x]] for x in g.objects}

        def dfs(k, amap):
            if k == len(arrows):
                results.append(GroupoidFunctor(g, h, omap, dict(amap), check=False))
                return
            f = arrows[k]
            x, y = g.arrows[f]
            for cand in h.hom(omap[x], omap[y]):
                amap[f] = cand
                if consistent(amap):
                    dfs(k + 1, amap)
                del amap[f]

        dfs(0, dict(amap0))
    return results


def enumerate_pxm_morphisms(p: PreCrossedModule, q: PreCrossedModule):
    """All morphisms of pre-crossed modules p -> q (all change-of-base functors)."""
    out = []
    for beta in enumerate_functors(p.base, q.base):
        per_obj = {}
        feasible = True
        for x in p.base.objects:
            gx = p.c.value(x)
            gy = q.c.value(beta.obj_map[x])
            homs = []
            for h in gx.homomorphisms_to(gy):
                if all(beta.arr_map[p.delta[x][u]] == q.delta[beta.obj_map[x]][h[u]]
                       for u in gx.elements):
                    homs.append(h)
            if not homs:
                feasible = False
                break
            per_obj[x] = homs
        if not feasible:
            continue
        objs = list(p.base.objects)
        for choice in itertools.product(*(per_obj[x] for x in objs)):
            comp = dict(zip(objs, choice))
            natural = True
            for t, (x, y) in p.base.arrows.items():
                for u in p.c.value(x).elements:
                    if comp[y][p.c.act(t, u)] != q.c.act(beta.arr_map[t], comp[x][u]):
                        natural = False
                        break
                if not natural:
                    break
            if natural:
                out.append((beta, comp))
    return out
