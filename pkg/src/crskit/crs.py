"""Crossed complexes and their Postnikov towers.

A complex stores its base groupoid, a crossed module at dimension 2 and
G-modules with boundaries above, up to an explicit finite rank; higher
levels are structurally zero.  Homology of the induced chain of
pi1-modules is computed at the integer-vector level: cycles are literal
null vectors of the boundary matrices, boundaries are column lattices
plus presentation relations.  That convention makes every kernel an SNF
computation and keeps the whole tower analysis finite.
"""

from __future__ import annotations

import itertools

from . import fgab
from . import intlin as il
from .coeffs import GModule, constant_gmodule
from .fgab import FgAbelian
from .groups import FiniteGroup
from .groupoid import FiniteGroupoid, GroupoidFunctor, discrete, identity_functor
from .xmod import CrossedModule, terminal_crossed_module


class Boundary3:
    """Boundary from an abelian level into the dimension-2 group, stored by
    generator images (element names of C2)."""

    def __init__(self, images):
        self.images = {x: list(v) for x, v in images.items()}

    def image_of_vector(self, xm: CrossedModule, x, vec):
        grp = xm.c.value(x)
        out = grp.identity
        for g, k in zip(self.images[x], vec):
            out = grp.mul(out, grp.power(g, int(k)))
        return out


class BoundaryN:
    """Boundary between abelian levels, stored as matrices per object."""

    def __init__(self, matrices):
        self.matrices = dict(matrices)

    def matrix(self, x):
        return self.matrices[x]


class CrossedComplex:
    def __init__(self, base: FiniteGroupoid, dim2, higher, rank, check=True):
        self.base = base
        self.dim2 = dim2
        self.higher = {int(n): v for n, v in higher.items()}
        self.rank = int(rank)
        if self.rank >= 2 and dim2 is None:
            raise ValueError("rank >= 2 requires a dimension-2 crossed module")
        for n in self.higher:
            if n < 3 or n > self.rank:
                raise ValueError(f"level {n} outside rank {self.rank}")
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid crossed complex: " + "; ".join(msgs[:3]))

    def module(self, n) -> GModule:
        if n in self.higher:
            return self.higher[n][0]
        return constant_gmodule(self.base, FgAbelian(0))

    def boundary(self, n):
        if n in self.higher:
            return self.higher[n][1]
        if n == 3:
            return Boundary3({x: [] for x in self.base.objects})
        return BoundaryN({x: il.zeros(self.module(n - 1).value(x).rank, 0)
                          for x in self.base.objects})

    def validate(self):
        msgs = []
        if self.rank < 2:
            if self.rank == 0:
                if any(not self.base.is_identity(f) for f in self.base.arrows):
                    msgs.append("rank-0 complex must have a discrete base")
            return (not msgs), msgs
        ok, sub = self.dim2.validate()
        if not ok:
            msgs.extend("dim2: " + m for m in sub)
        if self.dim2.peiffer_violations():
            msgs.append("dim2 fails the Peiffer identity")
        for n in sorted(self.higher):
            mod, bd = self.higher[n]
            okm, subm = mod.validate()
            if not okm:
                msgs.extend(f"level {n}: " + m for m in subm)
            if n == 3:
                msgs.extend(self._validate_boundary3(mod, bd))
            else:
                msgs.extend(self._validate_boundary_n(n, mod, bd))
        msgs.extend(self._validate_action_triviality())
        return (not msgs), msgs

    def _validate_boundary3(self, mod, bd):
        msgs = []
        xm = self.dim2
        for x in self.base.objects:
            imgs = bd.images.get(x)
            if imgs is None or len(imgs) != mod.value(x).rank:
                msgs.append(f"boundary 3 at {x} has wrong generator count")
                continue
            grp = xm.c.value(x)
            for g in imgs:
                if xm.delta[x][g] != self.base.id_map[x]:
                    msgs.append(f"delta2(d3) nonzero at {x}: {g}")
                if not grp.is_central_subset([g]):
                    msgs.append(f"image of d3 not central at {x}: {g}")
            for a in imgs:
                for b in imgs:
                    if grp.mul(a, b) != grp.mul(b, a):
                        msgs.append(f"d3 images do not commute at {x}")
            # relations must map to the identity
            rel = mod.value(x).relations
            for j in range(rel.shape[1]):
                if bd.image_of_vector(xm, x, il.col(rel, j)) != grp.identity:
                    msgs.append(f"d3 not defined on relations at {x}")
        for t, (x, y) in self.base.arrows.items():
            m = mod.actions[t]
            for j in range(mod.value(x).rank):
                e = [0] * mod.value(x).rank
                e[j] = 1
                lhs = bd.image_of_vector(self.dim2, y, il.col(il.matmul(
                    m, il.from_cols([e], mod.value(x).rank)), 0))
                rhs = self.dim2.c.act(t, bd.images[x][j])
                if lhs != rhs:
                    msgs.append(f"d3 not natural along {t}")
        return msgs

    def _validate_boundary_n(self, n, mod, bd):
        msgs = []
        prev = self.module(n - 1)
        for x in self.base.objects:
            m = bd.matrices.get(x)
            if m is None or m.shape != (prev.value(x).rank, mod.value(x).rank):
                msgs.append(f"boundary {n} at {x} has wrong shape")
                continue
            if not fgab.map_well_defined(mod.value(x), prev.value(x), m):
                msgs.append(f"boundary {n} not defined on relations at {x}")
        for t, (x, y) in self.base.arrows.items():
            lhs = il.matmul(bd.matrices[y], mod.actions[t])
            rhs = il.matmul(prev.actions[t], bd.matrices[x])
            if not fgab.maps_equal(mod.value(x), prev.value(y), lhs, rhs):
                msgs.append(f"boundary {n} not natural along {t}")
        # chain condition with the level below
        if n == 4:
            b3 = self.boundary(3)
            for x in self.base.objects:
                for j in range(mod.value(x).rank):
                    v = il.col(bd.matrices[x], j)
                    if b3.image_of_vector(self.dim2, x, v) \
                            != self.dim2.c.value(x).identity:
                        msgs.append(f"d3 d4 != 0 at {x}")
        elif n >= 5:
            below = self.boundary(n - 1)
            two = self.module(n - 2)
            for x in self.base.objects:
                compo = il.matmul(below.matrices[x], bd.matrices[x])
                if not fgab.maps_equal(mod.value(x), two.value(x), compo,
                                       il.zeros(two.value(x).rank,
                                                mod.value(x).rank)):
                    msgs.append(f"d{n-1} d{n} != 0 at {x}")
        return msgs

    def _validate_action_triviality(self):
        msgs = []
        for n in sorted(self.higher):
            mod = self.higher[n][0]
            for x in self.base.objects:
                for u in self.dim2.c.value(x).elements:
                    t = self.dim2.delta[x][u]
                    m = mod.actions[t]
                    if not fgab.maps_equal(mod.value(x), mod.value(x), m,
                                           il.eye(mod.value(x).rank)):
                        msgs.append(
                            f"im(delta2) acts nontrivially on level {n} at {x}")
                        break
        return msgs

    # -- induced chain over pi1 ------------------------------------------

    def pi0(self):
        return self.base.pi0()

    def pi1(self):
        if self.rank < 2:
            return self.base, identity_functor(self.base)
        return self.dim2.pi1()

    def induced_chain(self):
        return InducedChain(self)

    def homotopy_group(self, n):
        """pi_n as components (n=0), a groupoid (n=1) or a pi1-module."""
        if n == 0:
            return self.pi0()
        if n == 1:
            return self.pi1()
        if n > self.rank + 1:
            raise ValueError(f"homotopy degree {n} above rank+1")
        return self.induced_chain().homology(n)

    # -- reflectors, truncation, coskeleton ------------------------------

    def reflect(self, n):
        """The n-type P_n together with the unit morphism C -> P_n."""
        if n < 0:
            raise ValueError("negative reflection stage")
        if n == 0:
            blocks, comp_of = self.base.pi0()
            p0 = CrossedComplex(discrete(blocks.keys()), None, {}, 0, check=False)
            base_fun = GroupoidFunctor(
                self.base, p0.base,
                {x: comp_of[x] for x in self.base.objects},
                {f: p0.base.id_map[comp_of[self.base.src(f)]]
                 for f in self.base.arrows}, check=False)
            return p0, CrsMorphism(self, p0, base_fun, None, {}, check=False)
        if n == 1:
            p1g, q = self.pi1()
            p1 = CrossedComplex(p1g, None, {}, 1, check=False)
            return p1, CrsMorphism(self, p1, q, None, {}, check=False)
        if n >= self.rank:
            return self, identity_morphism(self)
        if n == 2:
            quot, proj = self._quotient_dim2_by_d3()
            p = CrossedComplex(self.base, quot, {}, 2, check=False)
            return p, CrsMorphism(self, p, identity_functor(self.base),
                                  proj, {}, check=False)
        mod, bd = self.higher[n]
        nxt = self.boundary(n + 1)
        values = {}
        for x in self.base.objects:
            values[x] = FgAbelian(mod.value(x).rank, il.hstack(
                [mod.value(x).relations, nxt.matrices[x]]))
        newmod = GModule(self.base, values, dict(mod.actions), check=False)
        keep = {k: self.higher[k] for k in self.higher if 3 <= k < n}
        keep[n] = (newmod, self.boundary(n))
        p = CrossedComplex(self.base, self.dim2, keep, n, check=False)
        comps = {k: {x: il.eye(self.module(k).value(x).rank)
                     for x in self.base.objects}
                 for k in range(3, n + 1) if k <= self.rank}
        id2 = {x: {a: a for a in self.dim2.c.value(x).elements}
               for x in self.base.objects}
        return p, CrsMorphism(self, p, identity_functor(self.base), id2,
                              comps, check=False)

    def _quotient_dim2_by_d3(self):
        xm = self.dim2
        bd = self.boundary(3)
        subgroups = {}
        for x in self.base.objects:
            grp = xm.c.value(x)
            gens = set(bd.images.get(x, []))
            sub = grp.subgroup(gens) if gens else {grp.identity}
            if not grp.is_central_subset(sub):
                raise ValueError(f"im(d3) not central at {x}")
            subgroups[x] = sub
        values = {}
        reps = {}
        for x in self.base.objects:
            q, rep = xm.c.value(x).quotient(subgroups[x])
            values[x] = q
            reps[x] = rep
        actions = {}
        for t, (x, y) in self.base.arrows.items():
            actions[t] = {reps[x][a]: reps[y][xm.c.act(t, a)]
                          for a in xm.c.value(x).elements}
        from .coeffs import GGroup, GGroupMorphism
        qgg = GGroup(self.base, values, actions, check=False)
        delta = {}
        for x in self.base.objects:
            delta[x] = {reps[x][a]: xm.delta[x][a]
                        for a in xm.c.value(x).elements}
        quot = CrossedModule(self.base, qgg, delta, check=False)
        proj = {x: dict(reps[x]) for x in self.base.objects}
        return quot, proj

    def truncate(self, n):
        if n < 1:
            raise ValueError("truncation level must be >= 1")
        if n >= self.rank:
            return self
        if n == 1:
            return CrossedComplex(self.base, None, {}, 1, check=False)
        keep = {k: v for k, v in self.higher.items() if k <= n}
        return CrossedComplex(self.base, self.dim2, keep, n, check=False)

    def coskeleton(self, n):
        """Insert the kernel of the top boundary at level n+1."""
        if n < 1:
            raise ValueError("coskeleton level must be >= 1")
        if self.rank > n:
            raise ValueError("coskeleton input must have rank <= n")
        if n == 1:
            return CrossedComplex(self.base, terminal_crossed_module(self.base),
                                  {}, 2, check=False)
        if n == 2:
            return self._cosk2()
        mod = self.module(n)
        bdmat = self._boundary_matrices(n)
        bases = {x: il.hermite(il.nullspace(bdmat[x])) for x in self.base.objects}
        values = {x: FgAbelian(bases[x].shape[1]) for x in self.base.objects}
        actions = {}
        for t, (x, y) in self.base.arrows.items():
            target = il.matmul(mod.actions[t], bases[x])
            sol = il.solve(bases[y], target)
            if sol is None:
                raise ValueError(f"kernel not stable under action of {t}")
            actions[t] = sol
        kmod = GModule(self.base, values, actions, check=False)
        keep = dict(self.higher)
        keep[n + 1] = (kmod, BoundaryN(bases))
        return CrossedComplex(self.base, self.dim2, keep, n + 1, check=False)

    def _cosk2(self):
        xm = self.dim2
        values = {}
        bridges = {}
        for x in self.base.objects:
            elems = xm.kernel_elements(x)
            grp = xm.c.value(x)
            mult = {(a, b): grp.mul(a, b) for a in elems for b in elems}
            sub = FiniteGroup(elems, mult, check=False)
            pres, to_vec, from_vec = fgab.finite_abelian_presentation(sub)
            values[x] = pres
            bridges[x] = (to_vec, from_vec)
        actions = {}
        for t, (x, y) in self.base.arrows.items():
            cols = []
            for j in range(values[x].rank):
                e = [0] * values[x].rank
                e[j] = 1
                elem = bridges[x][1](tuple(e))
                cols.append(list(bridges[y][0](xm.c.act(t, elem))))
            actions[t] = il.from_cols(cols, values[y].rank)
        kmod = GModule(self.base, values, actions, check=False)
        images = {}
        for x in self.base.objects:
            imgs = []
            for j in range(values[x].rank):
                e = [0] * values[x].rank
                e[j] = 1
                imgs.append(bridges[x][1](tuple(e)))
            images[x] = imgs
        return CrossedComplex(self.base, self.dim2, {3: (kmod, Boundary3(images))},
                              3, check=False)

    def _boundary_matrices(self, n):
        """Boundary at level n as matrices into the induced presentation below.

        For n = 3 the target presentation is pi2 of the base crossed module;
        for n = 2 the map is into the zero module.
        """
        chain = self.induced_chain()
        return {x: chain.matrix(n, x) for x in self.base.objects}

    # -- tower -----------------------------------------------------------

    def tower(self):
        return Tower(self)

    def fiber(self, stage, x):
        return Tower(self).fiber(stage, x)

    def levels_equal(self, other):
        """Literal levelwise equality of two complexes (same tables)."""
        if self.rank != other.rank:
            return False
        if sorted(self.base.arrows.items()) != sorted(other.base.arrows.items()):
            return False
        if self.rank >= 2:
            a, b = self.dim2, other.dim2
            for x in self.base.objects:
                if a.c.value(x).elements != b.c.value(x).elements:
                    return False
                if a.delta[x] != b.delta[x]:
                    return False
            for t in self.base.arrows:
                if a.c.actions[t] != b.c.actions[t]:
                    return False
        for n in range(3, self.rank + 1):
            ma, mb = self.module(n), other.module(n)
            for x in self.base.objects:
                if ma.value(x).rank != mb.value(x).rank:
                    return False
                if not il.mat_eq(il.hermite(ma.value(x).relations),
                                 il.hermite(mb.value(x).relations)):
                    return False
            ba, bb = self.boundary(n), other.boundary(n)
            if n == 3:
                if any(ba.images[x] != bb.images[x] for x in self.base.objects):
                    return False
            else:
                if any(not il.mat_eq(ba.matrices[x], bb.matrices[x])
                       for x in self.base.objects):
                    return False
        return True


class InducedChain:
    """The chain of pi1-modules determined by a crossed complex.

    Level 2 holds pi2 of the base crossed module; levels n >= 3 reuse the
    complex presentations.  matrix(n, x) is the boundary of level n at x
    in these coordinates.
    """

    def __init__(self, crs: CrossedComplex):
        self.crs = crs
        if crs.rank >= 2:
            self.p1, self.q = crs.pi1()
            self.pi2_mod, self.bridges = crs.dim2.pi2()
        else:
            self.p1, self.q = crs.pi1()
            self.pi2_mod, self.bridges = None, {}
        self._matrices = {}
        self._check_descent()

    def presentation(self, n, x):
        if n < 2 or n > self.crs.rank:
            return FgAbelian(0)
        if n == 2:
            return self.pi2_mod.value(x) if self.pi2_mod else FgAbelian(0)
        return self.crs.module(n).value(x)

    def matrix(self, n, x):
        """Boundary matrix level n -> level n-1 at x (n >= 2)."""
        key = (n, x)
        if key in self._matrices:
            return self._matrices[key]
        if n <= 2 or n > self.crs.rank:
            m = il.zeros(self.presentation(n - 1, x).rank,
                         self.presentation(n, x).rank)
        elif n == 3:
            bd = self.crs.boundary(3)
            to_vec = self.bridges[x][0]
            cols = [list(to_vec(g)) for g in bd.images[x]]
            m = il.from_cols(cols, self.presentation(2, x).rank)
        else:
            m = self.crs.boundary(n).matrices[x]
        self._matrices[key] = m
        return m

    def _check_descent(self):
        """Verify levels >= 3 descend to pi1 (all arrow lifts act equally)."""
        for n in range(3, self.crs.rank + 1):
            mod = self.crs.module(n)
            for tq, (x, y) in self.p1.arrows.items():
                lifts = [t for t in self.crs.base.arrows
                         if self.q.arr_map[t] == tq]
                first = mod.actions[lifts[0]]
                for t in lifts[1:]:
                    if not fgab.maps_equal(mod.value(x), mod.value(y),
                                           first, mod.actions[t]):
                        raise ValueError(f"level {n} does not descend along {tq}")

    def action_matrix(self, n, tq):
        """Action of a pi1 arrow on level n (any lift of the arrow)."""
        if n == 2:
            return self.pi2_mod.actions[tq]
        lift = next(t for t in self.crs.base.arrows
                    if self.q.arr_map[t] == tq)
        return self.crs.module(n).actions[lift]

    def homology(self, n, honest=False):
        """H_n as a module over pi1 in canonical form.

        By default cycles are literal null vectors of the boundary matrix;
        with honest=True they are the full preimage of the relation lattice
        below (the categorical kernel), which is what exact sequences need.
        """
        data = {}
        for x in self.crs.base.objects:
            pres = self.presentation(n, x)
            out_m = self.matrix(n, x)
            if honest:
                below = self.presentation(n - 1, x)
                cycles = fgab.preimage_lattice(pres, below, out_m)
            else:
                cycles = il.hermite(il.nullspace(out_m))
            bound = il.hermite(il.hstack([self.matrix(n + 1, x), pres.relations]))
            denom = il.lattice_intersection(bound, cycles) \
                if cycles.shape[1] else il.zeros(pres.rank, 0)
            coords = il.solve(cycles, denom) if denom.shape[1] else \
                il.zeros(cycles.shape[1], 0)
            if coords is None:
                raise ValueError("boundary lattice escapes the cycle lattice")
            big = FgAbelian(cycles.shape[1], coords)
            small, to_m, from_m = big.simplified()
            data[x] = (cycles, denom, big, small, to_m, from_m)
        values = {x: data[x][3] for x in self.crs.base.objects}
        actions = {}
        for tq, (x, y) in self.p1.arrows.items():
            act = self.action_matrix(n, tq) if n <= self.crs.rank else None
            cyc_x, _, _, small_x, to_x, from_x = data[x]
            cyc_y, den_y, _, small_y, to_y, from_y = data[y]
            if small_x.rank == 0 and small_y.rank == 0:
                actions[tq] = il.zeros(0, 0)
                continue
            moved = il.matmul(act, cyc_x)
            stacked = il.hstack([cyc_y, den_y])
            sol = il.solve(stacked, moved)
            if sol is None:
                raise ValueError(f"homology not stable under {tq}")
            on_cycles = sol[:cyc_y.shape[1], :]
            actions[tq] = il.matmul(to_y, il.matmul(on_cycles, from_x))
        return HomologyModule(GModule(self.p1, values, actions, check=False),
                              {x: (d[0], d[1], d[4], d[5]) for x, d in data.items()})


class HomologyModule:
    """A pi1-module in invariant form plus cycle-level representation maps."""

    def __init__(self, module: GModule, rep_data):
        self.module = module
        self.rep_data = rep_data

    def value(self, x):
        return self.module.value(x)

    def invariant_string(self, x):
        return self.module.value(x).invariant_string()

    def class_of(self, x, chain_vector):
        """Canonical coordinates of a cycle given in chain coordinates."""
        cycles, denom, to_m, _ = self.rep_data[x]
        v = il.from_cols([list(chain_vector)], cycles.shape[0])
        stacked = il.hstack([cycles, denom]) if denom.shape[1] else cycles
        sol = il.solve(stacked, v)
        if sol is None:
            raise ValueError("vector is not a cycle")
        coords = [sol[i, 0] for i in range(cycles.shape[1])]
        out = tuple(sum(to_m[i, j] * coords[j] for j in range(len(coords)))
                    for i in range(to_m.shape[0]))
        return self.module.value(x).normal_form(out)

    def representative(self, x, class_vector):
        cycles, _, _, from_m = self.rep_data[x]
        lift = [sum(from_m[i, j] * class_vector[j]
                    for j in range(from_m.shape[1]))
                for i in range(from_m.shape[0])]
        return tuple(sum(cycles[i, j] * lift[j] for j in range(cycles.shape[1]))
                     for i in range(cycles.shape[0]))


class CrsMorphism:
    """Chain map of crossed complexes over a change-of-base functor."""

    def __init__(self, dom, cod, base_functor, comp2, compn, check=True):
        self.dom = dom
        self.cod = cod
        self.base_functor = base_functor
        self.comp2 = comp2
        self.compn = {int(k): v for k, v in compn.items()}
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid morphism: " + "; ".join(msgs[:3]))

    def validate(self):
        msgs = []
        ok, sub = self.base_functor.validate()
        if not ok:
            msgs.extend(sub)
        f = self.base_functor
        if self.dom.rank >= 2 and self.cod.rank >= 2:
            if self.comp2 is None:
                msgs.append("missing level-2 component")
            else:
                a, b = self.dom.dim2, self.cod.dim2
                for x in self.dom.base.objects:
                    fx = f.obj_map[x]
                    m = self.comp2[x]
                    ga, gb = a.c.value(x), b.c.value(fx)
                    for u in ga.elements:
                        for v in ga.elements:
                            if m[ga.mul(u, v)] != gb.mul(m[u], m[v]):
                                msgs.append(f"level-2 component at {x} not a hom")
                                break
                    for u in ga.elements:
                        if f.arr_map[a.delta[x][u]] != b.delta[fx][m[u]]:
                            msgs.append(f"delta square fails at {x}")
                            break
                for t, (x, y) in self.dom.base.arrows.items():
                    for u in self.dom.dim2.c.value(x).elements:
                        lhs = self.comp2[y][self.dom.dim2.c.act(t, u)]
                        rhs = self.cod.dim2.c.act(f.arr_map[t], self.comp2[x][u])
                        if lhs != rhs:
                            msgs.append(f"level-2 naturality fails at {t}")
                            break
        for n in range(3, self.dom.rank + 1):
            dm = self.dom.module(n)
            cm = self.cod.module(n) if n <= self.cod.rank else None
            comp = self.compn.get(n)
            if cm is None or all(cm.value(f.obj_map[x]).rank == 0
                                 for x in self.dom.base.objects):
                continue
            if comp is None:
                msgs.append(f"missing level-{n} component")
                continue
            for x in self.dom.base.objects:
                fx = f.obj_map[x]
                if not fgab.map_well_defined(dm.value(x), cm.value(fx), comp[x]):
                    msgs.append(f"level-{n} component ill-defined at {x}")
            for t, (x, y) in self.dom.base.arrows.items():
                lhs = il.matmul(comp[y], dm.actions[t])
                rhs = il.matmul(cm.actions[f.arr_map[t]], comp[x])
                if not fgab.maps_equal(dm.value(x), cm.value(f.obj_map[y]),
                                       lhs, rhs):
                    msgs.append(f"level-{n} naturality fails at {t}")
            # boundary square with the level below
            if n == 3 and self.cod.rank >= 2 and self.comp2 is not None:
                bd_d = self.dom.boundary(3)
                bd_c = self.cod.boundary(3)
                for x in self.dom.base.objects:
                    fx = f.obj_map[x]
                    for j in range(dm.value(x).rank):
                        e = [0] * dm.value(x).rank
                        e[j] = 1
                        lhs = self.comp2[x][bd_d.image_of_vector(
                            self.dom.dim2, x, e)]
                        img = il.col(il.matmul(
                            comp[x], il.from_cols([e], dm.value(x).rank)), 0)
                        rhs = bd_c.image_of_vector(self.cod.dim2, fx, img)
                        if lhs != rhs:
                            msgs.append(f"boundary square (3) fails at {x}")
            elif n >= 4 and n - 1 <= self.cod.rank:
                below = self.compn.get(n - 1)
                if below is None:
                    continue
                bd_d = self.dom.boundary(n)
                bd_c = self.cod.boundary(n)
                for x in self.dom.base.objects:
                    fx = f.obj_map[x]
                    lhs = il.matmul(below[x], bd_d.matrices[x])
                    rhs = il.matmul(bd_c.matrices[fx], comp[x])
                    if not fgab.maps_equal(dm.value(x),
                                           self.cod.module(n - 1).value(fx),
                                           lhs, rhs):
                        msgs.append(f"boundary square ({n}) fails at {x}")
        return (not msgs), msgs

    def is_fibration(self):
        """Base functor star-surjective and all level components surjective."""
        if not self.base_functor.is_fibration():
            return False
        f = self.base_functor
        if self.cod.rank >= 2 and self.dom.rank >= 2:
            for x in self.dom.base.objects:
                if set(self.comp2[x].values()) != \
                        set(self.cod.dim2.c.value(f.obj_map[x]).elements):
                    return False
        for n in range(3, self.cod.rank + 1):
            comp = self.compn.get(n)
            for x in self.dom.base.objects:
                fx = f.obj_map[x]
                target = self.cod.module(n).value(fx)
                if target.rank == 0:
                    continue
                if comp is None:
                    return False
                cok, _ = fgab.cokernel(self.dom.module(n).value(x), target,
                                       comp[x])
                if not cok.is_trivial():
                    return False
        return True


def identity_morphism(c: CrossedComplex):
    comp2 = None
    if c.rank >= 2:
        comp2 = {x: {a: a for a in c.dim2.c.value(x).elements}
                 for x in c.base.objects}
    compn = {n: {x: il.eye(c.module(n).value(x).rank) for x in c.base.objects}
             for n in range(3, c.rank + 1)}
    return CrsMorphism(c, c, identity_functor(c.base), comp2, compn, check=False)


class Tower:
    """The Postnikov tower of a complex: stages P_0..P_N and its maps."""

    def __init__(self, crs: CrossedComplex):
        self.crs = crs
        self.stages = {}
        self.units = {}
        for n in range(0, crs.rank + 1):
            stage, unit = crs.reflect(n)
            self.stages[n] = stage
            self.units[n] = unit
        self.stages[crs.rank + 1] = crs
        self.units[crs.rank + 1] = identity_morphism(crs)
        self.maps = {n + 1: self._eta(n + 1) for n in range(0, crs.rank + 1)}

    def _eta(self, stage):
        """eta_stage: P_stage -> P_{stage-1}."""
        top = self.stages[stage]
        bot = self.stages[stage - 1]
        n = stage - 1
        if n == 0:
            _, unit = top.reflect(0)
            return CrsMorphism(top, bot, unit.base_functor, None, {}, check=False)
        if n == 1:
            _, unit = top.reflect(1)
            return CrsMorphism(top, bot, unit.base_functor, None, {}, check=False)
        _, unit = top.reflect(n)
        return CrsMorphism(top, bot, unit.base_functor, unit.comp2,
                           unit.compn, check=False)

    def limit_reconstruction(self):
        """Rebuild the complex from the tower, taking level k from stage k+1
        (the unique stage where that level appears unquotiented)."""
        n = self.crs.rank
        base = self.stages[min(2, n + 1)].base
        dim2 = self.stages[min(3, n + 1)].dim2 if n >= 2 else None
        higher = {}
        for k in range(3, n + 1):
            src = self.stages[k + 1]
            higher[k] = (src.module(k), src.boundary(k))
        return CrossedComplex(base, dim2, higher, n, check=False)

    def fiber(self, stage, x):
        """The fiber of eta_stage over x, with its homotopy groups."""
        crs = self.crs
        n = stage - 1
        if x not in crs.base.objects and n >= 1:
            raise KeyError(f"unknown object {x}")
        if n == 0:
            p1g, _ = crs.pi1()
            blocks, comp_of = p1g.pi0()
            member = blocks[comp_of[x]] if x in comp_of else blocks[x]
            sub = p1g.full_subgroupoid(member)
            homotopy = {0: "point", 1: sub.end_group(member[0])}
            return FiberReport(stage, x, ("groupoid", sub), homotopy)
        if n == 1:
            p2 = self.stages[2]
            xm = p2.dim2
            im_elems = sorted({xm.delta[x][u] for u in xm.c.value(x).elements})
            grp = crs.base.end_group(x)
            mult = {(a, b): grp.mul(a, b) for a in im_elems for b in im_elems}
            imgrp = FiniteGroup(im_elems, mult, check=False)
            fiber_pi2 = [u for u in xm.c.value(x).elements
                         if xm.delta[x][u] == crs.base.id_map[x]]
            elems = xm.c.value(x).elements
            mult2 = {(a, b): xm.c.value(x).mul(a, b) for a in elems for b in elems}
            ker = FiniteGroup(fiber_pi2,
                              {(a, b): xm.c.value(x).mul(a, b)
                               for a in fiber_pi2 for b in fiber_pi2},
                              check=False)
            pres, _, _ = fgab.finite_abelian_presentation(ker)
            surj = len({xm.delta[x][u] for u in elems}) == len(im_elems)
            homotopy = {0: "point", 1: "trivial" if surj else "nontrivial",
                        2: pres.invariant_string()}
            return FiberReport(stage, x, ("reduced_xmod", (imgrp, elems)), homotopy)
        chain = crs.induced_chain()
        top_pres = FgAbelian(
            chain.presentation(n + 1, x).rank,
            il.hstack([chain.presentation(n + 1, x).relations,
                       chain.matrix(n + 2, x)]))
        pre = il.hermite(fgab.preimage_lattice(
            chain.presentation(n + 1, x), chain.presentation(n, x),
            chain.matrix(n + 1, x)))
        im_big = FgAbelian(chain.presentation(n + 1, x).rank, pre)
        im_small, to_m, _ = im_big.simplified()
        h_top = _two_term_homology(top_pres, im_small, to_m)
        h_bot_cycles = il.eye(im_small.rank)
        h_bot = il.quotient_invariants(
            h_bot_cycles,
            il.hermite(il.hstack([to_m, im_small.relations])))
        homotopy = {n + 1: h_top, n: _inv_string(h_bot)}
        return FiberReport(stage, x, ("chain", (top_pres, im_small, to_m)),
                           homotopy)


def _two_term_homology(dom: FgAbelian, cod: FgAbelian, m):
    cycles = il.hermite(il.nullspace(m))
    if cycles.shape[1] == 0:
        return "0"
    denom = il.lattice_intersection(dom.relations, cycles)
    inv = il.quotient_invariants(cycles, denom)
    return _inv_string(inv)


def _inv_string(inv):
    free, tors = inv
    parts = []
    if free:
        parts.append(f"Z^{free}")
    parts.extend(f"Z/{d}" for d in tors)
    return " + ".join(parts) if parts else "0"


class FiberReport:
    def __init__(self, stage, x, payload, homotopy):
        self.stage = stage
        self.x = x
        self.payload = payload
        self.homotopy = homotopy

    def concentrated_degree(self):
        nontrivial = []
        for k, v in self.homotopy.items():
            if isinstance(v, FiniteGroup):
                if len(v) > 1:
                    nontrivial.append(k)
            elif v not in ("0", "point", "trivial"):
                nontrivial.append(k)
        if not nontrivial:
            return None
        if len(nontrivial) == 1:
            return nontrivial[0]
        raise AssertionError(f"fiber not concentrated: {self.homotopy}")


# -- free objects and the cotriple -------------------------------------------


def free_ncrs(labels, fmap, tail: CrossedComplex, n):
    """Free n-crossed complex on generators over a rank n-1 tail.

    fmap: label -> (object z, value), the value an element name in
    ker(delta2) for n = 4... = 3, or a kernel vector of C_{n-1}(z) for
    higher n.  Level n is free abelian on pairs (pi1-arrow into x, label).
    """
    if n < 3:
        raise ValueError("free_ncrs needs n >= 3")
    if tail.rank != n - 1:
        raise ValueError("tail must have rank n-1")
    p1, q = tail.pi1()
    labels = list(labels)
    gens = {}
    for x in tail.base.objects:
        out = []
        for t in sorted(p1.arrows):
            z, y = p1.arrows[t]
            if y != x:
                continue
            for u in labels:
                if fmap[u][0] == z:
                    out.append((t, u))
        gens[x] = out
    values = {x: FgAbelian(len(gens[x])) for x in tail.base.objects}
    actions = {}
    for s, (x, y) in tail.base.arrows.items():
        sq = q.arr_map[s]
        cols = []
        for (t, u) in gens[x]:
            moved = (p1.comp[(sq, t)], u)
            e = [0] * len(gens[y])
            e[gens[y].index(moved)] = 1
            cols.append(e)
        actions[s] = il.from_cols(cols, len(gens[y]))
    mod = GModule(tail.base, values, actions, check=False)

    if n == 3:
        images = {}
        for x in tail.base.objects:
            imgs = []
            for (t, u) in gens[x]:
                lift = next(a for a in tail.base.arrows
                            if q.arr_map[a] == t)
                imgs.append(tail.dim2.c.act(lift, fmap[u][1]))
            images[x] = imgs
        bd = Boundary3(images)
    else:
        mats = {}
        prev = tail.module(n - 1)
        for x in tail.base.objects:
            cols = []
            for (t, u) in gens[x]:
                lift = next(a for a in tail.base.arrows
                            if q.arr_map[a] == t)
                cols.append(list(prev.act(lift, fmap[u][1])))
            mats[x] = il.from_cols(cols, prev.value(x).rank)
        bd = BoundaryN(mats)
    higher = dict(tail.higher)
    higher[n] = (mod, bd)
    out = CrossedComplex(tail.base, tail.dim2, higher, n, check=False)
    return out, gens


def cotriple_step(crs: CrossedComplex, n=None):
    """G_n = F_n U_n applied to a rank-n complex with finite top level.

    Returns (free complex, counit level-n matrices, generator lists).
    """
    from .groups import SizeCapError, size_cap
    n = crs.rank if n is None else n
    if n < 3 or n != crs.rank:
        raise ValueError("cotriple step applies at the top level, n >= 3")
    mod = crs.module(n)
    if not mod.is_finite():
        raise SizeCapError("top level is infinite; cotriple step not materializable")
    total = sum(mod.value(x).order() for x in crs.base.objects)
    if total > size_cap():
        raise SizeCapError("top level too large for cotriple step")
    labels = []
    fmap = {}
    for z in crs.base.objects:
        for v in mod.value(z).elements():
            lab = f"{z}:{','.join(map(str, v))}"
            labels.append(lab)
            if n == 3:
                img = crs.boundary(3).image_of_vector(crs.dim2, z, v)
                fmap[lab] = (z, img)
            else:
                fmap[lab] = (z, tuple(il.col(il.matmul(
                    crs.boundary(n).matrices[z],
                    il.from_cols([list(v)], mod.value(z).rank)), 0)))
    tail = crs.truncate(n - 1)
    free_crs, gens = free_ncrs(labels, fmap, tail, n)
    p1, q = crs.pi1()
    counit = {}
    for x in crs.base.objects:
        cols = []
        for (t, lab) in gens[x]:
            z, vtxt = lab.split(":")
            v = tuple(int(s) for s in vtxt.split(",")) if vtxt else ()
            lift = next(a for a in crs.base.arrows if q.arr_map[a] == t)
            cols.append(list(mod.act(lift, v)))
        counit[x] = il.from_cols(cols, mod.value(x).rank)
    return free_crs, counit, gens
