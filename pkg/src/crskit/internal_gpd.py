"""Internal groupoids in n-crossed complexes with fixed lower truncation.

A rank-(n+1) complex is the same thing as an internal groupoid in rank-n
complexes whose object and arrow complexes share their (n-1)-truncation
and whose structure maps are the identity there.  Only the level-n data
is stored.  For n >= 3 that data is a pair of modules with matrices; for
n = 2 the arrows object is the product of a module part and the
dimension-2 group, kept in hybrid form so the module part may be
infinite.  Composition is forced: b * id(s(b))^-1 * a.
"""

from __future__ import annotations

from . import fgab
from . import intlin as il
from .coeffs import GGroup, GModule
from .crs import Boundary3, BoundaryN, CrossedComplex
from .fgab import FgAbelian
from .groups import FiniteGroup
from .xmod import CrossedModule


class InternalGroupoidMod:
    """Level-n data of an internal groupoid in Crs_n for n >= 3."""

    def __init__(self, tail: CrossedComplex, n, obj_mod, obj_bd, arr_mod, arr_bd,
                 s_mats, t_mats, id_mats, block=None, check=True):
        self.tail = tail
        self.n = int(n)
        self.obj_mod = obj_mod
        self.obj_bd = obj_bd
        self.arr_mod = arr_mod
        self.arr_bd = arr_bd
        self.s_mats = dict(s_mats)
        self.t_mats = dict(t_mats)
        self.id_mats = dict(id_mats)
        self.block = block
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid internal groupoid: " + "; ".join(msgs[:3]))

    def objects_complex(self):
        higher = dict(self.tail.higher)
        higher[self.n] = (self.obj_mod, self.obj_bd)
        return CrossedComplex(self.tail.base, self.tail.dim2, higher,
                              self.n, check=False)

    def arrows_complex(self):
        higher = dict(self.tail.higher)
        higher[self.n] = (self.arr_mod, self.arr_bd)
        return CrossedComplex(self.tail.base, self.tail.dim2, higher,
                              self.n, check=False)

    def validate(self):
        msgs = []
        for c, nm in ((self.objects_complex(), "objects"),
                      (self.arrows_complex(), "arrows")):
            ok, sub = c.validate()
            if not ok:
                msgs.extend(f"{nm}: {m}" for m in sub)
        base = self.tail.base
        for mats, nm, dommod, codmod in (
                (self.s_mats, "s", self.arr_mod, self.obj_mod),
                (self.t_mats, "t", self.arr_mod, self.obj_mod),
                (self.id_mats, "id", self.obj_mod, self.arr_mod)):
            for x in base.objects:
                m = mats.get(x)
                if m is None or m.shape != (codmod.value(x).rank,
                                            dommod.value(x).rank):
                    msgs.append(f"{nm} has wrong shape at {x}")
                    continue
                if not fgab.map_well_defined(dommod.value(x), codmod.value(x), m):
                    msgs.append(f"{nm} ill-defined at {x}")
            for t, (x, y) in base.arrows.items():
                lhs = il.matmul(mats[y], dommod.actions[t])
                rhs = il.matmul(codmod.actions[t], mats[x])
                if not fgab.maps_equal(dommod.value(x), codmod.value(y), lhs, rhs):
                    msgs.append(f"{nm} not natural along {t}")
        for x in base.objects:
            r0 = self.obj_mod.value(x)
            si = il.matmul(self.s_mats[x], self.id_mats[x])
            ti = il.matmul(self.t_mats[x], self.id_mats[x])
            if not fgab.maps_equal(r0, r0, si, il.eye(r0.rank)):
                msgs.append(f"s id != 1 at {x}")
            if not fgab.maps_equal(r0, r0, ti, il.eye(r0.rank)):
                msgs.append(f"t id != 1 at {x}")
            msgs.extend(self._boundary_square(x, self.s_mats[x], "s"))
            msgs.extend(self._boundary_square(x, self.t_mats[x], "t"))
        return (not msgs), msgs

    def _boundary_square(self, x, struct, nm):
        """The truncation components are identities, so the boundaries of the
        arrow complex must factor through the structural map."""
        msgs = []
        arr = self.arr_mod.value(x)
        if self.n == 3:
            xm = self.tail.dim2
            for j in range(arr.rank):
                e = [0] * arr.rank
                e[j] = 1
                lhs = self.arr_bd.image_of_vector(xm, x, e)
                moved = il.col(il.matmul(struct, il.from_cols([e], arr.rank)), 0)
                rhs = self.obj_bd.image_of_vector(xm, x, moved)
                if lhs != rhs:
                    msgs.append(f"boundary square for {nm} fails at {x}")
                    break
        else:
            prev = self.tail.module(self.n - 1)
            lhs = self.arr_bd.matrices[x]
            rhs = il.matmul(self.obj_bd.matrices[x], struct)
            if not fgab.maps_equal(arr, prev.value(x), lhs, rhs):
                msgs.append(f"boundary square for {nm} fails at {x}")
        return msgs


class InternalGroupoidXm2:
    """Internal groupoid in crossed modules, hybrid form (n = 2).

    The objects part is a crossed module; the arrows part is the product
    of a module part M and the dimension-2 group, with s(v, c) = c,
    t(v, c) = tau(v) c, id(c) = (0, c).  tau is stored by generator
    images and must land in the center, kill delta2 and be natural.
    """

    def __init__(self, base, obj_xm: CrossedModule, top_mod: GModule,
                 tau: Boundary3, check=True):
        self.base = base
        self.n = 2
        self.obj_xm = obj_xm
        self.top_mod = top_mod
        self.tau = tau
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid internal groupoid: " + "; ".join(msgs[:3]))

    def tau_of(self, x, vec):
        return self.tau.image_of_vector(self.obj_xm, x, vec)

    def validate(self):
        # the hybrid is exactly a rank-3 complex datum, so reuse its validator
        probe = CrossedComplex(self.base, self.obj_xm,
                               {3: (self.top_mod, self.tau)}, 3, check=False)
        return probe.validate()

    def objects_complex(self):
        return CrossedComplex(self.base, self.obj_xm, {}, 2, check=False)


def gpd_n(crs: CrossedComplex):
    """Regard a rank-(n+1) complex as an internal groupoid in Crs_n."""
    if crs.rank < 3:
        raise ValueError("gpd_n needs rank >= 3 (use gpd_of_xm below that)")
    n = crs.rank - 1
    top_mod, top_bd = crs.higher.get(crs.rank, (None, None))
    if top_mod is None:
        from .coeffs import constant_gmodule
        top_mod = constant_gmodule(crs.base, FgAbelian(0))
        top_bd = crs.boundary(crs.rank)
    if n == 2:
        return InternalGroupoidXm2(crs.base, crs.dim2, top_mod, top_bd)
    tail = crs.truncate(n - 1)
    mid_mod, mid_bd = crs.higher.get(n, (None, None))
    if mid_mod is None:
        from .coeffs import constant_gmodule
        mid_mod = constant_gmodule(crs.base, FgAbelian(0))
        mid_bd = crs.boundary(n)
    base = crs.base
    arr_vals, arr_acts = {}, {}
    s_mats, t_mats, id_mats = {}, {}, {}
    arr_bd_data = {}
    for x in base.objects:
        ra = top_mod.value(x)
        rb = mid_mod.value(x)
        arr_vals[x] = FgAbelian(ra.rank + rb.rank,
                                block_diag(ra.relations, rb.relations))
        s_mats[x] = il.hstack([il.zeros(rb.rank, ra.rank), il.eye(rb.rank)])
        t_mats[x] = il.hstack([top_bd.matrices[x], il.eye(rb.rank)])
        id_mats[x] = il.vstack([il.zeros(ra.rank, rb.rank), il.eye(rb.rank)])
        if n == 3:
            arr_bd_data[x] = [crs.dim2.c.value(x).identity] * ra.rank \
                + list(mid_bd.images[x])
        else:
            arr_bd_data[x] = il.hstack(
                [il.zeros(crs.module(n - 1).value(x).rank, ra.rank),
                 mid_bd.matrices[x]])
    for t in base.arrows:
        arr_acts[t] = block_diag(top_mod.actions[t], mid_mod.actions[t])
    arr_mod = GModule(base, arr_vals, arr_acts, check=False)
    arr_bd = Boundary3(arr_bd_data) if n == 3 else BoundaryN(arr_bd_data)
    return InternalGroupoidMod(tail, n, mid_mod, mid_bd, arr_mod, arr_bd,
                               s_mats, t_mats, id_mats,
                               block=(top_mod, top_bd))


def block_diag(a, b):
    out = il.zeros(a.shape[0] + b.shape[0], a.shape[1] + b.shape[1])
    out[:a.shape[0], :a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def crs_n(g):
    """Top level = ker(s), boundary = t restricted; exact on block forms."""
    if isinstance(g, InternalGroupoidXm2):
        return CrossedComplex(g.base, g.obj_xm, {3: (g.top_mod, g.tau)}, 3,
                              check=False)
    n = g.n
    base = g.tail.base
    if g.block is not None:
        top_mod, top_bd = g.block
        higher = dict(g.tail.higher)
        higher[n] = (g.obj_mod, g.obj_bd)
        higher[n + 1] = (top_mod, top_bd)
        return CrossedComplex(base, g.tail.dim2, higher, n + 1, check=False)
    values, bases = {}, {}
    for x in base.objects:
        arr = g.arr_mod.value(x)
        lat = kernel_basis(g, x)
        rel_cols = []
        for j in range(arr.relations.shape[1]):
            c = il.from_cols([il.col(arr.relations, j)], arr.rank)
            sol = il.solve(lat, c)
            if sol is None:
                raise ValueError("arrow relations escape the kernel lattice")
            rel_cols.append(il.col(sol, 0))
        values[x] = FgAbelian(lat.shape[1], il.from_cols(rel_cols, lat.shape[1]))
        bases[x] = lat
    actions = {}
    for t, (x, y) in base.arrows.items():
        sol = il.solve(bases[y], il.matmul(g.arr_mod.actions[t], bases[x]))
        if sol is None:
            raise ValueError(f"kernel not stable along {t}")
        actions[t] = sol
    kmod = GModule(base, values, actions, check=False)
    bd = BoundaryN({x: il.matmul(g.t_mats[x], bases[x]) for x in base.objects})
    higher = dict(g.tail.higher)
    higher[n] = (g.obj_mod, g.obj_bd)
    higher[n + 1] = (kmod, bd)
    return CrossedComplex(base, g.tail.dim2, higher, n + 1, check=False)


def kernel_basis(g: InternalGroupoidMod, x):
    """Basis of the ker(s) lattice at x in arrow coordinates.

    For block-built groupoids this is the top block on the nose; in general
    every kernel element splits as w = (w - id s w) + id(s w) with s w in
    the object relation lattice."""
    arr = g.arr_mod.value(x)
    if g.block is not None:
        top = g.block[0].value(x)
        return il.vstack([il.eye(top.rank),
                          il.zeros(arr.rank - top.rank, top.rank)])
    obj = g.obj_mod.value(x)
    proj = il.eye(arr.rank) - il.matmul(g.id_mats[x], g.s_mats[x])
    return il.lattice_sum(proj, il.matmul(g.id_mats[x], obj.relations))


def pi0_internal(g):
    """Coequalizer of s and t: objects complex modulo t(ker s)."""
    if isinstance(g, InternalGroupoidXm2):
        crs = crs_n(g)
        out, _ = crs.reflect(2)
        return out
    base = g.tail.base
    if g.block is not None:
        top_mod, top_bd = g.block
        tk = {x: top_bd.matrices[x] for x in base.objects}
    else:
        crs = crs_n(g)
        tk = {x: crs.boundary(g.n + 1).matrices[x] for x in base.objects}
    values = {}
    for x in base.objects:
        obj = g.obj_mod.value(x)
        values[x] = FgAbelian(obj.rank, il.hstack([obj.relations, tk[x]]))
    qmod = GModule(base, values, dict(g.obj_mod.actions), check=False)
    higher = dict(g.tail.higher)
    higher[g.n] = (qmod, g.obj_bd)
    return CrossedComplex(base, g.tail.dim2, higher, g.n, check=False)


def endomorphism_splitting(g):
    """Check ceil End(g) = ceil obj(g) x pi_{n+1}(crs_n(g)) o q, elementwise
    via u -> (s(u), u - id(s(u))).  Returns a per-object report."""
    crs = crs_n(g)
    h = crs.homotopy_group(crs.rank)
    report = {}
    if isinstance(g, InternalGroupoidXm2):
        if not g.top_mod.is_finite():
            from .groups import SizeCapError
            raise SizeCapError("module part infinite; enumerate splitting "
                               "on finite fixtures only")
        for x in g.base.objects:
            grp = g.obj_xm.c.value(x)
            mod = g.top_mod.value(x)
            ends = [(v, c) for v in mod.elements() for c in grp.elements
                    if g.tau_of(x, v) == grp.identity]
            pairs = {(c, mod.normal_form(v)) for (v, c) in ends}
            if len(pairs) != len(ends):
                raise ValueError(f"splitting not injective at {x}")
            expected = len(grp) * (h.value(x).order() if h.value(x).is_finite()
                                   else 0)
            if len(ends) != expected:
                raise ValueError(f"splitting size mismatch at {x}")
            report[x] = {"endomorphisms": len(ends),
                         "objects_part": len(grp),
                         "pi_top": h.invariant_string(x)}
        return report
    for x in g.tail.base.objects:
        arr = g.arr_mod.value(x)
        obj = g.obj_mod.value(x)
        diff = g.s_mats[x] - g.t_mats[x]
        ends = fgab.preimage_lattice(arr, obj, diff)
        e_big = FgAbelian(ends.shape[1], coords_in_basis(arr.relations, ends))
        e_small, _, _ = e_big.simplified()
        # second factor: u - id(s(u)) must be a cycle class in pi_{n+1}
        proj = il.eye(arr.rank) - il.matmul(g.id_mats[x], g.s_mats[x])
        rest = il.matmul(proj, ends)
        kb = kernel_basis(g, x)
        for j in range(rest.shape[1]):
            col = il.from_cols([il.col(rest, j)], arr.rank)
            in_k = il.solve(kb, col)
            if in_k is None:
                raise ValueError(f"splitting leaves the kernel at {x}")
            h.class_of(x, tuple(il.col(in_k, 0)))  # raises if not a cycle
        obj_small, _, _ = obj.simplified()
        if e_small.qdim() != obj_small.qdim() + h.value(x).qdim():
            raise ValueError(f"free ranks differ in splitting at {x}")
        if e_small.is_finite():
            if e_small.order() != obj_small.order() * h.value(x).order():
                raise ValueError(f"orders differ in splitting at {x}")
        report[x] = {"endomorphisms": e_small.invariant_string(),
                     "objects_part": obj_small.invariant_string(),
                     "pi_top": h.invariant_string(x)}
    return report


def coords_in_basis(rel, basis):
    if basis.shape[1] == 0:
        return il.zeros(0, 0)
    cols = []
    for j in range(rel.shape[1]):
        c = il.from_cols([il.col(rel, j)], rel.shape[0])
        sol = il.solve(basis, c)
        if sol is None:
            raise ValueError("relations escape lattice")
        cols.append(il.col(sol, 0))
    return il.from_cols(cols, basis.shape[1])


def internal_mod_isomorphic_via(g1: InternalGroupoidMod, g2: InternalGroupoidMod,
                                arr_iso, obj_iso=None):
    """Check a per-object pair of matrices is an iso of internal groupoids."""
    base = g1.tail.base
    for x in base.objects:
        a1, a2 = g1.arr_mod.value(x), g2.arr_mod.value(x)
        o1, o2 = g1.obj_mod.value(x), g2.obj_mod.value(x)
        ax = arr_iso[x]
        ox = obj_iso[x] if obj_iso else il.eye(o1.rank)
        if not fgab.map_well_defined(a1, a2, ax):
            return False
        for lhs, rhs, dom, cod in (
                (il.matmul(g2.s_mats[x], ax), il.matmul(ox, g1.s_mats[x]), a1, o2),
                (il.matmul(g2.t_mats[x], ax), il.matmul(ox, g1.t_mats[x]), a1, o2),
                (il.matmul(ax, g1.id_mats[x]), il.matmul(g2.id_mats[x], ox), o1, a2)):
            if not fgab.maps_equal(dom, cod, lhs, rhs):
                return False
        # bijectivity: integral two-sided inverse modulo relations
        back = il.solve(il.hstack([ax, a2.relations]), il.eye(a2.rank))
        if back is None:
            return False
        cand = back[:a1.rank, :]
        if not fgab.maps_equal(a2, a2, il.matmul(ax, cand), il.eye(a2.rank)):
            return False
        if not fgab.maps_equal(a1, a1, il.matmul(cand, ax), il.eye(a1.rank)):
            return False
    return True
