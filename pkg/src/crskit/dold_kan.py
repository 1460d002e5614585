"""Dold-Kan machinery for simplicial modules over a groupoid.

Eilenberg-MacLane objects are built as the image under the Gamma functor
of a chain complex concentrated in one degree: level i is a direct sum of
copies of the value indexed by monotone surjections [i] ->> [m], and all
operators are 0/1 block patterns.  The Moore complex and the canonical
decomposition give explicit levelwise isomorphisms between simplicial
modules with the same normalized part, which is how the ladder identities
are verified.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from . import fgab
from . import intlin as il
from .coeffs import GModule
from .fgab import FgAbelian


@lru_cache(maxsize=None)
def surjections(i, m):
    """Monotone surjections [i] ->> [m] as value tuples, sorted."""
    if m > i or m < 0:
        return ()
    out = []
    for comb in itertools.combinations(range(1, i + 1), i - m):
        vals = []
        v = 0
        for k in range(i + 1):
            if k in comb:
                vals.append(vals[-1])
            else:
                vals.append(v)
                v += 1
        # rebuilt increasing-by-repeats; verify surjectivity shape
        out.append(tuple(vals))
    uniq = sorted(set(out))
    return tuple(t for t in uniq if set(t) == set(range(m + 1)))


def compose_delta(eta, i_face):
    """eta o delta_{i_face} for eta: [i] -> [m], the face skipping i_face."""
    return tuple(eta[k if k < i_face else k + 1] for k in range(len(eta) - 1))


def compose_sigma(eta, j):
    """eta o sigma_j for eta: [i] -> [m], the degeneracy repeating j."""
    return tuple(eta[k if k <= j else k - 1] for k in range(len(eta) + 1))


class SimplicialModule:
    """A truncated simplicial object of G-modules with explicit operators."""

    def __init__(self, base, levels, faces, degens, check=True):
        self.base = base
        self.levels = list(levels)
        self.faces = {k: {x: m for x, m in v.items()} for k, v in faces.items()}
        self.degens = {k: {x: m for x, m in v.items()} for k, v in degens.items()}
        if check:
            ok, msgs = self.validate()
            if not ok:
                raise ValueError("invalid simplicial module: " + "; ".join(msgs[:3]))

    @property
    def trunc(self):
        return len(self.levels) - 1

    def level(self, i) -> GModule:
        return self.levels[i]

    def face(self, i, k):
        return self.faces[(i, k)]

    def degen(self, i, j):
        return self.degens[(i, j)]

    def validate(self):
        msgs = []
        for mod in self.levels:
            ok, sub = mod.validate()
            if not ok:
                msgs.extend(sub)
        L = self.trunc
        for i in range(1, L + 1):
            for k in range(i + 1):
                if (i, k) not in self.faces:
                    msgs.append(f"missing face d{k} at level {i}")
                    continue
                msgs.extend(self._check_operator(self.faces[(i, k)],
                                                 self.levels[i],
                                                 self.levels[i - 1],
                                                 f"d{k}@{i}"))
        for i in range(0, L):
            for j in range(i + 1):
                if (i, j) not in self.degens:
                    msgs.append(f"missing degeneracy s{j} at level {i}")
                    continue
                msgs.extend(self._check_operator(self.degens[(i, j)],
                                                 self.levels[i],
                                                 self.levels[i + 1],
                                                 f"s{j}@{i}"))
        msgs.extend(self.check_simplicial_identities())
        return (not msgs), msgs

    def _check_operator(self, mats, dom, cod, nm):
        msgs = []
        for x in self.base.objects:
            m = mats.get(x)
            if m is None or m.shape != (cod.value(x).rank, dom.value(x).rank):
                msgs.append(f"{nm} has wrong shape at {x}")
                continue
            if not fgab.map_well_defined(dom.value(x), cod.value(x), m):
                msgs.append(f"{nm} ill-defined at {x}")
        for t, (x, y) in self.base.arrows.items():
            lhs = il.matmul(mats[y], dom.actions[t])
            rhs = il.matmul(cod.actions[t], mats[x])
            if not fgab.maps_equal(dom.value(x), cod.value(y), lhs, rhs):
                msgs.append(f"{nm} not natural along {t}")
        return msgs

    def check_simplicial_identities(self):
        msgs = []
        L = self.trunc
        for x in self.base.objects:
            for i in range(2, L + 1):
                for a in range(i + 1):
                    for b in range(a + 1, i + 1):
                        lhs = il.matmul(self.faces[(i - 1, a)][x],
                                        self.faces[(i, b)][x])
                        rhs = il.matmul(self.faces[(i - 1, b - 1)][x],
                                        self.faces[(i, a)][x])
                        if not fgab.maps_equal(self.levels[i].value(x),
                                               self.levels[i - 2].value(x),
                                               lhs, rhs):
                            msgs.append(f"d{a}d{b} fails at level {i}, {x}")
            for i in range(0, L - 1):
                for a in range(i + 1):
                    for b in range(a, i + 1):
                        lhs = il.matmul(self.degens[(i + 1, a)][x],
                                        self.degens[(i, b)][x])
                        rhs = il.matmul(self.degens[(i + 1, b + 1)][x],
                                        self.degens[(i, a)][x])
                        if not fgab.maps_equal(self.levels[i].value(x),
                                               self.levels[i + 2].value(x),
                                               lhs, rhs):
                            msgs.append(f"s{a}s{b} fails at level {i}, {x}")
            for i in range(1, L):
                for a in range(i + 2):
                    for b in range(i + 1):
                        lhs = il.matmul(self.faces[(i + 1, a)][x],
                                        self.degens[(i, b)][x])
                        mod_i = self.levels[i].value(x)
                        if a < b:
                            rhs = il.matmul(self.degens[(i - 1, b - 1)][x],
                                            self.faces[(i, a)][x])
                        elif a in (b, b + 1):
                            rhs = il.eye(mod_i.rank)
                        else:
                            rhs = il.matmul(self.degens[(i - 1, b)][x],
                                            self.faces[(i, a - 1)][x])
                        if not fgab.maps_equal(mod_i, mod_i, lhs, rhs):
                            msgs.append(f"d{a}s{b} fails at level {i}, {x}")
        return msgs

    def moore(self):
        """Normalized complex: per level and object, a lattice basis of the
        intersection of ker(d_k), k >= 1, plus its presentation."""
        out = {}
        for i in range(self.trunc + 1):
            per = {}
            for x in self.base.objects:
                pres = self.levels[i].value(x)
                lat = il.eye(pres.rank)
                for k in range(1, i + 1):
                    klat = fgab.preimage_lattice(pres,
                                                 self.levels[i - 1].value(x),
                                                 self.faces[(i, k)][x])
                    lat = il.lattice_intersection(lat, klat)
                rels = _coords_or_none(pres.relations, lat)
                per[x] = (lat, FgAbelian(lat.shape[1], rels))
            out[i] = per
        return out

    def moore_homology_concentration(self):
        """Invariant strings of the Moore homology per degree and object."""
        moore = self.moore()
        out = {}
        for x in self.base.objects:
            per = {}
            for i in range(self.trunc + 1):
                lat, pres = moore[i][x]
                # cycles of d0 restricted to the Moore part
                if i == 0:
                    cyc = lat
                else:
                    d0 = self.faces[(i, 0)][x]
                    moved = il.matmul(d0, lat)
                    below = self.levels[i - 1].value(x)
                    # kernel of d0 on the Moore lattice, honestly
                    stacked = il.hstack([moved, below.relations])
                    ns = il.nullspace(stacked)
                    coords = ns[:lat.shape[1], :]
                    cyc = il.matmul(lat, il.hermite(coords))
                if i < self.trunc:
                    nlat, _ = moore[i + 1][x]
                    d0n = self.faces[(i + 1, 0)][x]
                    bnd = il.matmul(d0n, nlat)
                else:
                    bnd = il.zeros(self.levels[i].value(x).rank, 0)
                denom = il.lattice_sum(bnd, self.levels[i].value(x).relations)
                denom = il.lattice_intersection(denom, cyc) \
                    if cyc.shape[1] else il.zeros(cyc.shape[0], 0)
                coords = il.solve(cyc, denom) if denom.shape[1] \
                    else il.zeros(cyc.shape[1], 0)
                h = FgAbelian(cyc.shape[1], coords)
                per[i] = h.simplified()[0].invariant_string()
            out[x] = per
        return out


def _coords_or_none(rel, basis):
    if basis.shape[1] == 0:
        return il.zeros(0, 0)
    cols = []
    for j in range(rel.shape[1]):
        sol = il.solve(basis, il.from_cols([il.col(rel, j)], rel.shape[0]))
        if sol is None:
            raise ValueError("relations escape lattice")
        cols.append(il.col(sol, 0))
    return il.from_cols(cols, basis.shape[1])


def em_simplicial_module(a_mod: GModule, m, trunc) -> SimplicialModule:
    """K(A, m) as a simplicial module, truncated at the given level."""
    base = a_mod.base
    levels = []
    for i in range(trunc + 1):
        s = surjections(i, m)
        values = {x: _power(a_mod.value(x), len(s)) for x in base.objects}
        actions = {t: _power_matrix(a_mod.actions[t], len(s))
                   for t in base.arrows}
        levels.append(GModule(base, values, actions, check=False))
    faces = {}
    degens = {}
    for i in range(1, trunc + 1):
        src = surjections(i, m)
        dst = surjections(i - 1, m)
        for k in range(i + 1):
            pattern = il.zeros(len(dst), len(src))
            for c, eta in enumerate(src):
                img = compose_delta(eta, k)
                if set(img) == set(range(m + 1)):
                    pattern[dst.index(img), c] = 1
            faces[(i, k)] = {x: _expand(pattern, a_mod.value(x).rank)
                             for x in base.objects}
    for i in range(0, trunc):
        src = surjections(i, m)
        dst = surjections(i + 1, m)
        for j in range(i + 1):
            pattern = il.zeros(len(dst), len(src))
            for c, eta in enumerate(src):
                img = compose_sigma(eta, j)
                pattern[dst.index(img), c] = 1
            degens[(i, j)] = {x: _expand(pattern, a_mod.value(x).rank)
                              for x in base.objects}
    return SimplicialModule(base, levels, faces, degens, check=False)


def _expand(pattern, r):
    """Kronecker product pattern x I_r for 0/1 block patterns."""
    out = il.zeros(pattern.shape[0] * r, pattern.shape[1] * r)
    for i in range(pattern.shape[0]):
        for j in range(pattern.shape[1]):
            if pattern[i, j]:
                for a in range(r):
                    out[i * r + a, j * r + a] = pattern[i, j]
    return out


def _power(a: FgAbelian, k):
    rel = il.zeros(a.rank * k, a.relations.shape[1] * k)
    for b in range(k):
        rel[b * a.rank:(b + 1) * a.rank,
            b * a.relations.shape[1]:(b + 1) * a.relations.shape[1]] = a.relations
    return FgAbelian(a.rank * k, rel)


def _power_matrix(m, k):
    out = il.zeros(m.shape[0] * k, m.shape[1] * k)
    for b in range(k):
        out[b * m.shape[0]:(b + 1) * m.shape[0],
            b * m.shape[1]:(b + 1) * m.shape[1]] = m
    return out


def zero_simplicial_module(base, trunc):
    from .coeffs import constant_gmodule
    levels = [constant_gmodule(base, FgAbelian(0)) for _ in range(trunc + 1)]
    faces = {(i, k): {x: il.zeros(0, 0) for x in base.objects}
             for i in range(1, trunc + 1) for k in range(i + 1)}
    degens = {(i, j): {x: il.zeros(0, 0) for x in base.objects}
              for i in range(trunc) for j in range(i + 1)}
    return SimplicialModule(base, levels, faces, degens, check=False)


def degeneracy_composite(sm: SimplicialModule, x, eta):
    """The operator X(eta): X_m -> X_i for a surjection eta: [i] ->> [m]."""
    i = len(eta) - 1
    m = max(eta) if eta else 0
    if i == m:
        return il.eye(sm.levels[m].value(x).rank)
    for j in range(i):
        if eta[j] == eta[j + 1]:
            shorter = tuple(eta[:j] + eta[j + 1:])
            return il.matmul(sm.degens[(i - 1, j)][x],
                             degeneracy_composite(sm, x, shorter))
    raise ValueError("not a surjection")


def dk_psi(sm: SimplicialModule, moore, m, i, x):
    """Canonical map (sum over surjections of N_m) -> X_i at object x."""
    lat, _ = moore[m][x]
    cols = []
    for eta in surjections(i, m):
        comp = il.matmul(degeneracy_composite(sm, x, eta), lat)
        cols.append(comp)
    if not cols:
        return il.zeros(sm.levels[i].value(x).rank, 0)
    return il.hstack(cols)


def dk_compare(lhs: SimplicialModule, rhs: SimplicialModule, degree):
    """Explicit levelwise isomorphism between two simplicial modules whose
    Moore complexes are concentrated in the given degree.

    Returns (ok, report).  The isomorphism is Psi_rhs o (copies of the
    canonical Moore identification) o Psi_lhs^-1, checked to commute with
    all faces, degeneracies and the base action.
    """
    report = {"degree": degree, "levels": []}
    if lhs.base.objects != rhs.base.objects:
        return False, {"error": "different bases"}
    if lhs.trunc != rhs.trunc:
        return False, {"error": "different truncations"}
    moore_l = lhs.moore()
    moore_r = rhs.moore()
    # Moore parts away from the degree must be trivial
    for sm, moore, side in ((lhs, moore_l, "lhs"), (rhs, moore_r, "rhs")):
        for i in range(sm.trunc + 1):
            if i == degree:
                continue
            for x in sm.base.objects:
                _, pres = moore[i][x]
                if not pres.simplified()[0].is_trivial():
                    report["error"] = f"{side} Moore not concentrated: level {i} at {x}"
                    return False, report
    # identify the Moore parts through their canonical forms
    phi = {}
    for x in lhs.base.objects:
        _, pl = moore_l[degree][x]
        _, pr = moore_r[degree][x]
        sl, tol, froml = pl.simplified()
        sr, tor, fromr = pr.simplified()
        if sl.invariant_string() != sr.invariant_string():
            report["error"] = f"Moore values differ at {x}: " \
                f"{sl.invariant_string()} vs {sr.invariant_string()}"
            return False, report
        phi[x] = il.matmul(fromr, tol)
    isos = {}
    for i in range(lhs.trunc + 1):
        isos[i] = {}
        for x in lhs.base.objects:
            psi_l = dk_psi(lhs, moore_l, degree, i, x)
            psi_r = dk_psi(rhs, moore_r, degree, i, x)
            li = lhs.levels[i].value(x)
            ri = rhs.levels[i].value(x)
            blocks = _phi_blocks(phi[x], len(surjections(i, degree)))
            # invert psi_l modulo the relations of the lhs level
            inv = il.solve(il.hstack([psi_l, li.relations]), il.eye(li.rank))
            if inv is None:
                report["error"] = f"lhs not DK-decomposable at level {i}, {x}"
                return False, report
            inv = inv[:psi_l.shape[1], :]
            isos[i][x] = il.matmul(psi_r, il.matmul(blocks, inv))
    ok = True
    for i in range(lhs.trunc + 1):
        level_ok = True
        for x in lhs.base.objects:
            li = lhs.levels[i].value(x)
            ri = rhs.levels[i].value(x)
            back = il.solve(il.hstack([isos[i][x], ri.relations]),
                            il.eye(ri.rank))
            if back is None:
                level_ok = False
                continue
            cand = back[:li.rank, :]
            if not fgab.maps_equal(ri, ri, il.matmul(isos[i][x], cand),
                                   il.eye(ri.rank)) or \
               not fgab.maps_equal(li, li, il.matmul(cand, isos[i][x]),
                                   il.eye(li.rank)):
                level_ok = False
        for t, (x, y) in lhs.base.arrows.items():
            lhs_m = il.matmul(isos[i][y], lhs.levels[i].actions[t])
            rhs_m = il.matmul(rhs.levels[i].actions[t], isos[i][x])
            if not fgab.maps_equal(lhs.levels[i].value(x),
                                   rhs.levels[i].value(y), lhs_m, rhs_m):
                level_ok = False
        if i >= 1:
            for k in range(i + 1):
                for x in lhs.base.objects:
                    a = il.matmul(isos[i - 1][x], lhs.faces[(i, k)][x])
                    b = il.matmul(rhs.faces[(i, k)][x], isos[i][x])
                    if not fgab.maps_equal(lhs.levels[i].value(x),
                                           rhs.levels[i - 1].value(x), a, b):
                        level_ok = False
                        report.setdefault("counterexample", f"d{k} level {i} at {x}")
        if i < lhs.trunc:
            for j in range(i + 1):
                for x in lhs.base.objects:
                    a = il.matmul(isos[i + 1][x], lhs.degens[(i, j)][x])
                    b = il.matmul(rhs.degens[(i, j)][x], isos[i][x])
                    if not fgab.maps_equal(lhs.levels[i].value(x),
                                           rhs.levels[i + 1].value(x), a, b):
                        level_ok = False
                        report.setdefault("counterexample", f"s{j} level {i} at {x}")
        report["levels"].append({"level": i, "iso": level_ok})
        ok &= level_ok
    return ok, report


def _phi_blocks(phi, k):
    out = il.zeros(phi.shape[0] * k, phi.shape[1] * k)
    for b in range(k):
        out[b * phi.shape[0]:(b + 1) * phi.shape[0],
            b * phi.shape[1]:(b + 1) * phi.shape[1]] = phi
    return out
