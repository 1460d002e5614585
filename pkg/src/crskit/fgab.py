"""Finitely generated abelian groups given by integer presentations.

A group is Z^rank modulo the column span of a relations matrix.  Elements
are integer coordinate vectors (tuples).  Equality, canonical forms and
invariant factors all reduce to the Smith normal form of the relations.
"""

from __future__ import annotations

import itertools

from . import intlin as il
from .groups import FiniteGroup


class FgAbelian:
    def __init__(self, rank, relations=None):
        self.rank = int(rank)
        if relations is None:
            self.relations = il.zeros(self.rank, 0)
        elif isinstance(relations, list):
            self.relations = il.mat(relations, shape=(self.rank, 0))
        else:
            self.relations = relations
        if self.relations.shape[0] != self.rank:
            raise ValueError("relations must have `rank` rows")
        self._u, self._d, self._v = il.snf(self.relations)
        self._uinv = il.inverse_unimodular(self._u)
        self._diag = il.diagonal(self._d)

    # -- element arithmetic (vectors of length rank) --

    def zero(self):
        return (0,) * self.rank

    def add(self, v, w):
        return tuple(a + b for a, b in zip(v, w))

    def neg(self, v):
        return tuple(-a for a in v)

    def sub(self, v, w):
        return self.add(v, self.neg(w))

    def scale(self, k, v):
        return tuple(k * a for a in v)

    def normal_form(self, v):
        """Canonical representative of v modulo the relations."""
        w = [sum(self._u[i, j] * v[j] for j in range(self.rank))
             for i in range(self.rank)]
        for i, d in enumerate(self._diag):
            if i < self.rank and d != 0:
                w[i] %= d
        out = [sum(self._uinv[i, j] * w[j] for j in range(self.rank))
               for i in range(self.rank)]
        return tuple(out)

    def eq(self, v, w):
        return self.normal_form(v) == self.normal_form(w)

    def is_zero(self, v):
        return self.normal_form(v) == self.zero()

    def contains_vector(self, v):
        return len(v) == self.rank

    # -- global structure --

    def torsion_invariants(self):
        free = self.rank - len([d for d in self._diag if d != 0])
        tors = [d for d in self._diag if d not in (0, 1)]
        return free, tors

    def qdim(self):
        return self.torsion_invariants()[0]

    def is_finite(self):
        return self.qdim() == 0

    def is_trivial(self):
        free, tors = self.torsion_invariants()
        return free == 0 and not tors

    def order(self):
        free, tors = self.torsion_invariants()
        if free:
            raise ValueError("infinite group")
        out = 1
        for d in tors:
            out *= d
        return out

    def invariant_string(self):
        free, tors = self.torsion_invariants()
        parts = []
        if free:
            parts.append(f"Z^{free}")
        parts.extend(f"Z/{d}" for d in tors)
        return " + ".join(parts) if parts else "0"

    def elements(self, limit=100000):
        """All canonical representatives; requires finiteness."""
        if not self.is_finite():
            raise ValueError("infinite group has no element list")
        if self.order() > limit:
            raise ValueError("too many elements")
        ranges = []
        for i in range(self.rank):
            d = self._diag[i] if i < len(self._diag) else 0
            ranges.append(range(d if d != 0 else 1))
        out = []
        for w in itertools.product(*ranges):
            v = tuple(sum(self._uinv[i, j] * w[j] for j in range(self.rank))
                      for i in range(self.rank))
            out.append(self.normal_form(v))
        return sorted(set(out))

    def simplified(self):
        """Isomorphic invariant-factor presentation with the iso both ways.

        Returns (group, to_mat, from_mat): to_mat maps old coordinates to new,
        from_mat is a section; both are exact matrices.
        """
        keep = [i for i in range(self.rank)
                if i >= len(self._diag) or self._diag[i] != 1]
        to_mat = il.zeros(len(keep), self.rank)
        for r, i in enumerate(keep):
            to_mat[r, :] = self._u[i, :]
        from_mat = il.zeros(self.rank, len(keep))
        for r, i in enumerate(keep):
            from_mat[:, r] = self._uinv[:, i]
        rels = []
        for r, i in enumerate(keep):
            if i < len(self._diag) and self._diag[i] not in (0, 1):
                col = [0] * len(keep)
                col[r] = self._diag[i]
                rels.append(col)
        rel_mat = il.from_cols(rels, len(keep))
        return FgAbelian(len(keep), rel_mat), to_mat, from_mat

    def __repr__(self):
        return f"FgAbelian({self.invariant_string()})"


def zero_group():
    return FgAbelian(0)


def free(n):
    return FgAbelian(n)


def cyclic_ab(n):
    return FgAbelian(1, il.mat([[n]]))


# -- morphisms of presented groups --

def map_well_defined(dom: FgAbelian, cod: FgAbelian, f):
    """Does the matrix f send dom relations into cod relations?"""
    if f.shape != (cod.rank, dom.rank):
        return False
    img = il.matmul(f, dom.relations)
    for j in range(img.shape[1]):
        if not cod.is_zero(tuple(il.col(img, j))):
            return False
    return True


def maps_equal(dom: FgAbelian, cod: FgAbelian, f, g):
    if f.shape != g.shape:
        return False
    for j in range(dom.rank):
        if not cod.eq(tuple(il.col(f, j)), tuple(il.col(g, j))):
            return False
    return True


def preimage_lattice(dom: FgAbelian, cod: FgAbelian, f):
    """Basis of {v : f v lies in the relation lattice of cod}."""
    stacked = il.hstack([f, cod.relations])
    ns = il.nullspace(stacked)
    top = ns[:dom.rank, :]
    return il.hermite(top)


def kernel(dom: FgAbelian, cod: FgAbelian, f):
    """Honest kernel of the presented map.

    Returns (group, inclusion matrix into dom coordinates).
    """
    lat = preimage_lattice(dom, cod, f)
    if lat.shape[1] == 0:
        return FgAbelian(0), il.zeros(dom.rank, 0)
    rel_cols = []
    for j in range(dom.relations.shape[1]):
        c = il.from_cols([il.col(dom.relations, j)], dom.rank)
        x = il.solve(lat, c)
        if x is None:
            raise ValueError("relations not inside kernel lattice")
        rel_cols.append(il.col(x, 0))
    rel = il.from_cols(rel_cols, lat.shape[1])
    return FgAbelian(lat.shape[1], rel), lat


def image(dom: FgAbelian, cod: FgAbelian, f):
    """Image presented on the dom generators; returns (group, inclusion f)."""
    lat = preimage_lattice(dom, cod, f)
    return FgAbelian(dom.rank, lat), f


def cokernel(dom: FgAbelian, cod: FgAbelian, f):
    """Cokernel of the presented map; returns (group, projection identity)."""
    rel = il.hstack([cod.relations, f])
    return FgAbelian(cod.rank, rel), il.eye(cod.rank)


def finite_abelian_presentation(group: FiniteGroup):
    """Present a finite abelian group in invariant form, with element maps.

    Returns (FgAbelian, to_vec, from_vec): to_vec maps a group element to a
    coordinate vector, from_vec evaluates a vector back in the group.
    """
    if not group.is_abelian():
        raise ValueError("group is not abelian")
    elems = list(group.elements)
    n = len(elems)
    idx = {e: i for i, e in enumerate(elems)}
    rel_cols = []
    for a in elems:
        for b in elems:
            c = [0] * n
            c[idx[a]] += 1
            c[idx[b]] += 1
            c[idx[group.mul(a, b)]] -= 1
            rel_cols.append(c)
    big = FgAbelian(n, il.from_cols(rel_cols, n))
    small, to_mat, from_mat = big.simplified()

    def to_vec(e):
        v = [0] * n
        v[idx[e]] = 1
        return small.normal_form(tuple(
            sum(to_mat[i, j] * v[j] for j in range(n))
            for i in range(to_mat.shape[0])))

    def from_vec(v):
        w = [sum(from_mat[i, j] * v[j] for j in range(from_mat.shape[1]))
             for i in range(n)]
        out = group.identity
        for i, k in enumerate(w):
            out = group.mul(out, group.power(elems[i], k))
        return out

    return small, to_vec, from_vec
