"""Finite groups as explicit multiplication tables."""

from __future__ import annotations

import itertools
import os

DEFAULT_SIZE_CAP = 4096


def size_cap():
    return int(os.environ.get("CK_SIZE_CAP", DEFAULT_SIZE_CAP))


class SizeCapError(Exception):
    """Raised when a construction would exceed the group size cap."""


class FiniteGroup:
    """A finite group on named elements with a total multiplication table."""

    def __init__(self, elements, mult, check=True):
        self.elements = tuple(elements)
        self.mult = dict(mult)
        self._index = {e: i for i, e in enumerate(self.elements)}
        self.identity = self._find_identity()
        self._inv = {a: self._find_inverse(a) for a in self.elements}
        if check:
            ok, msg = self.check_axioms()
            if not ok:
                raise ValueError(f"not a group: {msg}")

    def _find_identity(self):
        for e in self.elements:
            if all(self.mult[(e, a)] == a and self.mult[(a, e)] == a
                   for a in self.elements):
                return e
        raise ValueError("no identity element")

    def _find_inverse(self, a):
        for b in self.elements:
            if self.mult[(a, b)] == self.identity and self.mult[(b, a)] == self.identity:
                return b
        raise ValueError(f"no inverse for {a}")

    def check_axioms(self):
        for a in self.elements:
            for b in self.elements:
                if (a, b) not in self.mult or self.mult[(a, b)] not in self._index:
                    return False, f"table not closed at ({a},{b})"
        for a, b, c in itertools.product(self.elements, repeat=3):
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                return False, f"associativity fails at ({a},{b},{c})"
        return True, ""

    def __len__(self):
        return len(self.elements)

    def __contains__(self, a):
        return a in self._index

    def mul(self, a, b):
        return self.mult[(a, b)]

    def inv(self, a):
        return self._inv[a]

    def conj(self, g, a):
        """g a g^-1."""
        return self.mul(self.mul(g, a), self.inv(g))

    def prod(self, seq):
        out = self.identity
        for a in seq:
            out = self.mul(out, a)
        return out

    def power(self, a, n):
        if n < 0:
            return self.power(self.inv(a), -n)
        out = self.identity
        for _ in range(n):
            out = self.mul(out, a)
        return out

    def element_order(self, a):
        x, n = a, 1
        while x != self.identity:
            x = self.mul(x, a)
            n += 1
        return n

    def is_abelian(self):
        return all(self.mul(a, b) == self.mul(b, a)
                   for a in self.elements for b in self.elements)

    def center(self):
        return {a for a in self.elements
                if all(self.mul(a, b) == self.mul(b, a) for b in self.elements)}

    def subgroup(self, gens):
        """Closure of gens as a set of elements."""
        out = {self.identity}
        frontier = list(gens)
        while frontier:
            g = frontier.pop()
            if g in out:
                continue
            out.add(g)
            frontier.extend(self.mul(g, h) for h in list(out))
            frontier.extend(self.mul(h, g) for h in list(out))
            frontier.append(self.inv(g))
        return out

    def normal_closure(self, gens):
        seeds = set(gens)
        while True:
            conj = {self.conj(g, a) for a in seeds for g in self.elements}
            new = self.subgroup(seeds | conj)
            if new == seeds:
                return new
            seeds = new

    def is_subgroup(self, elems):
        s = set(elems)
        return (self.identity in s
                and all(self.mul(a, b) in s for a in s for b in s)
                and all(self.inv(a) in s for a in s))

    def is_normal(self, elems):
        s = set(elems)
        return self.is_subgroup(s) and all(
            self.conj(g, a) in s for a in s for g in self.elements)

    def is_central_subset(self, elems):
        z = self.center()
        return all(a in z for a in elems)

    def cosets(self, subgroup):
        """Left cosets as frozensets (left = right assumed checked by caller)."""
        seen = {}
        for a in self.elements:
            c = frozenset(self.mul(a, n) for n in subgroup)
            seen.setdefault(c, min(sorted(c)))
        return seen

    def quotient(self, normal):
        """Quotient group by a normal subgroup.

        Returns (group, projection dict elem -> coset representative name).
        Coset names are the minimal member, making the quotient canonical.
        """
        if not self.is_normal(normal):
            raise ValueError("subgroup is not normal")
        cosets = self.cosets(normal)
        rep_of = {}
        for cos, rep in cosets.items():
            for a in cos:
                rep_of[a] = rep
        elems = sorted(set(rep_of.values()))
        mult = {}
        for a in elems:
            for b in elems:
                mult[(a, b)] = rep_of[self.mul(a, b)]
        return FiniteGroup(elems, mult, check=False), rep_of

    def generating_set(self):
        """A small generating set, greedily chosen."""
        gens = []
        have = {self.identity}
        for a in sorted(self.elements):
            if a not in have:
                gens.append(a)
                have = self.subgroup(gens)
            if len(have) == len(self):
                break
        return gens

    def words(self, gens):
        """Express each element as a word in gens (list of gen indices), by BFS."""
        word = {self.identity: []}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for a in frontier:
                for i, g in enumerate(gens):
                    b = self.mul(a, g)
                    if b not in word:
                        word[b] = word[a] + [i]
                        nxt.append(b)
            frontier = nxt
        if len(word) != len(self):
            raise ValueError("gens do not generate")
        return word

    def homomorphisms_to(self, other):
        """All group homomorphisms self -> other (brute force on generators)."""
        gens = self.generating_set()
        if not gens:
            return [{a: other.identity for a in self.elements}]
        words = self.words(gens)
        out = []
        for images in itertools.product(other.elements, repeat=len(gens)):
            fmap = {}
            ok = True
            for a, w in words.items():
                fmap[a] = other.prod([images[i] for i in w])
            for a in self.elements:
                for b in self.elements:
                    if fmap[self.mul(a, b)] != other.mul(fmap[a], fmap[b]):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                out.append(fmap)
        return out

    def isomorphisms_to(self, other):
        if len(self) != len(other):
            return []
        return [h for h in self.homomorphisms_to(other)
                if len(set(h.values())) == len(other)]

    def is_isomorphic_to(self, other):
        return bool(self.isomorphisms_to(other))


def cyclic(n, prefix=""):
    """Z/n with elements '0'..'n-1' under addition."""
    elems = [f"{prefix}{i}" for i in range(n)]
    mult = {(f"{prefix}{i}", f"{prefix}{j}"): f"{prefix}{(i + j) % n}"
            for i in range(n) for j in range(n)}
    return FiniteGroup(elems, mult, check=False)


def trivial():
    return cyclic(1)


def symmetric(n):
    """S_n; an element is named by its image string, e.g. '120'."""
    perms = list(itertools.permutations(range(n)))
    name = {p: "".join(map(str, p)) for p in perms}
    mult = {}
    for p in perms:
        for q in perms:
            pq = tuple(p[q[i]] for i in range(n))
            mult[(name[p], name[q])] = name[pq]
    return FiniteGroup([name[p] for p in perms], mult, check=False)


def direct_product(g, h):
    elems = [f"{a},{b}" for a in g.elements for b in h.elements]
    mult = {}
    for a1 in g.elements:
        for b1 in h.elements:
            for a2 in g.elements:
                for b2 in h.elements:
                    mult[(f"{a1},{b1}", f"{a2},{b2}")] = \
                        f"{g.mul(a1, a2)},{h.mul(b1, b2)}"
    if len(elems) > size_cap():
        raise SizeCapError(f"product of order {len(elems)} exceeds cap")
    return FiniteGroup(elems, mult, check=False)
