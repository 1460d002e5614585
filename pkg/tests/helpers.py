"""Shared test utilities: brute-force oracles and a homotopy solver."""

from __future__ import annotations

import itertools

from crskit import intlin as il
from crskit.dold_kan import SimplicialModule
from crskit.simplicial import SimplicialHomotopy, SimplicialModuleMorphism


def box_vectors(rank, bound):
    return list(itertools.product(range(-bound, bound + 1), repeat=rank))


def brute_force_homology_order(pres_rank, relations, f_out, f_in, bound=4):
    """Order of ker(f_out)/(im(f_in) + relations) at the literal vector level.

    Enumerates integer vectors in a box; returns (order, is_infinite) where
    order counts equivalence classes of cycles inside the box and
    is_infinite reports growth between two box sizes.  Completely
    independent of the SNF machinery.
    """
    def classes(b):
        cycles = [v for v in box_vectors(pres_rank, b)
                  if all(sum(f_out[i][j] * v[j] for j in range(pres_rank)) == 0
                         for i in range(len(f_out)))]
        denom_gens = [list(col) for col in zip(*f_in)] if f_in else []
        denom_gens += [list(col) for col in zip(*relations)] if relations else []
        denom_gens = [g for g in denom_gens if any(g)]
        denom = set()
        coeff_range = range(-b, b + 1)
        if denom_gens:
            for coeffs in itertools.product(coeff_range,
                                            repeat=len(denom_gens)):
                vec = tuple(sum(c * g[i] for c, g in zip(coeffs, denom_gens))
                            for i in range(pres_rank))
                denom.add(vec)
        else:
            denom.add((0,) * pres_rank)
        reps = []
        for v in cycles:
            if not any(tuple(a - b2 for a, b2 in zip(v, r)) in denom
                       for r in reps):
                reps.append(v)
        return len(reps)
    small = classes(bound)
    large = classes(bound + 2)
    return small, large > small


def solve_homotopies(f: SimplicialModuleMorphism, g: SimplicialModuleMorphism,
                     want=3, spread=2):
    """Integer solutions of the homotopy identities between f and g.

    Returns a list of valid SimplicialHomotopy objects: a particular
    solution plus lattice translates along the homogeneous solutions.
    """
    X, Y = f.dom, f.cod
    L = min(X.trunc, Y.trunc)
    slots = []
    for i in range(L):
        for j in range(i + 1):
            for x in X.base.objects:
                rows = Y.level(i + 1).value(x).rank
                cols = X.level(i).value(x).rank
                slots.append(((i, j, x), rows, cols))
    offsets = {}
    total = 0
    for key, rows, cols in slots:
        offsets[key] = (total, rows, cols)
        total += rows * cols

    def assemble(vec):
        maps = {}
        for (i, j, x), (off, rows, cols) in offsets.items():
            m = il.zeros(rows, cols)
            for r in range(rows):
                for c in range(cols):
                    m[r, c] = vec[off + r * cols + c]
            maps.setdefault((i, j), {})[x] = m
        return maps

    equations = []  # (linear map over h-vars as dict var->coeff rows, const, relations)

    def h_sym(i, j, x):
        return ("h", i, j, x)

    # build equations by evaluating identities symbolically: every identity
    # is linear in h, so collect coefficients by probing unit vectors
    def residual(maps, i, j, k, x, kind):
        hmap = maps[(i, j)][x]
        if kind == "d0":
            return il.matmul(Y.faces[(i + 1, 0)][x], hmap) - f.comps[i][x]
        if kind == "dtop":
            return il.matmul(Y.faces[(i + 1, i + 1)][x], hmap) - g.comps[i][x]
        if kind == "dlow":
            rhs = il.matmul(maps[(i - 1, j - 1)][x], X.faces[(i, k)][x])
            return il.matmul(Y.faces[(i + 1, k)][x], hmap) - rhs
        if kind == "deq":
            rhs = il.matmul(Y.faces[(i + 1, k)][x], maps[(i, j - 1)][x])
            return il.matmul(Y.faces[(i + 1, k)][x], hmap) - rhs
        if kind == "dhigh":
            rhs = il.matmul(maps[(i - 1, j)][x], X.faces[(i, k - 1)][x])
            return il.matmul(Y.faces[(i + 1, k)][x], hmap) - rhs
        if kind == "slow":
            rhs = il.matmul(maps[(i + 1, j + 1)][x], X.degens[(i, k)][x])
            return il.matmul(Y.degens[(i + 1, k)][x], hmap) - rhs
        if kind == "shigh":
            rhs = il.matmul(maps[(i + 1, j)][x], X.degens[(i, k - 1)][x])
            return il.matmul(Y.degens[(i + 1, k)][x], hmap) - rhs
        raise ValueError(kind)

    checks = []
    for i in range(L):
        for x in X.base.objects:
            checks.append((i, 0, None, x, "d0", i, i))
            checks.append((i, i, None, x, "dtop", i, i))
            for j in range(i + 1):
                for k in range(i + 2):
                    if k < j and i >= 1:
                        checks.append((i, j, k, x, "dlow", i, i))
                    elif k == j and j > 0:
                        checks.append((i, j, k, x, "deq", i, i))
                    elif k > j + 1 and j <= i - 1:
                        checks.append((i, j, k, x, "dhigh", i, i))
            if i + 1 <= L - 1:
                for j in range(i + 1):
                    for k in range(i + 1):
                        kind = "slow" if k <= j else "shigh"
                        checks.append((i, j, k, x, kind, i, i + 2))

    zero = [0] * total
    zero_maps = assemble(zero)
    rows_a = []
    rhs_rows = []
    slack_blocks = []
    for (i, j, k, x, kind, lvl_dom, lvl_cod) in checks:
        base_res = residual(zero_maps, i, j, k, x, kind)
        pres = Y.level(i + 2 if kind in ("slow", "shigh") else i).value(x)
        cols = []
        for v in range(total):
            probe = list(zero)
            probe[v] = 1
            res = residual(assemble(probe), i, j, k, x, kind) - base_res
            cols.append([res[r, c] for r in range(res.shape[0])
                         for c in range(res.shape[1])])
        nrows = len(cols[0]) if cols else 0
        a = il.zeros(nrows, total)
        for v, colvals in enumerate(cols):
            for r, val in enumerate(colvals):
                a[r, v] = val
        b = il.zeros(nrows, 1)
        flat = [-base_res[r, c] for r in range(base_res.shape[0])
                for c in range(base_res.shape[1])]
        for r, val in enumerate(flat):
            b[r, 0] = val
        # slack for the target relations, per matrix column
        rel = pres.relations
        ncols_res = base_res.shape[1]
        slack = il.zeros(nrows, rel.shape[1] * ncols_res)
        for cc in range(ncols_res):
            for rr in range(pres.rank):
                for s in range(rel.shape[1]):
                    # residual entries are flattened row-major: rr * ncols + cc
                    slack[rr * ncols_res + cc, cc * rel.shape[1] + s] = rel[rr, s]
        rows_a.append(a)
        rhs_rows.append(b)
        slack_blocks.append(slack)
    big_rows = sum(a.shape[0] for a in rows_a)
    slack_total = sum(s.shape[1] for s in slack_blocks)
    big = il.zeros(big_rows, total + slack_total)
    rhs = il.zeros(big_rows, 1)
    r0 = 0
    s0 = 0
    for a, b, s in zip(rows_a, rhs_rows, slack_blocks):
        big[r0:r0 + a.shape[0], :total] = a
        big[r0:r0 + a.shape[0], total + s0:total + s0 + s.shape[1]] = s
        rhs[r0:r0 + a.shape[0], :] = b
        r0 += a.shape[0]
        s0 += s.shape[1]
    sol = il.solve(big, rhs)
    if sol is None:
        return []
    null = il.nullspace(big)
    out = []
    base_vec = [sol[v, 0] for v in range(total)]
    candidates = [base_vec]
    for jcol in range(min(null.shape[1], want * 2)):
        for scale in range(1, spread + 1):
            candidates.append([base_vec[v] + scale * null[v, jcol]
                               for v in range(total)])
    seen = set()
    for vec in candidates:
        key = tuple(vec)
        if key in seen:
            continue
        seen.add(key)
        h = SimplicialHomotopy(f, g, assemble(vec), check=False)
        ok, _ = h.validate()
        if ok:
            out.append(h)
        if len(out) >= want:
            break
    return out
