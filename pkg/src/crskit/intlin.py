"""Exact integer linear algebra: Smith normal form, lattice arithmetic.

All matrices are numpy object arrays holding Python ints, so there is no
overflow.  Columns of a matrix span a lattice; most routines below are
phrased in those terms.  This backend drives every finitely generated
abelian computation in the package.
"""

from __future__ import annotations

import numpy as np


def mat(rows, shape=None):
    """Build an exact integer matrix from nested lists (shape for empties)."""
    if shape is not None and (not rows or len(rows) == 0):
        return zeros(*shape)
    a = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            a[i, j] = int(x)
    return a


def zeros(m, n):
    a = np.empty((m, n), dtype=object)
    a[:] = 0
    return a


def eye(n):
    a = zeros(n, n)
    for i in range(n):
        a[i, i] = 1
    return a


def matmul(a, b):
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[0] == 0 or b.shape[1] == 0 or a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    return np.dot(a, b)


def hstack(mats):
    mats = list(mats)
    m = mats[0].shape[0]
    out = zeros(m, sum(x.shape[1] for x in mats))
    c = 0
    for x in mats:
        if x.shape[0] != m:
            raise ValueError("row mismatch in hstack")
        out[:, c:c + x.shape[1]] = x
        c += x.shape[1]
    return out


def vstack(mats):
    mats = list(mats)
    n = mats[0].shape[1]
    out = zeros(sum(x.shape[0] for x in mats), n)
    r = 0
    for x in mats:
        out[r:r + x.shape[0], :] = x
        r += x.shape[0]
    return out


def mat_eq(a, b):
    return a.shape == b.shape and all(
        a[i, j] == b[i, j] for i in range(a.shape[0]) for j in range(a.shape[1]))


def col(a, j):
    return [a[i, j] for i in range(a.shape[0])]


def from_cols(cols, nrows):
    out = zeros(nrows, len(cols))
    for j, c in enumerate(cols):
        for i, x in enumerate(c):
            out[i, j] = int(x)
    return out


def tolists(a):
    return [[int(a[i, j]) for j in range(a.shape[1])] for i in range(a.shape[0])]


def snf(m):
    """Smith normal form.

    Returns (U, D, V) with D = U M V, U and V unimodular and the diagonal
    of D nonnegative with d_i | d_{i+1}.  Classic pivot-on-smallest
    elimination; exact since entries are Python ints.
    """
    a = m.copy()
    rows, cols = a.shape
    u = eye(rows)
    v = eye(cols)
    t = 0
    while t < min(rows, cols):
        # locate smallest nonzero entry in the remaining block
        pivot = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i, j] != 0 and (best is None or abs(a[i, j]) < best):
                    best = abs(a[i, j])
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            a[[t, pi], :] = a[[pi, t], :]
            u[[t, pi], :] = u[[pi, t], :]
        if pj != t:
            a[:, [t, pj]] = a[:, [pj, t]]
            v[:, [t, pj]] = v[:, [pj, t]]
        # clear row and column t
        dirty = False
        for i in range(t + 1, rows):
            q = a[i, t] // a[t, t]
            if q:
                a[i, :] = a[i, :] - q * a[t, :]
                u[i, :] = u[i, :] - q * u[t, :]
            if a[i, t] != 0:
                dirty = True
        for j in range(t + 1, cols):
            q = a[t, j] // a[t, t]
            if q:
                a[:, j] = a[:, j] - q * a[:, t]
                v[:, j] = v[:, j] - q * v[:, t]
            if a[t, j] != 0:
                dirty = True
        if dirty:
            continue
        # force divisibility d_t | a[i, j] for the rest of the block
        bad = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i, j] % a[t, t] != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            a[t, :] = a[t, :] + a[bad, :]
            u[t, :] = u[t, :] + u[bad, :]
            continue
        if a[t, t] < 0:
            a[t, :] = -a[t, :]
            u[t, :] = -u[t, :]
        t += 1
    return u, a, v


def diagonal(d):
    return [int(d[i, i]) for i in range(min(d.shape))]


def inverse_unimodular(u):
    """Inverse of a unimodular matrix, exactly."""
    n = u.shape[0]
    uu, d, vv = snf(u)
    for i in range(n):
        if d[i, i] != 1:
            raise ValueError("matrix is not unimodular")
    return matmul(vv, uu)


def solve(a, b):
    """One integer solution x of a x = b (column vector), or None."""
    u, d, v = snf(a)
    ub = matmul(u, b)
    rows, cols = a.shape
    y = zeros(cols, b.shape[1])
    for k in range(b.shape[1]):
        for i in range(rows):
            di = d[i, i] if i < cols else 0
            if di == 0:
                if ub[i, k] != 0:
                    return None
            else:
                if ub[i, k] % di != 0:
                    return None
                y[i, k] = ub[i, k] // di
    return matmul(v, y)


def nullspace(a):
    """Basis (columns) of the integer null space of a."""
    u, d, v = snf(a)
    rows, cols = a.shape
    free = [j for j in range(cols) if j >= rows or d[j, j] == 0]
    out = zeros(cols, len(free))
    for k, j in enumerate(free):
        out[:, k] = v[:, j]
    return out


def column_basis(a):
    """Canonical basis of the lattice spanned by the columns of a.

    Computed through the SNF: the lattice is spanned by U^-1 applied to the
    nonzero diagonal columns, put in column Hermite form for canonicity.
    """
    u, d, v = snf(a)
    uinv = inverse_unimodular(u)
    cols = []
    for i in range(min(a.shape)):
        if d[i, i] != 0:
            cols.append([uinv[r, i] * d[i, i] for r in range(a.shape[0])])
    return hermite(from_cols(cols, a.shape[0]))


def hermite(a):
    """Column Hermite normal form (lower echelon, canonical), zero cols dropped."""
    a = a.copy()
    rows, cols = a.shape
    r = 0
    c = 0
    while r < rows and c < cols:
        piv = None
        for j in range(c, cols):
            if a[r, j] != 0:
                piv = j
                break
        if piv is None:
            r += 1
            continue
        if piv != c:
            a[:, [c, piv]] = a[:, [piv, c]]
        # gcd-reduce the row segment to a single entry at column c
        again = True
        while again:
            again = False
            for j in range(c + 1, cols):
                if a[r, j] != 0:
                    if abs(a[r, j]) < abs(a[r, c]):
                        a[:, [c, j]] = a[:, [j, c]]
                    q = a[r, j] // a[r, c]
                    a[:, j] = a[:, j] - q * a[:, c]
                    if a[r, j] != 0:
                        again = True
        if a[r, c] < 0:
            a[:, c] = -a[:, c]
        # reduce earlier columns against the pivot
        for j in range(c):
            q = a[r, j] // a[r, c]
            if q:
                a[:, j] = a[:, j] - q * a[:, c]
        r += 1
        c += 1
    keep = [j for j in range(cols) if any(a[i, j] != 0 for i in range(rows))]
    out = zeros(rows, len(keep))
    for k, j in enumerate(keep):
        out[:, k] = a[:, j]
    return out


def in_lattice(basis, v):
    """Is the column vector v in the lattice spanned by basis columns?"""
    if basis.shape[1] == 0:
        return all(v[i, 0] == 0 for i in range(v.shape[0]))
    return solve(basis, v) is not None


def lattice_sum(a, b):
    return hermite(hstack([a, b]))


def lattice_eq(a, b):
    return lattice_le(a, b) and lattice_le(b, a)


def lattice_le(a, b):
    """Is lattice(a) contained in lattice(b)?"""
    for j in range(a.shape[1]):
        if not in_lattice(b, from_cols([col(a, j)], a.shape[0])):
            return False
    return True


def lattice_intersection(a, b):
    """Basis of lattice(a) & lattice(b)."""
    if a.shape[1] == 0 or b.shape[1] == 0:
        return zeros(a.shape[0], 0)
    stacked = hstack([a, -b])
    ns = nullspace(stacked)
    ya = ns[:a.shape[1], :]
    return hermite(matmul(a, ya))


def quotient_invariants(num, den, ambient_rank=None):
    """Invariants (free_rank, torsion list) of lattice(num)/lattice(den).

    den must be a sublattice of num.  Torsions listed with multiplicity,
    each > 1, in divisibility order.
    """
    if num.shape[1] == 0:
        return 0, []
    coords = solve(num, den) if den.shape[1] else zeros(num.shape[1], 0)
    if coords is None:
        raise ValueError("denominator is not inside numerator lattice")
    _, d, _ = snf(coords)
    ds = [d[i, i] for i in range(min(d.shape)) if d[i, i] != 0]
    free = num.shape[1] - len(ds)
    tors = sorted(int(x) for x in ds if abs(x) > 1)
    return free, tors
