"""Dense exact linear algebra over the field scalars of :mod:`ainfinity.rings`.

Matrices are lists of rows of :class:`~ainfinity.rings.Scalar`.  Pivoting is
always "first nonzero", so echelon forms, chosen solutions and kernel bases
are deterministic functions of the input.
"""

from __future__ import annotations

from typing import List, Optional

from .exceptions import CoefficientError, ShapeError
from .rings import RingDescriptor, Scalar, one, zero

Matrix = List[List[Scalar]]
Vector = List[Scalar]


def zero_matrix(rows: int, cols: int, ring: RingDescriptor) -> Matrix:
    z = zero(ring)
    return [[z for _ in range(cols)] for _ in range(rows)]


def identity_matrix(n: int, ring: RingDescriptor) -> Matrix:
    out = zero_matrix(n, n, ring)
    o = one(ring)
    for i in range(n):
        out[i][i] = o
    return out


def mat_copy(a: Matrix) -> Matrix:
    return [row[:] for row in a]


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    if len(a) != len(b) or (a and len(a[0]) != len(b[0])):
        raise ShapeError("matrix shapes differ")
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(c: Scalar, a: Matrix) -> Matrix:
    return [[c * x for x in row] for row in a]


def mat_mul(a: Matrix, b: Matrix, ring: RingDescriptor) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise ShapeError(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0])}")
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = zero_matrix(rows, cols, ring)
    for i in range(rows):
        for k in range(inner):
            aik = a[i][k]
            if aik.is_zero():
                continue
            for j in range(cols):
                if not b[k][j].is_zero():
                    out[i][j] = out[i][j] + aik * b[k][j]
    return out


def mat_vec(a: Matrix, v: Vector, ring: RingDescriptor) -> Vector:
    if a and len(a[0]) != len(v):
        raise ShapeError("matrix/vector shape mismatch")
    out = [zero(ring) for _ in range(len(a))]
    for i, row in enumerate(a):
        for j, x in enumerate(row):
            if not x.is_zero() and not v[j].is_zero():
                out[i] = out[i] + x * v[j]
    return out


def is_zero_matrix(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def rref(a: Matrix, ring: RingDescriptor):
    """Reduced row echelon form.  Returns (R, pivot column list)."""
    if not ring.is_field:
        raise CoefficientError(f"linear algebra needs a field, got {ring}")
    m = mat_copy(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        sel = None
        for i in range(r, rows):
            if not m[i][c].is_zero():
                sel = i
                break
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        inv = m[r][c].inverse()
        m[r] = [inv * x for x in m[r]]
        for i in range(rows):
            if i != r and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Matrix, ring: RingDescriptor) -> int:
    return len(rref(a, ring)[1])


def nullspace(a: Matrix, ring: RingDescriptor) -> List[Vector]:
    """Deterministic kernel basis: one vector per free column, free entry 1."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    r, pivots = rref(a, ring)
    pivot_set = set(pivots)
    basis = []
    o, z = one(ring), zero(ring)
    for free in range(cols):
        if free in pivot_set:
            continue
        v = [z for _ in range(cols)]
        v[free] = o
        for i, pc in enumerate(pivots):
            v[pc] = -r[i][free]
        basis.append(v)
    return basis


def solve(a: Matrix, b: Vector, ring: RingDescriptor) -> Optional[Vector]:
    """One solution of a x = b with free variables set to zero, or None."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    if len(b) != rows:
        raise ShapeError("right-hand side length mismatch")
    aug = [a[i][:] + [b[i]] for i in range(rows)]
    r, pivots = rref(aug, ring)
    if cols in pivots:
        return None
    z = zero(ring)
    x = [z for _ in range(cols)]
    for i, pc in enumerate(pivots):
        x[pc] = r[i][cols]
    return x


def solve_matrix(a: Matrix, b: Matrix, ring: RingDescriptor) -> Optional[Matrix]:
    """Solve a X = b columnwise; None if any column is unsolvable."""
    rows = len(a)
    cols_b = len(b[0]) if b else 0
    out_cols = []
    for j in range(cols_b):
        col = solve(a, [b[i][j] for i in range(rows)], ring)
        if col is None:
            return None
        out_cols.append(col)
    n = len(a[0]) if a else 0
    return [[out_cols[j][i] for j in range(cols_b)] for i in range(n)]


def inverse(a: Matrix, ring: RingDescriptor) -> Matrix:
    n = len(a)
    if any(len(row) != n for row in a):
        raise ShapeError("inverse needs a square matrix")
    aug = [a[i][:] + identity_matrix(n, ring)[i] for i in range(n)]
    r, pivots = rref(aug, ring)
    if pivots[:n] != list(range(n)):
        raise CoefficientError("matrix is not invertible")
    return [row[n:] for row in r[:n]]


def column_span_contains(basis: Matrix, v: Vector, ring: RingDescriptor) -> bool:
    """Whether v lies in the column span of ``basis``."""
    return solve(basis, v, ring) is not None
