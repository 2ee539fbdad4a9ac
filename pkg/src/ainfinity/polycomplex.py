"""Bounded complexes of finite free modules over a univariate polynomial
ring: Smith normal form, cohomology with free/torsion decomposition,
fibre dimensions and the freeness criterion.

The decomposition records torsion as orders of variable-power torsion
(the localization at the variable), matching the formal-disc picture the
polynomial ring models: factors coprime to the variable are invisible in
both the special and the generic fibre.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .exceptions import CoefficientError, ShapeError, StructureError
from .linalg import Matrix, identity_matrix, mat_mul, rank, zero_matrix
from .rings import (RingDescriptor, Scalar, eval_at, fraction_field, one,
                    poly_degree, zero)


def _require_poly_field(ring: RingDescriptor) -> None:
    if ring.kind != "poly" or not ring.base.is_field:
        raise CoefficientError(f"need a polynomial ring over a field, got {ring}")


def smith_normal_form(mat: Matrix, ring: RingDescriptor):
    """``(U, D, V)`` with ``U D V = mat``, ``D`` diagonal with a monic
    divisibility chain and ``U``, ``V`` of unit (constant) determinant.

    Pivoting: minimal degree first, ties broken by position.  Entries are
    cleared by one-shot Bezout blocks (unimodular 2x2 transformations
    sending ``(pivot, entry)`` to ``(gcd, 0)``), which avoids the
    coefficient explosion of long Euclidean chains.
    """
    _require_poly_field(ring)
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    a = [row[:] for row in mat]
    # U and V accumulate the inverses of the row/column operations applied
    u = identity_matrix(rows, ring)
    v = identity_matrix(cols, ring)

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        for r in range(rows):
            u[r][i], u[r][j] = u[r][j], u[r][i]

    def col_swap(i, j):
        for r in range(rows):
            a[r][i], a[r][j] = a[r][j], a[r][i]
        v[i], v[j] = v[j], v[i]

    def row_block(i1, i2, m00, m01, m10, m11):
        # [row i1; row i2] <- M [rows] with det(M) = 1; U absorbs the
        # adjugate M^-1 = [[m11, -m01], [-m10, m00]] on columns i1, i2
        for k in range(cols):
            x, y = a[i1][k], a[i2][k]
            a[i1][k] = m00 * x + m01 * y
            a[i2][k] = m10 * x + m11 * y
        for r in range(rows):
            x, y = u[r][i1], u[r][i2]
            u[r][i1] = x * m11 - y * m10
            u[r][i2] = -x * m01 + y * m00

    def col_block(j1, j2, m00, m01, m10, m11):
        # [col j1, col j2] <- [col j1, col j2] M^T ... columns transform by M
        for r in range(rows):
            x, y = a[r][j1], a[r][j2]
            a[r][j1] = m00 * x + m01 * y
            a[r][j2] = m10 * x + m11 * y
        for k in range(cols):
            x, y = v[j1][k], v[j2][k]
            v[j1][k] = m11 * x - m10 * y
            v[j2][k] = -m01 * x + m00 * y

    def row_addmul(dst, src_row, c: Scalar):
        for k in range(cols):
            a[dst][k] = a[dst][k] + c * a[src_row][k]
        for r in range(rows):
            u[r][src_row] = u[r][src_row] - c * u[r][dst]

    def col_addmul(dst, src_col, c: Scalar):
        for r in range(rows):
            a[r][dst] = a[r][dst] + c * a[r][src_col]
        for k in range(cols):
            v[src_col][k] = v[src_col][k] - c * v[dst][k]

    def row_scale(i, c: Scalar):
        for k in range(cols):
            a[i][k] = c * a[i][k]
        cinv = c.inverse()
        for r in range(rows):
            u[r][i] = u[r][i] * cinv

    def _scalar_poly(coeffs):
        return Scalar(ring, tuple(coeffs))

    def gcd_step_rows(t, i):
        # send (a[t][t], a[i][t]) to (g, 0) by one unimodular block
        from .rings import _pdivmod, _pxgcd
        p, e = a[t][t], a[i][t]
        g, x, y = _pxgcd(ring.base, p.value, e.value)
        pg, _ = _pdivmod(ring.base, p.value, g)
        eg, _ = _pdivmod(ring.base, e.value, g)
        row_block(t, i, _scalar_poly(x), _scalar_poly(y),
                  -_scalar_poly(eg), _scalar_poly(pg))

    def gcd_step_cols(t, j):
        from .rings import _pxgcd, _pdivmod
        p, e = a[t][t], a[t][j]
        g, x, y = _pxgcd(ring.base, p.value, e.value)
        pg, _ = _pdivmod(ring.base, p.value, g)
        eg, _ = _pdivmod(ring.base, e.value, g)
        col_block(t, j, _scalar_poly(x), _scalar_poly(y),
                  -_scalar_poly(eg), _scalar_poly(pg))

    n = min(rows, cols)
    t = 0
    while t < n:
        # minimal-degree nonzero pivot at or beyond (t, t)
        pivot = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j].is_zero():
                    continue
                d = poly_degree(a[i][j])
                if best is None or d < best:
                    best, pivot = d, (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            row_swap(t, pi)
        if pj != t:
            col_swap(t, pj)
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t].is_zero():
                    continue
                q, r = _divmod_scalar(a[i][t], a[t][t])
                if r.is_zero():
                    row_addmul(i, t, -q)
                else:
                    gcd_step_rows(t, i)
                    dirty = True
            for j in range(t + 1, cols):
                if a[t][j].is_zero():
                    continue
                q, r = _divmod_scalar(a[t][j], a[t][t])
                if r.is_zero():
                    col_addmul(j, t, -q)
                else:
                    gcd_step_cols(t, j)
                    dirty = True
        # divisibility: fold any non-divisible entry into the pivot's row
        offender = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j].is_zero():
                    continue
                _, r = _divmod_scalar(a[i][j], a[t][t])
                if not r.is_zero():
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_addmul(t, offender, one(ring))
            continue
        t += 1
    # monic normalization
    for i in range(min(rows, cols)):
        if not a[i][i].is_zero():
            c = Scalar(ring, (a[i][i].value[-1],))
            row_scale(i, c.inverse())
    d = [[a[i][j] for j in range(cols)] for i in range(rows)]
    _check_snf(mat, u, d, v, ring)
    return u, d, v


def _divmod_scalar(num: Scalar, den: Scalar):
    from .rings import _pdivmod
    q, r = _pdivmod(num.ring.base, num.value, den.value)
    return Scalar(num.ring, q, _canonical=True), Scalar(num.ring, r, _canonical=True)


def _check_snf(mat, u, d, v, ring) -> None:
    if mat_mul(mat_mul(u, d, ring), v, ring) != mat:
        raise StructureError("internal: U D V != input")
    n = min(len(d), len(d[0]) if d else 0)
    for i in range(n - 1):
        if d[i][i].is_zero():
            if not d[i + 1][i + 1].is_zero():
                raise StructureError("internal: zero before nonzero on diagonal")
        elif not d[i + 1][i + 1].is_zero():
            _, r = _divmod_scalar(d[i + 1][i + 1], d[i][i])
            if not r.is_zero():
                raise StructureError("internal: divisibility chain broken")
    for i in range(len(d)):
        for j in range(len(d[0]) if d else 0):
            if i != j and not d[i][j].is_zero():
                raise StructureError("internal: D not diagonal")


def invariant_factors(mat: Matrix, ring: RingDescriptor) -> List[Scalar]:
    _, d, _ = smith_normal_form(mat, ring)
    n = min(len(d), len(d[0]) if d else 0)
    return [d[i][i] for i in range(n) if not d[i][i].is_zero()]


def solve_over_pid(mat: Matrix, rhs: List[Scalar], ring: RingDescriptor) -> Optional[List[Scalar]]:
    """One solution of ``mat x = rhs`` over the polynomial ring, or None."""
    _require_poly_field(ring)
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    if len(rhs) != rows:
        raise ShapeError("right-hand side length mismatch")
    u, d, v = smith_normal_form(mat, ring)
    # U D V x = rhs  =>  D (V x) = U^-1 rhs; U has unit determinant, so
    # inversion over the fraction field stays polynomial
    uinv_rhs = _apply_unit_inverse(u, rhs, ring)
    y = [zero(ring)] * cols
    n = min(rows, cols)
    for i in range(rows):
        di = d[i][i] if i < n else zero(ring)
        if di.is_zero():
            if i < len(uinv_rhs) and not uinv_rhs[i].is_zero():
                return None
        else:
            q, r = _divmod_scalar(uinv_rhs[i], di)
            if not r.is_zero():
                return None
            y[i] = q
    vx = _apply_unit_inverse(v, y, ring, from_left=False)
    return vx


def _apply_unit_inverse(m: Matrix, vec: List[Scalar], ring: RingDescriptor,
                        from_left: bool = True) -> List[Scalar]:
    """``m^-1 vec`` for a matrix of unit determinant over the ring.

    Solved over the fraction field; entries are checked to be polynomial.
    """
    from .linalg import solve as field_solve
    frac = fraction_field(ring)
    from .rings import embed_fraction
    mf = [[embed_fraction(x) for x in row] for row in m]
    bf = [embed_fraction(x) for x in vec]
    x = field_solve(mf, bf, frac)
    if x is None:
        raise StructureError("internal: unit matrix failed to invert")
    out = []
    for s in x:
        num, den = s.value
        if len(den) != 1:
            raise StructureError("internal: non-polynomial entry inverting a unit matrix")
        from .rings import Scalar as _S, _pscale, _binv
        base = ring.base
        out.append(_S(ring, _pscale(base, _binv(base, den[0]), num), _canonical=True))
    return out


# ---------------------------------------------------------------------------
# complexes

@dataclass(frozen=True)
class PolyComplex:
    """Bounded complex of finite free modules over a polynomial ring.

    ``terms[i]`` is the rank in cohomological degree ``i``; ``diffs[i]``
    is the matrix of ``d_i : C^i -> C^(i+1)`` (rows index the target).
    ``d_(i+1) o d_i = 0`` is checked exactly at construction.
    """

    ring: RingDescriptor
    terms: Tuple[Tuple[int, int], ...]
    diffs: Tuple[Tuple[int, Tuple[Tuple[Scalar, ...], ...]], ...]

    def __post_init__(self):
        _require_poly_field(self.ring)
        ranks = dict(self.terms)
        for i, mat in self.diffs:
            rows, cols = len(mat), len(mat[0]) if mat else 0
            if cols != ranks.get(i, 0) or rows != ranks.get(i + 1, 0):
                raise ShapeError(f"differential at degree {i} has the wrong shape")
        for i, mat in self.diffs:
            nxt = self.diff(i + 1)
            if nxt and mat:
                prod = mat_mul(nxt, [list(r) for r in mat], self.ring)
                if any(not x.is_zero() for row in prod for x in row):
                    raise StructureError(f"d o d != 0 at degree {i}")

    def rank_at(self, i: int) -> int:
        return dict(self.terms).get(i, 0)

    def degrees(self) -> List[int]:
        return sorted(d for d, r in self.terms if r > 0)

    def diff(self, i: int) -> Matrix:
        for j, mat in self.diffs:
            if j == i:
                return [list(r) for r in mat]
        return zero_matrix(self.rank_at(i + 1), self.rank_at(i), self.ring)


def poly_complex(ring: RingDescriptor, terms: Dict[int, int],
                 diffs: Dict[int, Matrix]) -> PolyComplex:
    t = tuple(sorted((i, r) for i, r in terms.items() if r > 0))
    d = tuple(sorted((i, tuple(tuple(row) for row in mat)) for i, mat in diffs.items()
                     if mat and any(not x.is_zero() for row in mat for x in row)))
    return PolyComplex(ring, t, d)


@dataclass(frozen=True)
class CohomologyDecomposition:
    """Per degree: free rank and variable-power torsion orders (sorted)."""

    data: Tuple[Tuple[int, int, Tuple[int, ...]], ...]

    def free_rank(self, i: int) -> int:
        for d, f, t in self.data:
            if d == i:
                return f
        return 0

    def torsion(self, i: int) -> Tuple[int, ...]:
        for d, f, t in self.data:
            if d == i:
                return t
        return ()

    def is_free(self) -> bool:
        return all(not t for _, _, t in self.data)


def _h_power_order(s: Scalar) -> int:
    """Order of variable-power torsion of a nonzero polynomial: its
    valuation at the variable."""
    for i, c in enumerate(s.value):
        if c != 0:
            return i
    return 0


def poly_cohomology(c: PolyComplex) -> CohomologyDecomposition:
    """Cohomology via Smith normal form of the differentials."""
    ring = c.ring
    degrees = set(c.degrees())
    for i, _ in c.diffs:
        degrees.add(i)
        degrees.add(i + 1)
    out = []
    for i in sorted(degrees):
        n_i = c.rank_at(i)
        if n_i == 0:
            continue
        d_i = c.diff(i)
        d_prev = c.diff(i - 1)
        # free kernel basis via SNF of d_i
        if c.rank_at(i + 1):
            u, dd, v = smith_normal_form(d_i, ring)
            r = sum(1 for k in range(min(len(dd), n_i)) if not dd[k][k].is_zero())
            vinv_cols = _unit_inverse_columns(v, ring)
            kernel = [[vinv_cols[i2][j] for j in range(r, n_i)] for i2 in range(n_i)]
            k_dim = n_i - r
        else:
            kernel = identity_matrix(n_i, ring)
            k_dim = n_i
        if k_dim == 0:
            out.append((i, 0, ()))
            continue
        # coordinates of the image inside the kernel basis (exact over the ring)
        if c.rank_at(i - 1):
            coords = _coords_in_basis(kernel, d_prev, ring)
            invs = invariant_factors(coords, ring)
        else:
            invs = []
        torsion = tuple(sorted(o for o in (_h_power_order(s) for s in invs) if o > 0))
        free = k_dim - len(invs)
        out.append((i, free, torsion))
    return CohomologyDecomposition(tuple(out))


def _unit_inverse_columns(v: Matrix, ring: RingDescriptor) -> Matrix:
    n = len(v)
    cols = []
    for j in range(n):
        e = [one(ring) if i == j else zero(ring) for i in range(n)]
        cols.append(_apply_unit_inverse(v, e, ring))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _coords_in_basis(basis: Matrix, vectors: Matrix, ring: RingDescriptor) -> Matrix:
    """Coordinates of each column of ``vectors`` in the free ``basis``.

    The basis is a basis of a direct summand containing the columns, so
    fraction-field solutions are automatically polynomial.
    """
    if not vectors or not vectors[0]:
        return [[] for _ in range(len(basis[0]) if basis else 0)]
    from .linalg import solve as field_solve
    from .rings import embed_fraction
    frac = fraction_field(ring)
    bf = [[embed_fraction(x) for x in row] for row in basis]
    out_cols = []
    for j in range(len(vectors[0])):
        rhs = [embed_fraction(vectors[i][j]) for i in range(len(vectors))]
        x = field_solve(bf, rhs, frac)
        if x is None:
            raise StructureError("internal: image does not lie in the kernel")
        col = []
        for s in x:
            num, den = s.value
            if len(den) != 1:
                raise StructureError("internal: non-polynomial kernel coordinates")
            from .rings import Scalar as _S, _pscale, _binv
            col.append(_S(ring, _pscale(ring.base, _binv(ring.base, den[0]), num),
                          _canonical=True))
        out_cols.append(col)
    k = len(basis[0]) if basis else 0
    return [[out_cols[j][i] for j in range(len(out_cols))] for i in range(k)]


def fibre_dims(c: PolyComplex, which: str) -> Dict[int, int]:
    """Cohomology dimensions of the special (variable = 0) or generic fibre."""
    ring = c.ring
    if which == "special":
        point = zero(ring.base)
        field = ring.base
        def conv(x: Scalar) -> Scalar:
            return eval_at(x, point)
    elif which == "generic":
        field = fraction_field(ring)
        from .rings import embed_fraction as conv  # type: ignore[assignment]
    else:
        raise ValueError("which must be 'special' or 'generic'")
    degrees = set(c.degrees())
    for i, _ in c.diffs:
        degrees.update((i, i + 1))
    out = {}
    for i in sorted(degrees):
        n_i = c.rank_at(i)
        if n_i == 0:
            continue
        d_i = [[conv(x) for x in row] for row in c.diff(i)]
        d_prev = [[conv(x) for x in row] for row in c.diff(i - 1)]
        r_i = rank(d_i, field) if c.rank_at(i + 1) else 0
        r_prev = rank(d_prev, field) if c.rank_at(i - 1) else 0
        out[i] = n_i - r_i - r_prev
    return out


@dataclass(frozen=True)
class FreenessReport:
    free: bool
    ranks: Dict[int, int]
    witness_degree: Optional[int]
    torsion: Tuple[int, ...]
    decomposition: CohomologyDecomposition


def freeness_test(c: PolyComplex) -> FreenessReport:
    """Fibre-dimension criterion for freeness of the cohomology.

    Two independent paths must agree: equality of special and generic
    fibre dimensions in every degree, and emptiness of the torsion list of
    the Smith-form decomposition.  The universal-coefficients accounting
    ``dim special^i = free_i + t_i + t_(i+1)`` is asserted on every run.
    """
    special = fibre_dims(c, "special")
    generic = fibre_dims(c, "generic")
    decomp = poly_cohomology(c)
    degrees = sorted(set(special) | set(generic))
    for i in degrees:
        s, g = special.get(i, 0), generic.get(i, 0)
        if s < g:
            raise StructureError(f"semicontinuity violated at degree {i}")
        t_i = len(decomp.torsion(i))
        t_next = len(decomp.torsion(i + 1))
        if s != decomp.free_rank(i) + t_i + t_next:
            raise StructureError(f"universal-coefficients accounting fails at degree {i}")
        if g != decomp.free_rank(i):
            raise StructureError(f"generic rank disagrees with the free rank at degree {i}")
    dims_equal = all(special.get(i, 0) == generic.get(i, 0) for i in degrees)
    torsion_free = decomp.is_free()
    if dims_equal != torsion_free:
        raise StructureError("fibre-dimension and torsion criteria disagree")
    if dims_equal:
        return FreenessReport(True, dict(generic), None, (), decomp)
    witness = next(i for i in degrees if special.get(i, 0) != generic.get(i, 0))
    bad = next((i, decomp.torsion(i)) for i in sorted(set(d for d, _, t in decomp.data))
               if decomp.torsion(i))
    return FreenessReport(False, dict(generic), bad[0], bad[1], decomp)
