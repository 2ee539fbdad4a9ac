"""Bigraded Hochschild complexes, their cohomology, base change and the
Rees deformation of a filtered algebra or module.

Two complexes live here.  The pair complex of graded modules ``M, N``
over a graded algebra ``A`` has cochains ``Hom^q(M (x) A^(x p), N)`` and
differential::

    (d f)(m, a_1, ..., a_{p+1}) =
        (-1)^p       f(m a_1, a_2, ..., a_{p+1})
      + sum_{j=1..p} (-1)^(p-j) f(m, ..., a_j a_{j+1}, ..., a_{p+1})
      -              f(m, a_1, ..., a_p) a_{p+1}

with index ranges fixed by the two requirements that ``d`` raise ``p`` by
one and square to zero (verified mechanically by the test suite).  The
two-sided algebra complex ``Hom^q(A^(x p), A)`` extends this by the left
multiplication term and controls multiplication deformations and gauges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .algebras import AInfAlgebra, ainf_algebra, check_alg_relations, graded_algebra
from .exceptions import CoefficientError, ShapeError, StructureError
from .graded import (GradedMap, GradedSpace, Label, MultiOp, Vector,
                     graded_map_from_blocks, graded_map_from_entries,
                     graded_space, multiop, op_add, op_change_ring, op_insert,
                     op_neg, op_scale, op_sum, space_change_ring, tensor_basis,
                     vec_add, vec_scale, zero_op)
from .linalg import Matrix, rank, rref, solve, zero_matrix
from .modules import AInfModule, ainf_module, check_mod_relations
from .rings import (RATIONALS, RingDescriptor, RingMap, Scalar, from_int,
                    one, poly_ring, variable, zero)


def _require_graded_algebra(alg: AInfAlgebra) -> None:
    if not alg.op(1).is_zero() or any(k > 2 for k in alg.ops if alg.has_op(k)):
        raise StructureError("Hochschild complex needs a graded associative algebra")


def _require_binary_module(mod: AInfModule) -> None:
    if any(k != 2 for k in mod.ops if mod.has_op(k)):
        raise StructureError("Hochschild complex needs modules with only the binary action")


@dataclass(frozen=True, eq=False)
class HochschildCochain:
    """Element of ``Hom^q(M (x) A^(x p), N)``."""

    algebra: AInfAlgebra
    source: AInfModule
    target: AInfModule
    body: MultiOp

    def __post_init__(self):
        _require_graded_algebra(self.algebra)
        _require_binary_module(self.source)
        _require_binary_module(self.target)
        expected = (self.source.space,) + (self.algebra.space,) * self.p
        if self.body.slots != expected or self.body.target != self.target.space:
            raise ShapeError("cochain body has the wrong slot signature")

    @property
    def p(self) -> int:
        return self.body.arity - 1

    @property
    def q(self) -> int:
        return self.body.degree

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def __eq__(self, other):
        return (isinstance(other, HochschildCochain) and self.body == other.body
                and self.algebra == other.algebra and self.source == other.source
                and self.target == other.target)

    def __str__(self):
        return f"HochschildCochain(p={self.p}, q={self.q}, {len(self.body.table)} entries)"


def cochain(algebra: AInfAlgebra, source: AInfModule, target: AInfModule,
            body: MultiOp) -> HochschildCochain:
    return HochschildCochain(algebra, source, target, body)


def zero_cochain(algebra: AInfAlgebra, source: AInfModule, target: AInfModule,
                 p: int, q: int) -> HochschildCochain:
    body = zero_op((source.space,) + (algebra.space,) * p, target.space, q)
    return HochschildCochain(algebra, source, target, body)


def hochschild_d(c: HochschildCochain) -> HochschildCochain:
    """The pair-complex differential, ``(p, q) -> (p + 1, q)``."""
    p = c.p
    m2a = c.algebra.op(2)
    m2s = c.source.op(2)
    m2t = c.target.op(2)
    terms: List[MultiOp] = []
    lead = op_insert(c.body, m2s, 0)
    terms.append(lead if p % 2 == 0 else op_neg(lead))
    for j in range(1, p + 1):
        t = op_insert(c.body, m2a, j)
        terms.append(t if (p - j) % 2 == 0 else op_neg(t))
    terms.append(op_neg(op_insert(m2t, c.body, 0)))
    shape = ((c.source.space,) + (c.algebra.space,) * (p + 1), c.target.space, c.q)
    return HochschildCochain(c.algebra, c.source, c.target, op_sum(terms, *shape))


# ---------------------------------------------------------------------------
# bases, matrices and cohomology groups

def cochain_basis(algebra: AInfAlgebra, source: AInfModule, target: AInfModule,
                  p: int, q: int) -> List[Tuple[Tuple[Label, ...], Label]]:
    """Deterministic basis of ``Hom^q(M (x) A^(x p), N)``: one elementary
    cochain per degree-consistent (input tuple, output label) pair."""
    slots = (source.space,) + (algebra.space,) * p
    out = []
    for key in tensor_basis(slots):
        din = sum(sp.degree_of(lab) for sp, lab in zip(slots, key))
        for lab in target.space.labels(din + q):
            out.append((key, lab))
    return out


def elementary_cochain(algebra: AInfAlgebra, source: AInfModule, target: AInfModule,
                       key: Tuple[Label, ...], out_label: Label, q: int) -> HochschildCochain:
    slots = (source.space,) + (algebra.space,) * (len(key) - 1)
    body = multiop(slots, target.space, q, {key: {out_label: one(algebra.space.ring)}})
    return HochschildCochain(algebra, source, target, body)


def cochain_coords(c: HochschildCochain,
                   basis: Sequence[Tuple[Tuple[Label, ...], Label]]) -> List[Scalar]:
    ring = c.algebra.space.ring
    index = {pair: i for i, pair in enumerate(basis)}
    out = [zero(ring)] * len(basis)
    for key, vec in c.body.table.items():
        for lab, coeff in vec.items():
            i = index.get((key, lab))
            if i is None:
                raise StructureError(f"cochain entry {key} -> {lab!r} outside the basis")
            out[i] = coeff
    return out


def coords_to_cochain(algebra: AInfAlgebra, source: AInfModule, target: AInfModule,
                      p: int, q: int, basis, coords: Sequence[Scalar]) -> HochschildCochain:
    slots = (source.space,) + (algebra.space,) * p
    table: Dict[Tuple[Label, ...], Vector] = {}
    for (key, lab), coeff in zip(basis, coords):
        if coeff.is_zero():
            continue
        table.setdefault(key, {})
        table[key] = vec_add(table[key], {lab: coeff})
    return HochschildCochain(algebra, source, target, multiop(slots, target.space, q, table))


def hochschild_matrix(algebra: AInfAlgebra, source: AInfModule, target: AInfModule,
                      p: int, q: int) -> Tuple[list, list, Matrix]:
    """Matrix of the differential from the (p, q) basis to the (p+1, q) basis."""
    dom = cochain_basis(algebra, source, target, p, q)
    cod = cochain_basis(algebra, source, target, p + 1, q)
    ring = algebra.space.ring
    mat = zero_matrix(len(cod), len(dom), ring)
    for jcol, (key, lab) in enumerate(dom):
        img = hochschild_d(elementary_cochain(algebra, source, target, key, lab, q))
        for i, coeff in zip(range(len(cod)), cochain_coords(img, cod)):
            if not coeff.is_zero():
                mat[i][jcol] = coeff
    return dom, cod, mat


@dataclass(frozen=True)
class CohomologyClass:
    """A closed cochain with its closedness certificate.

    Class equality and vanishing are decided by solving ``d x = difference``
    in the one-lower cochain space, never by normalizing representatives.
    """

    representative: HochschildCochain

    def __post_init__(self):
        if not hochschild_d(self.representative).is_zero():
            raise StructureError("representative is not closed")

    @property
    def p(self) -> int:
        return self.representative.p

    @property
    def q(self) -> int:
        return self.representative.q

    def is_zero(self) -> bool:
        return exactness_witness(self.representative) is not None

    def __eq__(self, other):
        if not isinstance(other, CohomologyClass):
            return NotImplemented
        diff = HochschildCochain(
            self.representative.algebra, self.representative.source,
            self.representative.target,
            op_add(self.representative.body, op_neg(other.representative.body)))
        return exactness_witness(diff) is not None


def class_of(c: HochschildCochain) -> CohomologyClass:
    return CohomologyClass(c)


def exactness_witness(c: HochschildCochain) -> Optional[HochschildCochain]:
    """A cochain ``x`` with ``d x = c``, or None; free variables are zeroed.

    Over a polynomial ring the solve runs through the Smith form, so None
    means no polynomial witness exists (the class is nonzero over the ring).
    """
    ring = c.algebra.space.ring
    if not ring.is_field and ring.kind != "poly":
        raise CoefficientError(f"exactness solve needs a field or polynomial ring, got {ring}")
    if c.p == 0:
        return None if not c.is_zero() else zero_cochain(
            c.algebra, c.source, c.target, 0, c.q)
    dom, cod, mat = hochschild_matrix(c.algebra, c.source, c.target, c.p - 1, c.q)
    rhs = cochain_coords(c, cod)
    if ring.is_field:
        x = solve(mat, rhs, ring)
    else:
        from .polycomplex import solve_over_pid
        x = solve_over_pid(mat, rhs, ring)
    if x is None:
        return None
    return coords_to_cochain(c.algebra, c.source, c.target, c.p - 1, c.q, dom, x)


@dataclass(frozen=True)
class HochschildGroup:
    p: int
    q: int
    dimension: int
    classes: Tuple[CohomologyClass, ...]


def hh_group(algebra: AInfAlgebra, source: AInfModule, target: AInfModule,
             p: int, q: int) -> HochschildGroup:
    """``ker d / im d`` at ``(p, q)`` with echelon-chosen representatives."""
    ring = algebra.space.ring
    if not ring.is_field:
        raise CoefficientError(f"hh_group needs a field, got {ring}; "
                               "use hh_decomposition_over_poly for polynomial rings")
    dom, _, mat = hochschild_matrix(algebra, source, target, p, q)
    from .linalg import nullspace
    kernel = nullspace(mat, ring) if dom else []
    if p >= 1:
        below, _, mat_prev = hochschild_matrix(algebra, source, target, p - 1, q)
        img_pivots = rref(mat_prev, ring)[1] if below else []
        image = [[mat_prev[i][j] for j in img_pivots] for i in range(len(dom))]
        n_im = len(img_pivots)
    else:
        image = [[] for _ in dom]
        n_im = 0
    # representatives: kernel columns extending the image (echelon pivots)
    cand = [image[i] + [kernel[j][i] for j in range(len(kernel))] for i in range(len(dom))]
    piv = rref(cand, ring)[1] if cand and cand[0] else []
    reps = [kernel[jc - n_im] for jc in piv if jc >= n_im]
    classes = []
    for v in reps:
        c = coords_to_cochain(algebra, source, target, p, q, dom, v)
        classes.append(CohomologyClass(c))
    return HochschildGroup(p, q, len(kernel) - n_im, tuple(classes))


def hh_decomposition_over_poly(algebra: AInfAlgebra, source: AInfModule,
                               target: AInfModule, p: int, q: int):
    """Free rank and variable-power torsion of ``HH^{p,q}`` over a
    polynomial ring, via the Smith decomposition of the three-term slice."""
    from .polycomplex import poly_complex, poly_cohomology
    ring = algebra.space.ring
    if ring.kind != "poly":
        raise CoefficientError(f"decomposition needs a polynomial ring, got {ring}")
    terms = {}
    diffs = {}
    if p >= 1:
        below, _, mat_prev = hochschild_matrix(algebra, source, target, p - 1, q)
        terms[0] = len(below)
        diffs[0] = mat_prev
    dom, cod, mat = hochschild_matrix(algebra, source, target, p, q)
    terms[1] = len(dom)
    terms[2] = len(cod)
    diffs[1] = mat
    c = poly_complex(ring, terms, diffs)
    dec = poly_cohomology(c)
    return dec.free_rank(1), dec.torsion(1)


# ---------------------------------------------------------------------------
# base change

def algebra_change_ring(alg: AInfAlgebra, ring_map: RingMap) -> AInfAlgebra:
    space = space_change_ring(alg.space, ring_map.target)
    ops = {k: op_change_ring(op, (space,) * k, space, ring_map) for k, op in alg.ops.items()}
    return ainf_algebra(space, ops, truncation=alg.truncation, minimal=alg.minimal,
                        unital=alg.unital, unit=alg.unit)


def module_change_ring(mod: AInfModule, new_algebra: AInfAlgebra,
                       ring_map: RingMap) -> AInfModule:
    space = space_change_ring(mod.space, ring_map.target)
    ops = {k: op_change_ring(op, (space,) + (new_algebra.space,) * (k - 1), space, ring_map)
           for k, op in mod.ops.items()}
    return ainf_module(new_algebra, space, ops, truncation=mod.truncation,
                       minimal=mod.minimal)


@dataclass(frozen=True)
class ComplexSlice:
    """The ``q``-slice of a Hochschild complex in matrix form."""

    ring: RingDescriptor
    q: int
    bases: Tuple[tuple, ...]      # bases[p] for p = 0..p_max+1
    matrices: Tuple[Matrix, ...]  # matrix of d at p = 0..p_max

    def __eq__(self, other):
        return (isinstance(other, ComplexSlice) and self.ring == other.ring
                and self.q == other.q and self.bases == other.bases
                and self.matrices == other.matrices)


def hochschild_complex_slice(algebra: AInfAlgebra, source: AInfModule,
                             target: AInfModule, q: int, p_max: int) -> ComplexSlice:
    bases = []
    mats = []
    for p in range(p_max + 1):
        dom, cod, mat = hochschild_matrix(algebra, source, target, p, q)
        bases.append(tuple(dom))
        mats.append(mat)
        if p == p_max:
            bases.append(tuple(cod))
    return ComplexSlice(algebra.space.ring, q, tuple(bases), tuple(mats))


def base_change_complex_slice(sl: ComplexSlice, ring_map: RingMap) -> ComplexSlice:
    """Entrywise base change of the matrices: the compatibility statement is
    that this equals the slice assembled from base-changed structures."""
    mats = tuple([[ring_map(x) for x in row] for row in m] for m in sl.matrices)
    return ComplexSlice(ring_map.target, sl.q, sl.bases, mats)


# ---------------------------------------------------------------------------
# two-sided algebra complex (multiplication deformations and gauges)

def algebra_cochain_basis(alg: AInfAlgebra, p: int, q: int):
    if p == 0:
        # 0-cochains are elements of internal degree q
        return [((), lab) for lab in alg.space.labels(q)]
    slots = (alg.space,) * p
    out = []
    for key in tensor_basis(slots):
        din = sum(alg.space.degree_of(lab) for lab in key)
        for lab in alg.space.labels(din + q):
            out.append((key, lab))
    return out


def algebra_hochschild_d(alg: AInfAlgebra, body: MultiOp) -> MultiOp:
    """Two-sided differential on ``Hom^q(A^(x p), A)``.

    Extends the pair differential by the left-multiplication term
    ``(-1)^p m_2(id (x) f)`` (whose Koszul evaluation supplies the
    ``(-1)^(q |a_0|)`` sign); squares to zero for any graded associative
    algebra and any internal degree.
    """
    _require_graded_algebra(alg)
    p = body.arity
    m2 = alg.op(2)
    if body.slots != (alg.space,) * p or body.target != alg.space:
        raise ShapeError("not an algebra cochain")
    terms: List[MultiOp] = []
    left = op_insert(m2, body, 1)
    terms.append(left if p % 2 == 0 else op_neg(left))
    for j in range(0, p):
        t = op_insert(body, m2, j)
        terms.append(t if (p - 1 - j) % 2 == 0 else op_neg(t))
    terms.append(op_neg(op_insert(m2, body, 0)))
    shape = ((alg.space,) * (p + 1), alg.space, body.degree)
    return op_sum(terms, *shape)


def algebra_hochschild_matrix(alg: AInfAlgebra, p: int, q: int):
    dom = algebra_cochain_basis(alg, p, q)
    cod = algebra_cochain_basis(alg, p + 1, q)
    ring = alg.space.ring
    mat = zero_matrix(len(cod), len(dom), ring)
    index = {pair: i for i, pair in enumerate(cod)}
    from .graded import apply_multi
    for jcol, (key, lab) in enumerate(dom):
        if p == 0:
            # d(a)(x) = (-1)^(q |x|) x a - a x
            img_table: Dict[Tuple[Label, ...], Vector] = {}
            for x in alg.space.all_labels():
                right = apply_multi(alg.op(2), (x, lab))
                sgn = -1 if (q * alg.space.degree_of(x)) % 2 else 1
                if sgn == -1:
                    right = {k2: -v for k2, v in right.items()}
                left = apply_multi(alg.op(2), (lab, x))
                val = vec_add(right, {k2: -v for k2, v in left.items()})
                if val:
                    img_table[(x,)] = val
            img = multiop((alg.space,), alg.space, q, img_table)
        else:
            body = multiop((alg.space,) * p, alg.space, q, {key: {lab: one(ring)}})
            img = algebra_hochschild_d(alg, body)
        for k2, vec in img.table.items():
            for lab2, coeff in vec.items():
                mat[index[(k2, lab2)]][jcol] = coeff
    return dom, cod, mat


def algebra_class_vanishes(alg: AInfAlgebra, body: MultiOp) -> Optional[MultiOp]:
    """A primitive ``x`` with ``d x = -body`` in the two-sided complex, or None."""
    p, q = body.arity, body.degree
    if p == 0:
        return None
    ring = alg.space.ring
    dom, cod, mat = algebra_hochschild_matrix(alg, p - 1, q)
    index = {pair: i for i, pair in enumerate(cod)}
    rhs = [zero(ring)] * len(cod)
    for key, vec in body.table.items():
        for lab, coeff in vec.items():
            rhs[index[(key, lab)]] = -coeff
    x = solve(mat, rhs, ring)
    if x is None:
        return None
    table: Dict[Tuple[Label, ...], Vector] = {}
    for (key, lab), coeff in zip(dom, x):
        if not coeff.is_zero():
            table.setdefault(key, {})
            table[key] = vec_add(table[key], {lab: coeff})
    return multiop((alg.space,) * (p - 1), alg.space, q, table)


def algebra_hh_dimension(alg: AInfAlgebra, p: int, q: int) -> int:
    ring = alg.space.ring
    dom, _, mat = algebra_hochschild_matrix(alg, p, q)
    from .linalg import nullspace
    kernel_dim = len(nullspace(mat, ring)) if dom else 0
    if p >= 1:
        below, _, prev = algebra_hochschild_matrix(alg, p - 1, q)
        image_rank = rank(prev, ring) if below else 0
    else:
        image_rank = 0
    return kernel_dim - image_rank


# ---------------------------------------------------------------------------
# filtrations and the Rees deformation

@dataclass(frozen=True)
class Filtration:
    """Decreasing multiplicative filtration of a graded algebra (optionally
    with a compatible module filtration).

    ``levels[i]`` spans ``F^i`` per degree; ``F^0`` is everything and the
    chain ends at zero after the last listed level.
    """

    algebra: AInfAlgebra
    levels: Tuple[Mapping[int, Tuple[Vector, ...]], ...]
    module: Optional[AInfModule] = None
    module_levels: Optional[Tuple[Mapping[int, Tuple[Vector, ...]], ...]] = None

    def depth(self) -> int:
        return len(self.levels)


def _degree_part(space: GradedSpace, vectors: Sequence[Vector], d: int) -> List[Vector]:
    from .graded import vec_degree
    return [v for v in vectors if v and vec_degree(space, v) == d]


def _vector_in_span(space: GradedSpace, vectors: Sequence[Vector], v: Vector) -> bool:
    from .graded import vec_degree
    d = vec_degree(space, v)
    if d is None:
        return True
    labels = space.labels(d)
    ring = space.ring
    in_deg = _degree_part(space, vectors, d)
    mat = [[w.get(lab, zero(ring)) for w in in_deg] for lab in labels]
    rhs = [v.get(lab, zero(ring)) for lab in labels]
    return solve(mat, rhs, ring) is not None


def _flatten(level: Mapping[int, Tuple[Vector, ...]]) -> List[Vector]:
    return [v for _, vecs in sorted(level.items()) for v in vecs]


def _check_decreasing_exhaustive(space: GradedSpace, levels) -> None:
    n = len(levels)
    for i in range(1, n):
        prev = _flatten(levels[i - 1])
        for v in _flatten(levels[i]):
            if not _vector_in_span(space, prev, v):
                raise StructureError(f"filtration not decreasing at level {i}")
    f0 = _flatten(levels[0]) if n else []
    for lab in space.all_labels():
        if not _vector_in_span(space, f0, {lab: one(space.ring)}):
            raise StructureError("level 0 of the filtration must span the carrier")


def _check_products_land(op: MultiOp, left_space: GradedSpace, left_levels,
                         right_levels, out_space: GradedSpace, out_levels,
                         what: str) -> None:
    from .graded import apply_multi
    n_out = len(out_levels)
    for a in range(len(left_levels)):
        for b in range(len(right_levels)):
            tgt = _flatten(out_levels[a + b]) if a + b < n_out else None
            for va in _flatten(left_levels[a]):
                for vb in _flatten(right_levels[b]):
                    prod = apply_multi(op, (va, vb))
                    if not prod:
                        continue
                    if tgt is None or not _vector_in_span(out_space, tgt, prod):
                        raise StructureError(
                            f"{what} violated at levels ({a}, {b})")


def filtration(algebra: AInfAlgebra, levels, module: Optional[AInfModule] = None,
               module_levels=None) -> Filtration:
    _require_graded_algebra(algebra)
    levels = tuple({d: tuple(vs) for d, vs in lv.items()} for lv in levels)
    _check_decreasing_exhaustive(algebra.space, levels)
    _check_products_land(algebra.op(2), algebra.space, levels, levels,
                         algebra.space, levels, "multiplicativity F^a F^b <= F^(a+b)")
    if module is not None:
        _require_binary_module(module)
        module_levels = tuple({d: tuple(vs) for d, vs in lv.items()} for lv in module_levels)
        _check_decreasing_exhaustive(module.space, module_levels)
        _check_products_land(module.op(2), module.space, module_levels, levels,
                             module.space, module_levels,
                             "module filtration compatibility F^a_M F^b_A <= F^(a+b)_M")
    return Filtration(algebra, levels, module, module_levels)


@dataclass(frozen=True)
class AdaptedBasis:
    """Basis adapted to a filtration: per label a level, plus the change of
    basis from the carrier to the adapted coordinates."""

    space: GradedSpace                # same labels as the carrier
    level_of: Mapping[Label, int]
    to_adapted: GradedMap             # carrier -> adapted coordinates
    from_adapted: GradedMap           # adapted -> carrier


def adapted_basis(space: GradedSpace, levels) -> AdaptedBasis:
    """Choose, degree by degree, a basis threading the filtration flag.

    Vectors are picked from the deepest level upward by echelon pivoting,
    so every adapted vector has a well-defined level ``max{i : v in F^i}``.
    """
    ring = space.ring
    n = len(levels)
    level_of: Dict[Label, int] = {}
    from_blocks: Dict[int, Matrix] = {}
    for d in space.degrees():
        nd = space.dim(d)
        labels = space.labels(d)
        picked: List[List[Scalar]] = []   # coordinate columns
        picked_levels: List[int] = []
        for lev in range(n - 1, -1, -1):
            for v in _degree_part(space, _flatten(levels[lev]), d):
                col = [v.get(lab, zero(ring)) for lab in labels]
                mat = [[picked[j][i] for j in range(len(picked))] + [col[i]]
                       for i in range(nd)]
                if rank(mat, ring) > len(picked):
                    picked.append(col)
                    picked_levels.append(lev)
        if len(picked) != nd:
            raise StructureError("filtration levels do not exhaust the carrier")
        from_blocks[d] = [[picked[j][i] for j in range(nd)] for i in range(nd)]
        for j in range(nd):
            level_of[labels[j]] = picked_levels[j]
    from .linalg import inverse
    to_blocks = {d: inverse(m, ring) for d, m in from_blocks.items()}
    from_map = graded_map_from_blocks(space, space, 0, from_blocks)
    to_map = graded_map_from_blocks(space, space, 0, to_blocks)
    return AdaptedBasis(space, level_of, to_map, from_map)


@dataclass(frozen=True)
class ReesDeformation:
    """The one-parameter deformation attached to a filtration.

    ``algebra`` lives over the polynomial ring; evaluation at 1 recovers
    the carrier (in adapted coordinates) and evaluation at 0 gives the
    associated graded structure.
    """

    algebra: AInfAlgebra
    adapted: AdaptedBasis
    module: Optional[AInfModule] = None
    module_adapted: Optional[AdaptedBasis] = None


def rees_deformation(filt: Filtration) -> ReesDeformation:
    """Free polynomial model of the filtration: on an adapted basis the
    structure constants pick up ``h^(level(out) - level(x) - level(y))``."""
    base = filt.algebra.space.ring
    if base.kind not in ("rationals", "prime_field"):
        raise CoefficientError("Rees deformation needs field coefficients")
    ring = poly_ring("h", base)
    from .rings import from_coeffs

    def emb(c: Scalar) -> Scalar:
        return from_coeffs(ring, (c.value,))

    h = variable(ring)

    ab = adapted_basis(filt.algebra.space, filt.levels)
    space_h = space_change_ring(filt.algebra.space, ring)
    m2 = _conjugated_op(filt.algebra.op(2), ab, ab, ab)
    table: Dict[Tuple[Label, ...], Vector] = {}
    for (x, y), vec in m2.items():
        lx, ly = ab.level_of[x], ab.level_of[y]
        out: Vector = {}
        for lab, c in vec.items():
            gap = ab.level_of[lab] - lx - ly
            if gap < 0:
                raise StructureError("filtration is not multiplicative on the adapted basis")
            out[lab] = emb(c) * h ** gap
        if out:
            table[(x, y)] = out
    alg_h = graded_algebra(space_h, multiop((space_h, space_h), space_h, 0, table))
    fail = check_alg_relations(alg_h)
    if fail is not None:
        raise StructureError(f"Rees algebra fails associativity: {fail}")

    mod_h = None
    mab = None
    if filt.module is not None:
        mab = adapted_basis(filt.module.space, filt.module_levels)
        mspace_h = space_change_ring(filt.module.space, ring)
        act = _conjugated_op(filt.module.op(2), mab, mab, ab)
        mtable: Dict[Tuple[Label, ...], Vector] = {}
        for (x, a), vec in act.items():
            lx, la = mab.level_of[x], ab.level_of[a]
            out = {}
            for lab, c in vec.items():
                gap = mab.level_of[lab] - lx - la
                if gap < 0:
                    raise StructureError("module filtration is not compatible on the adapted basis")
                out[lab] = emb(c) * h ** gap
            if out:
                mtable[(x, a)] = out
        mod_h = ainf_module(alg_h, mspace_h,
                            {2: multiop((mspace_h, space_h), mspace_h, 0, mtable)},
                            minimal=True)
        fail = check_mod_relations(mod_h)
        if fail is not None:
            raise StructureError(f"Rees module fails the module relations: {fail}")
    return ReesDeformation(alg_h, ab, mod_h, mab)


def _conjugated_op(op: MultiOp, out_basis: AdaptedBasis, *slot_bases: AdaptedBasis):
    """Structure constants of a binary operation in adapted coordinates."""
    from .graded import apply_multi
    table: Dict[Tuple[Label, ...], Vector] = {}
    slots = op.slots
    for key in tensor_basis(slots):
        args = []
        for lab, basis in zip(key, (slot_bases[0], slot_bases[1])):
            args.append(basis.from_adapted.apply({lab: one(op.target.ring)}))
        val = apply_multi(op, tuple(args))
        val = out_basis.to_adapted.apply(val)
        if val:
            table[key] = val
    return table


def rees_fibre_algebra(rd: ReesDeformation, point: Scalar) -> AInfAlgebra:
    """Evaluate the Rees algebra at a base point."""
    ring = rd.algebra.space.ring
    from .rings import evaluation_map
    return algebra_change_ring(rd.algebra, evaluation_map(ring, point))


def rees_fibre_module(rd: ReesDeformation, point: Scalar,
                      fibre_alg: AInfAlgebra) -> AInfModule:
    ring = rd.algebra.space.ring
    from .rings import evaluation_map
    return module_change_ring(rd.module, fibre_alg, evaluation_map(ring, point))
