"""Graded spaces, graded maps and sparse multilinear operators.

A :class:`GradedSpace` is a finite named basis distributed over finitely
many integer degrees.  Vectors are sparse ``{label: Scalar}`` dicts with
no stored zeros.  A :class:`MultiOp` is a sparse multilinear operator
keyed by basis-label tuples; raw application is a sign-free table lookup
extended linearly, and all Koszul signs enter through the composition
combinators (:func:`op_insert`, :func:`op_tensor_compose`) and the shift
dictionary (:func:`suspend_op` / :func:`desuspend_op`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from . import signs
from .exceptions import CoefficientError, ShapeError, StructureError
from .linalg import Matrix
from .rings import RingDescriptor, RingMap, Scalar, one, zero

Vector = Dict[str, Scalar]
Label = str


# ---------------------------------------------------------------------------
# spaces

@dataclass(frozen=True)
class GradedSpace:
    """Finite-dimensional graded module with a named basis."""

    ring: RingDescriptor
    components: Tuple[Tuple[int, Tuple[Label, ...]], ...]

    def __post_init__(self):
        seen = {}
        for deg, labels in self.components:
            if not labels:
                raise StructureError(f"degree {deg} listed with no basis labels")
            for i, lab in enumerate(labels):
                if lab in seen:
                    raise StructureError(f"duplicate basis label {lab!r}")
                seen[lab] = (deg, i)
        degs = [d for d, _ in self.components]
        if degs != sorted(degs):
            raise StructureError("components must be sorted by degree")
        object.__setattr__(self, "_where", seen)

    # -- queries ----------------------------------------------------------
    def degrees(self) -> Tuple[int, ...]:
        return tuple(d for d, _ in self.components)

    def labels(self, degree: int) -> Tuple[Label, ...]:
        for d, ls in self.components:
            if d == degree:
                return ls
        return ()

    def dim(self, degree: int) -> int:
        return len(self.labels(degree))

    def total_dim(self) -> int:
        return sum(len(ls) for _, ls in self.components)

    def all_labels(self) -> Tuple[Label, ...]:
        return tuple(lab for _, ls in self.components for lab in ls)

    def degree_of(self, label: Label) -> int:
        try:
            return self._where[label][0]
        except KeyError:
            raise ShapeError(f"label {label!r} not in space") from None

    def position_of(self, label: Label) -> Tuple[int, int]:
        """(degree, index within that degree)."""
        try:
            return self._where[label]
        except KeyError:
            raise ShapeError(f"label {label!r} not in space") from None

    def __contains__(self, label: Label) -> bool:
        return label in self._where

    def is_zero(self) -> bool:
        return not self.components

    def __str__(self):
        inner = ", ".join(f"{d}:{len(ls)}" for d, ls in self.components)
        return f"GradedSpace({self.ring}; {inner})"


def graded_space(ring: RingDescriptor, components: Mapping[int, Sequence[Label]]) -> GradedSpace:
    comps = tuple((d, tuple(components[d])) for d in sorted(components) if len(components[d]) > 0)
    return GradedSpace(ring, comps)


def shift_space(space: GradedSpace) -> GradedSpace:
    """The suspension: same labels, every degree lowered by one."""
    return GradedSpace(space.ring, tuple((d - 1, ls) for d, ls in space.components))


def unshift_space(space: GradedSpace) -> GradedSpace:
    return GradedSpace(space.ring, tuple((d + 1, ls) for d, ls in space.components))


def space_change_ring(space: GradedSpace, ring: RingDescriptor) -> GradedSpace:
    return GradedSpace(ring, space.components)


# ---------------------------------------------------------------------------
# sparse vectors

def vec_add(u: Vector, v: Vector) -> Vector:
    out = dict(u)
    for k, c in v.items():
        s = out.get(k)
        s = c if s is None else s + c
        if s.is_zero():
            out.pop(k, None)
        else:
            out[k] = s
    return out


def vec_scale(c: Scalar, v: Vector) -> Vector:
    if c.is_zero():
        return {}
    return {k: c * x for k, x in v.items()}


def vec_neg(v: Vector) -> Vector:
    return {k: -x for k, x in v.items()}


def vec_sub(u: Vector, v: Vector) -> Vector:
    return vec_add(u, vec_neg(v))


def vec_is_zero(v: Vector) -> bool:
    return not v


def vec_clean(v: Vector) -> Vector:
    return {k: c for k, c in v.items() if not c.is_zero()}


def vec_degree(space: GradedSpace, v: Vector) -> Optional[int]:
    """Degree of a homogeneous vector (None for zero); error if mixed."""
    degs = {space.degree_of(k) for k in v}
    if not degs:
        return None
    if len(degs) > 1:
        raise StructureError(f"vector is not homogeneous: degrees {sorted(degs)}")
    return degs.pop()


def basis_vector(space: GradedSpace, label: Label) -> Vector:
    if label not in space:
        raise ShapeError(f"label {label!r} not in space")
    return {label: one(space.ring)}


# ---------------------------------------------------------------------------
# graded maps

@dataclass(frozen=True)
class GradedMap:
    """Degree-homogeneous linear map, stored as per-degree dense blocks.

    ``blocks[d]`` maps the degree-``d`` component of the source into the
    degree ``d + degree`` component of the target; absent blocks are zero.
    """

    source: GradedSpace
    target: GradedSpace
    degree: int
    blocks: Tuple[Tuple[int, Tuple[Tuple[Scalar, ...], ...]], ...]

    def __post_init__(self):
        for d, mat in self.blocks:
            rows = self.target.dim(d + self.degree)
            cols = self.source.dim(d)
            if len(mat) != rows or any(len(r) != cols for r in mat):
                raise ShapeError(f"block at degree {d} has wrong shape")

    def block(self, d: int) -> Optional[Matrix]:
        for deg, mat in self.blocks:
            if deg == d:
                return [list(r) for r in mat]
        return None

    def block_or_zero(self, d: int) -> Matrix:
        b = self.block(d)
        if b is not None:
            return b
        z = zero(self.source.ring)
        return [[z] * self.source.dim(d) for _ in range(self.target.dim(d + self.degree))]

    def entry(self, out_label: Label, in_label: Label) -> Scalar:
        d, j = self.source.position_of(in_label)
        od, i = self.target.position_of(out_label)
        if od != d + self.degree:
            return zero(self.source.ring)
        b = self.block(d)
        return b[i][j] if b is not None else zero(self.source.ring)

    def apply(self, v: Vector) -> Vector:
        out: Vector = {}
        ring = self.source.ring
        for lab, c in v.items():
            d, j = self.source.position_of(lab)
            b = self.block(d)
            if b is None:
                continue
            tlabels = self.target.labels(d + self.degree)
            for i, t in enumerate(tlabels):
                x = b[i][j]
                if not x.is_zero():
                    s = out.get(t, zero(ring)) + c * x
                    if s.is_zero():
                        out.pop(t, None)
                    else:
                        out[t] = s
        return out

    def is_zero(self) -> bool:
        return all(x.is_zero() for _, m in self.blocks for r in m for x in r)

    def __str__(self):
        return f"GradedMap(deg {self.degree}, {self.source} -> {self.target})"


def graded_map_from_blocks(source: GradedSpace, target: GradedSpace, degree: int,
                           blocks: Mapping[int, Matrix]) -> GradedMap:
    packed = []
    for d in sorted(blocks):
        mat = blocks[d]
        if all(x.is_zero() for r in mat for x in r):
            continue
        packed.append((d, tuple(tuple(r) for r in mat)))
    return GradedMap(source, target, degree, tuple(packed))


def graded_map_from_entries(source: GradedSpace, target: GradedSpace, degree: int,
                            entries: Mapping[Tuple[Label, Label], Scalar]) -> GradedMap:
    """Build from ``{(out_label, in_label): coefficient}``."""
    z = zero(source.ring)
    blocks: Dict[int, Matrix] = {}
    for (out_lab, in_lab), c in entries.items():
        d, j = source.position_of(in_lab)
        od, i = target.position_of(out_lab)
        if od != d + degree:
            raise StructureError(
                f"entry ({out_lab!r}, {in_lab!r}) violates degree: {od} != {d} + {degree}")
        mat = blocks.setdefault(d, [[z] * source.dim(d) for _ in range(target.dim(d + degree))])
        mat[i][j] = mat[i][j] + c
    return graded_map_from_blocks(source, target, degree, blocks)


def identity_graded_map(space: GradedSpace) -> GradedMap:
    blocks = {}
    o, z = one(space.ring), zero(space.ring)
    for d, ls in space.components:
        n = len(ls)
        blocks[d] = [[o if i == j else z for j in range(n)] for i in range(n)]
    return graded_map_from_blocks(space, space, 0, blocks)


def zero_graded_map(source: GradedSpace, target: GradedSpace, degree: int) -> GradedMap:
    return GradedMap(source, target, degree, ())


def compose_graded(g: GradedMap, f: GradedMap) -> GradedMap:
    """Blockwise matrix product ``g o f``; degrees add."""
    if f.target != g.source:
        raise ShapeError("compose_graded: f.target != g.source")
    from .linalg import mat_mul
    blocks = {}
    for d, _ in f.blocks:
        bf = f.block(d)
        bg = g.block(d + f.degree)
        if bf is None or bg is None:
            continue
        blocks[d] = mat_mul(bg, bf, f.source.ring)
    return graded_map_from_blocks(f.source, g.target, f.degree + g.degree, blocks)


def add_graded(f: GradedMap, g: GradedMap) -> GradedMap:
    if f.source != g.source or f.target != g.target or f.degree != g.degree:
        raise ShapeError("add_graded: shape mismatch")
    degrees = {d for d, _ in f.blocks} | {d for d, _ in g.blocks}
    from .linalg import mat_add
    blocks = {d: mat_add(f.block_or_zero(d), g.block_or_zero(d)) for d in degrees}
    return graded_map_from_blocks(f.source, f.target, f.degree, blocks)


def scale_graded(c: Scalar, f: GradedMap) -> GradedMap:
    from .linalg import mat_scale
    blocks = {d: mat_scale(c, f.block(d)) for d, _ in f.blocks}
    return graded_map_from_blocks(f.source, f.target, f.degree, blocks)


def map_change_ring(f: GradedMap, source: GradedSpace, target: GradedSpace,
                    ring_map: RingMap) -> GradedMap:
    blocks = {d: [[ring_map(x) for x in row] for row in mat] for d, mat in f.blocks}
    return graded_map_from_blocks(source, target, f.degree, blocks)


# ---------------------------------------------------------------------------
# sparse multilinear operators

@dataclass(frozen=True, eq=False)
class MultiOp:
    """Sparse multilinear operator ``slots[0] (x) ... (x) slots[k-1] -> target``.

    The table stores only nonzero values; every entry is checked for
    degree consistency at construction.
    """

    slots: Tuple[GradedSpace, ...]
    target: GradedSpace
    degree: int
    table: Dict[Tuple[Label, ...], Vector]

    def __post_init__(self):
        if not self.slots:
            raise ShapeError("MultiOp needs arity >= 1")
        for key, v in self.table.items():
            if len(key) != len(self.slots):
                raise ShapeError(f"key {key} has wrong arity")
            din = sum(sp.degree_of(lab) for sp, lab in zip(self.slots, key))
            for out_lab in v:
                if self.target.degree_of(out_lab) != din + self.degree:
                    raise StructureError(
                        f"table entry {key} -> {out_lab!r} violates degree "
                        f"{self.target.degree_of(out_lab)} != {din} + {self.degree}")

    @property
    def arity(self) -> int:
        return len(self.slots)

    def is_zero(self) -> bool:
        return not self.table

    def __eq__(self, other):
        return (isinstance(other, MultiOp) and self.slots == other.slots
                and self.target == other.target and self.degree == other.degree
                and self.table == other.table)

    def entry(self, key: Tuple[Label, ...]) -> Vector:
        return dict(self.table.get(key, {}))

    def __str__(self):
        return f"MultiOp(arity {self.arity}, deg {self.degree}, {len(self.table)} entries)"


def multiop(slots: Sequence[GradedSpace], target: GradedSpace, degree: int,
            table: Mapping[Tuple[Label, ...], Vector]) -> MultiOp:
    clean = {}
    for key, v in table.items():
        cv = vec_clean(v)
        if cv:
            clean[tuple(key)] = cv
    return MultiOp(tuple(slots), target, degree, clean)


def zero_op(slots: Sequence[GradedSpace], target: GradedSpace, degree: int) -> MultiOp:
    return MultiOp(tuple(slots), target, degree, {})


def identity_op(space: GradedSpace) -> MultiOp:
    table = {(lab,): {lab: one(space.ring)} for lab in space.all_labels()}
    return MultiOp((space,), space, 0, table)


def op_from_graded(f: GradedMap) -> MultiOp:
    table: Dict[Tuple[Label, ...], Vector] = {}
    for lab in f.source.all_labels():
        v = f.apply(basis_vector(f.source, lab))
        if v:
            table[(lab,)] = v
    return MultiOp((f.source,), f.target, f.degree, table)


def graded_from_op(op: MultiOp) -> GradedMap:
    if op.arity != 1:
        raise ShapeError("only arity-1 operators convert to graded maps")
    entries = {}
    for (lab,), v in op.table.items():
        for out_lab, c in v.items():
            entries[(out_lab, lab)] = c
    return graded_map_from_entries(op.slots[0], op.target, op.degree, entries)


def apply_multi(op: MultiOp, args: Sequence[Union[Label, Vector]]) -> Vector:
    """Raw multilinear application; no signs here by design."""
    if len(args) != op.arity:
        raise ShapeError(f"arity mismatch: expected {op.arity}, got {len(args)}")
    vecs: List[Vector] = []
    for sp, a in zip(op.slots, args):
        if isinstance(a, str):
            vecs.append(basis_vector(sp, a))
        else:
            for lab in a:
                if lab not in sp:
                    raise ShapeError(f"label {lab!r} not in slot space")
            vecs.append(a)
    out: Vector = {}
    ring = op.target.ring

    def rec(i: int, key: Tuple[Label, ...], coeff: Scalar):
        nonlocal out
        if coeff.is_zero():
            return
        if i == len(vecs):
            hit = op.table.get(key)
            if hit:
                out = vec_add(out, vec_scale(coeff, hit))
            return
        for lab, c in vecs[i].items():
            rec(i + 1, key + (lab,), coeff * c)

    rec(0, (), one(ring))
    return out


def op_add(a: MultiOp, b: MultiOp) -> MultiOp:
    if a.slots != b.slots or a.target != b.target or a.degree != b.degree:
        raise ShapeError("op_add: shape mismatch")
    table = {k: dict(v) for k, v in a.table.items()}
    for k, v in b.table.items():
        table[k] = vec_add(table.get(k, {}), v)
    return multiop(a.slots, a.target, a.degree, table)


def op_scale(c: Scalar, a: MultiOp) -> MultiOp:
    return multiop(a.slots, a.target, a.degree, {k: vec_scale(c, v) for k, v in a.table.items()})


def op_neg(a: MultiOp) -> MultiOp:
    return multiop(a.slots, a.target, a.degree, {k: vec_neg(v) for k, v in a.table.items()})


def op_sum(ops: Iterable[MultiOp], slots=None, target=None, degree=None) -> MultiOp:
    acc = None
    for op in ops:
        acc = op if acc is None else op_add(acc, op)
    if acc is None:
        if slots is None:
            raise ShapeError("empty op_sum needs an explicit shape")
        return zero_op(slots, target, degree)
    return acc


def op_insert(outer: MultiOp, inner: MultiOp, pos: int) -> MultiOp:
    """``outer o (id^(x pos) (x) inner (x) id^(x rest))`` with Koszul signs.

    The sign ``(-1)^(|inner| * deg(prefix))`` is applied per basis tuple.
    """
    if not (0 <= pos < outer.arity):
        raise ShapeError("insert position out of range")
    if inner.target != outer.slots[pos]:
        raise ShapeError("inner target does not match outer slot")
    new_slots = outer.slots[:pos] + inner.slots + outer.slots[pos + 1:]
    # index inner entries by output label
    by_out: Dict[Label, List[Tuple[Tuple[Label, ...], Scalar]]] = {}
    for ikey, ivec in inner.table.items():
        for out_lab, c in ivec.items():
            by_out.setdefault(out_lab, []).append((ikey, c))
    table: Dict[Tuple[Label, ...], Vector] = {}
    for okey, ovec in outer.table.items():
        hits = by_out.get(okey[pos])
        if not hits:
            continue
        prefix_deg = sum(sp.degree_of(lab) for sp, lab in zip(outer.slots[:pos], okey[:pos]))
        sgn = signs.koszul_insert_sign(inner.degree, prefix_deg)
        for ikey, c in hits:
            coeff = c if sgn == 1 else -c
            key = okey[:pos] + ikey + okey[pos + 1:]
            table[key] = vec_add(table.get(key, {}), vec_scale(coeff, ovec))
    return multiop(new_slots, outer.target, outer.degree + inner.degree, table)


def op_tensor_compose(outer: MultiOp, parts: Sequence[MultiOp]) -> MultiOp:
    """``outer o (parts[0] (x) ... (x) parts[r-1])`` with Koszul signs."""
    if len(parts) != outer.arity:
        raise ShapeError("need one part per outer slot")
    for sp, p in zip(outer.slots, parts):
        if p.target != sp:
            raise ShapeError("part target does not match outer slot")
    new_slots = tuple(s for p in parts for s in p.slots)
    ring = outer.target.ring
    map_degs = [p.degree for p in parts]
    table: Dict[Tuple[Label, ...], Vector] = {}

    part_items = [list(p.table.items()) for p in parts]
    if any(not items for items in part_items):
        return zero_op(new_slots, outer.target, outer.degree + sum(map_degs))

    def rec(u: int, key: Tuple[Label, ...], out_labs: Tuple[Label, ...],
            coeff: Scalar, block_degs: Tuple[int, ...]):
        if u == len(parts):
            hit = outer.table.get(out_labs)
            if hit:
                sgn = signs.koszul_tensor_sign(map_degs, block_degs)
                c = coeff if sgn == 1 else -coeff
                table[key] = vec_add(table.get(key, {}), vec_scale(c, hit))
            return
        for pkey, pvec in part_items[u]:
            bdeg = sum(sp.degree_of(lab) for sp, lab in zip(parts[u].slots, pkey))
            for out_lab, c in pvec.items():
                rec(u + 1, key + pkey, out_labs + (out_lab,), coeff * c, block_degs + (bdeg,))

    rec(0, (), (), one(ring), ())
    return multiop(new_slots, outer.target, outer.degree + sum(map_degs), table)


# ---------------------------------------------------------------------------
# the shift dictionary

def suspend_op(m: MultiOp) -> MultiOp:
    """Transport an operation to the shifted spaces.

    ``m -> (-1)^(k - 1 + deg m) s o m o (s^-1)^(x k)``; the resulting
    operator keeps the same labels, lives on the shifted slot spaces and
    has degree ``deg m + k - 1``.
    """
    k = m.arity
    lead = signs.suspension_sign(k, m.degree)
    new_slots = tuple(shift_space(sp) for sp in m.slots)
    new_target = shift_space(m.target)
    table = {}
    for key, v in m.table.items():
        degs = [sp.degree_of(lab) for sp, lab in zip(m.slots, key)]
        sgn = lead * signs.shift_tuple_sign(degs, shift=-1)
        table[key] = v if sgn == 1 else vec_neg(v)
    return multiop(new_slots, new_target, m.degree + k - 1, table)


def desuspend_op(d: MultiOp) -> MultiOp:
    """Inverse of :func:`suspend_op`."""
    k = d.arity
    m_degree = d.degree - (k - 1)
    lead = signs.suspension_sign(k, m_degree) * signs.shift_power_swap_sign(k)
    new_slots = tuple(unshift_space(sp) for sp in d.slots)
    new_target = unshift_space(d.target)
    table = {}
    for key, v in d.table.items():
        degs = [sp.degree_of(lab) for sp, lab in zip(new_slots, key)]
        sgn = lead * signs.shift_tuple_sign(degs, shift=+1)
        table[key] = v if sgn == 1 else vec_neg(v)
    return multiop(new_slots, new_target, m_degree, table)


def op_change_ring(op: MultiOp, slots: Sequence[GradedSpace], target: GradedSpace,
                   ring_map: RingMap) -> MultiOp:
    table = {k: {lab: ring_map(c) for lab, c in v.items()} for k, v in op.table.items()}
    return multiop(slots, target, op.degree, table)


# ---------------------------------------------------------------------------
# enumeration and saturation

def tensor_basis(slots: Sequence[GradedSpace],
                 window: Optional[Tuple[int, int]] = None) -> List[Tuple[Label, ...]]:
    """All basis tuples in deterministic lexicographic order.

    Per-slot order is the space's canonical label order (by degree, then
    position); ``window`` restricts the total degree to ``[lo, hi]``.
    """
    out: List[Tuple[Label, ...]] = []

    def rec(i: int, key: Tuple[Label, ...], deg: int):
        if i == len(slots):
            if window is None or window[0] <= deg <= window[1]:
                out.append(key)
            return
        for lab in slots[i].all_labels():
            rec(i + 1, key + (lab,), deg + slots[i].degree_of(lab))

    rec(0, (), 0)
    return out


def max_feasible_letters(letter_degrees: Iterable[int], targets: Iterable[int]) -> Optional[int]:
    """Largest count k for which some k letters sum into ``targets``.

    Returns None when arbitrarily large counts are feasible and 0 when no
    count at all is.  Letters may repeat.
    """
    letters = sorted(set(letter_degrees))
    targets = set(targets)
    if not letters or not targets:
        return 0
    lo, hi = min(letters), max(letters)
    span = max(abs(t) for t in targets) + max(abs(lo), abs(hi))
    cap = 2 * span + 8
    reachable = {0}
    best = 0
    found_any = False
    for k in range(1, cap + 1):
        reachable = {s + d for s in reachable for d in letters}
        if reachable & targets:
            best = k
            found_any = True
    if found_any and (0 in letters or (lo < 0 < hi)):
        return None
    if lo > 0:
        # sums only grow; the DP cap k*lo > max target is already exhaustive
        return best
    if hi < 0:
        return best
    return best if found_any else 0


def algebra_saturation_bound(space: GradedSpace) -> Optional[int]:
    """Largest arity at which an operation of degree ``2 - k`` can be nonzero.

    None means no finite bound exists for this degree support.
    """
    letter_degs = [d - 1 for d in space.degrees()]
    targets = [t - 2 for t in space.degrees()]
    return max_feasible_letters(letter_degs, targets)


def module_saturation_bound(module_space: GradedSpace, algebra_space: GradedSpace) -> Optional[int]:
    """Module-shape analogue, counting the leading module slot."""
    letter_degs = [d - 1 for d in algebra_space.degrees()]
    best = 0
    for dm in module_space.degrees():
        targets = [t - 1 - dm for t in module_space.degrees()]
        r = max_feasible_letters(letter_degs, targets)
        if r is None:
            return None
        best = max(best, r + 1)
    return best
