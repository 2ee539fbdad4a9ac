"""A-infinity algebras: structures, relation checking, morphisms, homology.

An :class:`AInfAlgebra` carries operations ``m_k`` of degree ``2 - k`` up
to a truncation level.  ``truncation = SATURATED`` declares that every
operation above the largest stored arity vanishes identically, which is
what makes relation checking (and everything downstream) terminate.

The structure relations, for every ``m`` up to the checking level::

    sum_{j+k+l=m} (-1)^(jk+l) m_{j+1+l} (id^(x j) (x) m_k (x) id^(x l)) = 0

and the morphism relations equate the one-sided insertion sum with the
signed sum of ``m_r (f_{i_1} (x) ... (x) f_{i_r})`` over compositions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from . import signs
from .contraction import (Contraction, contraction_from_complex,
                          graded_map_invertible, induced_on_homology)
from .exceptions import ShapeError, StructureError
from .graded import (GradedMap, GradedSpace, Label, MultiOp, Vector,
                     algebra_saturation_bound, graded_from_op, multiop,
                     op_add, op_from_graded, op_insert, op_neg, op_scale,
                     op_tensor_compose, zero_op)
from .rings import Scalar, from_int, one

SATURATED = "saturated"
Truncation = Union[int, str]


def _check_truncation(t: Truncation) -> Truncation:
    if t == SATURATED:
        return t
    if isinstance(t, int) and t >= 1:
        return t
    raise StructureError(f"truncation must be a positive int or {SATURATED!r}")


@dataclass(frozen=True, eq=False)
class AInfAlgebra:
    """Graded space with operations ``m_k : A^(x k) -> A`` of degree ``2 - k``."""

    space: GradedSpace
    ops: Dict[int, MultiOp]
    truncation: Truncation = SATURATED
    minimal: bool = False
    unital: bool = False
    unit: Optional[Label] = None

    def __post_init__(self):
        _check_truncation(self.truncation)
        for k, op in self.ops.items():
            if op.arity != k:
                raise ShapeError(f"op stored at arity {k} has arity {op.arity}")
            if op.slots != (self.space,) * k or op.target != self.space:
                raise ShapeError(f"m_{k} is not an operator A^(x{k}) -> A")
            if op.degree != 2 - k:
                raise StructureError(f"m_{k} must have degree {2 - k}, got {op.degree}")
            if isinstance(self.truncation, int) and k > self.truncation:
                raise StructureError(f"op m_{k} beyond truncation {self.truncation}")
        if self.minimal and not self.op(1).is_zero():
            raise StructureError("minimal algebra must have m_1 = 0")
        if self.unital and (self.unit is None or self.unit not in self.space):
            raise StructureError("unital algebra needs a unit label in the space")

    def op(self, k: int) -> MultiOp:
        got = self.ops.get(k)
        if got is not None:
            return got
        return zero_op((self.space,) * k, self.space, 2 - k)

    def has_op(self, k: int) -> bool:
        return k in self.ops and not self.ops[k].is_zero()

    def max_arity(self) -> int:
        return max((k for k in self.ops), default=0)

    def is_saturated(self) -> bool:
        return self.truncation == SATURATED

    def available_up_to(self) -> int:
        """Largest level at which relations are fully determined."""
        if self.is_saturated():
            return max(2 * self.max_arity() - 1, 1)
        return self.truncation

    def differential(self) -> GradedMap:
        return graded_from_op(self.op(1))

    def __eq__(self, other):
        return (isinstance(other, AInfAlgebra) and self.space == other.space
                and self.truncation == other.truncation
                and {k: v for k, v in self.ops.items() if not v.is_zero()}
                == {k: v for k, v in other.ops.items() if not v.is_zero()})

    def __str__(self):
        ks = sorted(self.ops)
        return f"AInfAlgebra(dim {self.space.total_dim()}, ops {ks}, truncation {self.truncation})"


def ainf_algebra(space: GradedSpace, ops: Mapping[int, MultiOp],
                 truncation: Truncation = SATURATED, minimal: bool = False,
                 unital: bool = False, unit: Optional[Label] = None) -> AInfAlgebra:
    clean = {k: op for k, op in ops.items() if not op.is_zero()}
    return AInfAlgebra(space, clean, truncation, minimal, unital, unit)


def graded_algebra(space: GradedSpace, m2: MultiOp, **kw) -> AInfAlgebra:
    """A graded algebra viewed as an A-infinity algebra (only ``m_2``)."""
    return ainf_algebra(space, {2: m2}, truncation=SATURATED, minimal=True, **kw)


def declare_saturated(alg: "AInfAlgebra") -> "AInfAlgebra":
    """Declare all operations beyond the stored arities to vanish.

    The declaration is complete and checkable: with the tail zero, every
    relation beyond level ``2 * max_arity - 1`` holds identically, so the
    full relation check below verifies the declared structure entirely.
    """
    out = ainf_algebra(alg.space, alg.ops, truncation=SATURATED,
                       minimal=alg.minimal, unital=alg.unital, unit=alg.unit)
    fail = check_alg_relations(out)
    if fail is not None:
        raise StructureError(f"saturation declaration is inconsistent: {fail}")
    return out


def dga(space: GradedSpace, m1: MultiOp, m2: MultiOp) -> AInfAlgebra:
    return ainf_algebra(space, {1: m1, 2: m2}, truncation=SATURATED)


@dataclass(frozen=True)
class RelationFailure:
    """Lex-minimal witness that a relation fails."""

    level: int
    args: Tuple[Label, ...]
    residual: Vector

    def __str__(self):
        return f"relation fails at level {self.level} on {self.args}: residual {self.residual}"


def _lex_min_entry(op: MultiOp) -> Tuple[Tuple[Label, ...], Vector]:
    def sort_key(key: Tuple[Label, ...]):
        return tuple(sp.position_of(lab) for sp, lab in zip(op.slots, key))
    best = min(op.table, key=sort_key)
    return best, dict(op.table[best])


def relation_residual(alg: AInfAlgebra, m: int) -> MultiOp:
    """The left side of the level-``m`` structure relation, as an operator."""
    shape = ((alg.space,) * m, alg.space, 3 - m)
    acc = zero_op(*shape)
    for k in range(1, m + 1):
        if not alg.has_op(k):
            continue
        inner = alg.op(k)
        for j in range(0, m - k + 1):
            l = m - k - j
            outer_arity = j + 1 + l
            if not alg.has_op(outer_arity):
                continue
            term = op_insert(alg.op(outer_arity), inner, j)
            sgn = signs.structure_sign(j, k, l)
            acc = op_add(acc, term if sgn == 1 else op_neg(term))
    return acc


def check_alg_relations(alg: AInfAlgebra, up_to: Optional[int] = None) -> Optional[RelationFailure]:
    """Check the structure relations for all levels ``m <= up_to``.

    Returns None on pass, otherwise the failure that is minimal in
    ``(m, lex order of the argument tuple)``.
    """
    bound = alg.available_up_to() if up_to is None else up_to
    if not alg.is_saturated() and bound > alg.truncation:
        raise StructureError(
            f"relation level {bound} needs m_{alg.truncation + 1} beyond truncation {alg.truncation}")
    for m in range(1, bound + 1):
        res = relation_residual(alg, m)
        if not res.is_zero():
            args, vec = _lex_min_entry(res)
            return RelationFailure(m, args, vec)
    return None


# ---------------------------------------------------------------------------
# morphisms

@dataclass(frozen=True, eq=False)
class AlgMorphism:
    """Components ``f_k : A^(x k) -> B`` of degree ``1 - k``."""

    source: AInfAlgebra
    target: AInfAlgebra
    comps: Dict[int, MultiOp]
    truncation: Truncation = SATURATED

    def __post_init__(self):
        _check_truncation(self.truncation)
        for k, f in self.comps.items():
            if f.arity != k:
                raise ShapeError(f"component at arity {k} has arity {f.arity}")
            if f.slots != (self.source.space,) * k or f.target != self.target.space:
                raise ShapeError(f"f_{k} is not an operator A^(x{k}) -> B")
            if f.degree != 1 - k:
                raise StructureError(f"f_{k} must have degree {1 - k}, got {f.degree}")

    def comp(self, k: int) -> MultiOp:
        got = self.comps.get(k)
        if got is not None:
            return got
        return zero_op((self.source.space,) * k, self.target.space, 1 - k)

    def has_comp(self, k: int) -> bool:
        return k in self.comps and not self.comps[k].is_zero()

    def max_arity(self) -> int:
        return max((k for k in self.comps), default=0)

    def is_saturated(self) -> bool:
        return self.truncation == SATURATED

    def first(self) -> GradedMap:
        return graded_from_op(self.comp(1))

    def __eq__(self, other):
        return (isinstance(other, AlgMorphism) and self.source == other.source
                and self.target == other.target
                and {k: v for k, v in self.comps.items() if not v.is_zero()}
                == {k: v for k, v in other.comps.items() if not v.is_zero()})


def alg_morphism(source: AInfAlgebra, target: AInfAlgebra, comps: Mapping[int, MultiOp],
                 truncation: Truncation = SATURATED) -> AlgMorphism:
    clean = {k: f for k, f in comps.items() if not f.is_zero()}
    return AlgMorphism(source, target, clean, truncation)


def identity_alg_morphism(alg: AInfAlgebra) -> AlgMorphism:
    from .graded import identity_op
    return alg_morphism(alg, alg, {1: identity_op(alg.space)})


def _compositions(total: int, allowed: Sequence[int], max_parts: Optional[int] = None):
    """Ordered compositions of ``total`` into parts from ``allowed``."""
    allowed = sorted(set(a for a in allowed if a >= 1))

    def rec(rest: int, acc: Tuple[int, ...]):
        if rest == 0:
            if acc:
                yield acc
            return
        if max_parts is not None and len(acc) >= max_parts:
            return
        for a in allowed:
            if a > rest:
                break
            yield from rec(rest - a, acc + (a,))

    yield from rec(total, ())


def morphism_defect(f: AlgMorphism, m: int) -> MultiOp:
    """LHS minus RHS of the level-``m`` morphism relation."""
    A, B = f.source, f.target
    shape = ((A.space,) * m, B.space, 2 - m)
    acc = zero_op(*shape)
    for k in range(1, m + 1):
        if not A.has_op(k):
            continue
        for j in range(0, m - k + 1):
            l = m - k - j
            if not f.has_comp(j + 1 + l):
                continue
            term = op_insert(f.comp(j + 1 + l), A.op(k), j)
            sgn = signs.structure_sign(j, k, l)
            acc = op_add(acc, term if sgn == 1 else op_neg(term))
    available = [k for k in f.comps if f.has_comp(k)]
    for parts in _compositions(m, available, max_parts=max((k for k in B.ops), default=0) or None):
        r = len(parts)
        if not B.has_op(r):
            continue
        term = op_tensor_compose(B.op(r), [f.comp(i) for i in parts])
        sgn = signs.morphism_tensor_sign(parts)
        acc = op_add(acc, op_neg(term) if sgn == 1 else term)
    return acc


def morphism_check_bound(f: AlgMorphism) -> int:
    """Largest level at which the morphism relation can be nonzero."""
    nu = f.max_arity()
    na, nb = f.source.max_arity(), f.target.max_arity()
    return max(nu + na - 1, nb * nu, 1)


def check_alg_morphism(f: AlgMorphism, up_to: Optional[int] = None) -> Optional[RelationFailure]:
    if up_to is None:
        if f.is_saturated() and f.source.is_saturated() and f.target.is_saturated():
            bound = morphism_check_bound(f)
        else:
            bound = min(x for x in
                        [f.truncation if not f.is_saturated() else None,
                         f.source.truncation if not f.source.is_saturated() else None,
                         f.target.truncation if not f.target.is_saturated() else None]
                        if x is not None)
    else:
        bound = up_to
    for m in range(1, bound + 1):
        res = morphism_defect(f, m)
        if not res.is_zero():
            args, vec = _lex_min_entry(res)
            return RelationFailure(m, args, vec)
    return None


def compose_alg_morphisms(g: AlgMorphism, f: AlgMorphism) -> AlgMorphism:
    """``(g o f)_n = sum (-1)^s g_r (f_{i_1} (x) ... (x) f_{i_r})``."""
    if f.target != g.source:
        raise ShapeError("compose_alg_morphisms: f.target != g.source")
    if f.is_saturated() and g.is_saturated():
        trunc: Truncation = SATURATED
        bound = max(f.max_arity() * g.max_arity(), 1)
    else:
        candidates = [t.truncation for t in (f, g) if not t.is_saturated()]
        trunc = min(candidates)
        bound = trunc
    comps: Dict[int, MultiOp] = {}
    available = [k for k in f.comps if f.has_comp(k)]
    for n in range(1, bound + 1):
        acc = zero_op((f.source.space,) * n, g.target.space, 1 - n)
        for parts in _compositions(n, available):
            r = len(parts)
            if not g.has_comp(r):
                continue
            term = op_tensor_compose(g.comp(r), [f.comp(i) for i in parts])
            sgn = signs.morphism_tensor_sign(parts)
            acc = op_add(acc, term if sgn == 1 else op_neg(term))
        if not acc.is_zero():
            comps[n] = acc
    return alg_morphism(f.source, g.target, comps, trunc)


# ---------------------------------------------------------------------------
# homology

@dataclass(frozen=True)
class Cohomology:
    """Homology of the underlying complex with witnessed splitting data.

    ``algebra`` is the induced graded algebra structure on representatives.
    """

    contraction: Contraction
    algebra: AInfAlgebra

    @property
    def space(self) -> GradedSpace:
        return self.contraction.small

    @property
    def incl(self) -> GradedMap:
        return self.contraction.incl

    @property
    def proj(self) -> GradedMap:
        return self.contraction.proj


def cohomology(alg: AInfAlgebra) -> Cohomology:
    """ker m1 / im m1 with echelon-chosen splitting and induced product."""
    fail = check_alg_relations(alg, up_to=1)
    if fail is not None:
        raise StructureError(f"m1 is not a differential: {fail}")
    c = contraction_from_complex(alg.space, alg.differential())
    incl_op = op_from_graded(c.incl)
    product = op_tensor_compose(alg.op(2), [incl_op, incl_op])
    product = op_insert(op_from_graded(c.proj), product, 0)
    h_alg = ainf_algebra(c.small, {2: product}, truncation=SATURATED, minimal=True)
    return Cohomology(c, h_alg)


def is_quasi_iso(f: AlgMorphism) -> bool:
    """True iff ``H(f_1)`` is invertible in every degree."""
    for side in (f.source, f.target):
        fail = check_alg_relations(side, up_to=1)
        if fail is not None:
            raise StructureError(f"side has no differential: {fail}")
    c_src = contraction_from_complex(f.source.space, f.source.differential())
    c_tgt = contraction_from_complex(f.target.space, f.target.differential())
    induced = induced_on_homology(f.first(), c_src, c_tgt)
    return graded_map_invertible(induced)


def scalar_strict_morphism(alg: AInfAlgebra, c: Scalar) -> AlgMorphism:
    """The strict morphism multiplying by a scalar (identity when c = 1)."""
    from .graded import identity_op
    return alg_morphism(alg, alg, {1: op_scale(c, identity_op(alg.space))})
