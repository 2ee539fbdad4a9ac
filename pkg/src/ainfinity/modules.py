"""A-infinity modules over A-infinity algebras.

Operations ``m_k : M (x) A^(x k-1) -> M`` of degree ``2 - k`` satisfy, for
every level ``m``::

    sum_{j+k+l=m, j>=1} (-1)^(jk+l) m_{j+1+l}(id^(x j) (x) m_k (x) id^(x l))
  + sum_{k+l=m} (-1)^l m_{1+l}(m_k (x) id^(x l))  =  0

where the first sum inserts algebra operations in algebra slots and the
second consumes the leading module slot.  Morphisms ``f_k`` of degree
``1 - k`` satisfy the printed two-sided relation; the right-hand side
``m_{s+1}(f_r (x) id^(x s))`` carries no extra sign, and composition
``(g o f)_n = sum g_{l+1}(f_k (x) id^(x l))`` preserves the relations
without one either (verified mechanically by the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple, Union

from . import signs
from .algebras import (SATURATED, AInfAlgebra, AlgMorphism, RelationFailure,
                       Truncation, _check_truncation, _lex_min_entry,
                       check_alg_morphism, check_alg_relations)
from .contraction import (Contraction, contraction_from_complex,
                          graded_map_invertible, induced_on_homology)
from .exceptions import ShapeError, StructureError
from .graded import (GradedMap, GradedSpace, Label, MultiOp, desuspend_op,
                     graded_from_op, identity_op, multiop, op_add,
                     op_from_graded, op_insert, op_neg, op_tensor_compose,
                     shift_space, suspend_op, zero_op)


@dataclass(frozen=True, eq=False)
class AInfModule:
    """Graded space with operations ``m_k : M (x) A^(x k-1) -> M``."""

    algebra: AInfAlgebra
    space: GradedSpace
    ops: Dict[int, MultiOp]
    truncation: Truncation = SATURATED
    minimal: bool = False

    def __post_init__(self):
        _check_truncation(self.truncation)
        for k, op in self.ops.items():
            if op.arity != k:
                raise ShapeError(f"op stored at arity {k} has arity {op.arity}")
            expected = (self.space,) + (self.algebra.space,) * (k - 1)
            if op.slots != expected or op.target != self.space:
                raise ShapeError(f"m_{k} is not an operator M (x) A^(x{k - 1}) -> M")
            if op.degree != 2 - k:
                raise StructureError(f"m_{k} must have degree {2 - k}, got {op.degree}")
            if isinstance(self.truncation, int) and k > self.truncation:
                raise StructureError(f"op m_{k} beyond truncation {self.truncation}")
        if self.minimal and not self.op(1).is_zero():
            raise StructureError("minimal module must have m_1 = 0")

    def op(self, k: int) -> MultiOp:
        got = self.ops.get(k)
        if got is not None:
            return got
        return zero_op((self.space,) + (self.algebra.space,) * (k - 1), self.space, 2 - k)

    def has_op(self, k: int) -> bool:
        return k in self.ops and not self.ops[k].is_zero()

    def max_arity(self) -> int:
        return max((k for k in self.ops), default=0)

    def is_saturated(self) -> bool:
        return self.truncation == SATURATED

    def available_up_to(self) -> int:
        if self.is_saturated():
            n_m, n_a = self.max_arity(), self.algebra.max_arity()
            return max(2 * n_m - 1, n_m + n_a - 1, 1)
        return self.truncation

    def differential(self) -> GradedMap:
        return graded_from_op(self.op(1))

    def __eq__(self, other):
        return (isinstance(other, AInfModule) and self.algebra == other.algebra
                and self.space == other.space and self.truncation == other.truncation
                and {k: v for k, v in self.ops.items() if not v.is_zero()}
                == {k: v for k, v in other.ops.items() if not v.is_zero()})

    def __str__(self):
        return (f"AInfModule(dim {self.space.total_dim()} over dim "
                f"{self.algebra.space.total_dim()}, ops {sorted(self.ops)})")


def ainf_module(algebra: AInfAlgebra, space: GradedSpace, ops: Mapping[int, MultiOp],
                truncation: Truncation = SATURATED, minimal: bool = False) -> AInfModule:
    clean = {k: op for k, op in ops.items() if not op.is_zero()}
    return AInfModule(algebra, space, clean, truncation, minimal)


def declare_module_saturated(mod: "AInfModule") -> "AInfModule":
    """Module analogue of :func:`ainfinity.algebras.declare_saturated`.

    The base algebra is declared saturated too when it is not already.
    """
    from .algebras import declare_saturated
    alg = mod.algebra if mod.algebra.is_saturated() else declare_saturated(mod.algebra)
    out = ainf_module(alg, mod.space, mod.ops, truncation=SATURATED,
                      minimal=mod.minimal)
    fail = check_mod_relations(out)
    if fail is not None:
        raise StructureError(f"saturation declaration is inconsistent: {fail}")
    return out


def algebra_as_module(alg: AInfAlgebra) -> AInfModule:
    """The regular module: ``A`` over itself with the same operations."""
    ops = {}
    for k, op in alg.ops.items():
        ops[k] = multiop((alg.space,) * k, alg.space, op.degree, op.table)
    return ainf_module(alg, alg.space, ops, truncation=alg.truncation,
                       minimal=alg.op(1).is_zero())


def module_relation_residual(mod: AInfModule, m: int) -> MultiOp:
    """Left side of the level-``m`` module relation, as an operator."""
    A = mod.algebra
    shape = ((mod.space,) + (A.space,) * (m - 1), mod.space, 3 - m)
    acc = zero_op(*shape)
    for k in range(1, m + 1):
        if A.has_op(k):
            inner = A.op(k)
            for j in range(1, m - k + 1):
                l = m - k - j
                if not mod.has_op(j + 1 + l):
                    continue
                term = op_insert(mod.op(j + 1 + l), inner, j)
                sgn = signs.structure_sign(j, k, l)
                acc = op_add(acc, term if sgn == 1 else op_neg(term))
        if mod.has_op(k):
            l = m - k
            if l >= 0 and mod.has_op(1 + l):
                term = op_insert(mod.op(1 + l), mod.op(k), 0)
                sgn = signs.module_action_sign(l)
                acc = op_add(acc, term if sgn == 1 else op_neg(term))
    return acc


def check_mod_relations(mod: AInfModule, up_to: Optional[int] = None) -> Optional[RelationFailure]:
    bound = mod.available_up_to() if up_to is None else up_to
    if not mod.is_saturated() and bound > mod.truncation:
        raise StructureError(
            f"relation level {bound} needs m_{mod.truncation + 1} beyond truncation {mod.truncation}")
    for m in range(1, bound + 1):
        res = module_relation_residual(mod, m)
        if not res.is_zero():
            args, vec = _lex_min_entry(res)
            return RelationFailure(m, args, vec)
    return None


# ---------------------------------------------------------------------------
# morphisms

@dataclass(frozen=True, eq=False)
class ModMorphism:
    """Components ``f_k : M (x) A^(x k-1) -> N`` of degree ``1 - k``.

    Source and target live over the same algebra; morphisms along an
    algebra morphism are normalized into a restricted target first.
    """

    source: AInfModule
    target: AInfModule
    comps: Dict[int, MultiOp]
    truncation: Truncation = SATURATED

    def __post_init__(self):
        _check_truncation(self.truncation)
        if self.source.algebra != self.target.algebra:
            raise ShapeError("module morphism needs a common base algebra; restrict first")
        A = self.source.algebra
        for k, f in self.comps.items():
            if f.arity != k:
                raise ShapeError(f"component at arity {k} has arity {f.arity}")
            expected = (self.source.space,) + (A.space,) * (k - 1)
            if f.slots != expected or f.target != self.target.space:
                raise ShapeError(f"f_{k} is not an operator M (x) A^(x{k - 1}) -> N")
            if f.degree != 1 - k:
                raise StructureError(f"f_{k} must have degree {1 - k}, got {f.degree}")

    def comp(self, k: int) -> MultiOp:
        got = self.comps.get(k)
        if got is not None:
            return got
        A = self.source.algebra
        return zero_op((self.source.space,) + (A.space,) * (k - 1), self.target.space, 1 - k)

    def has_comp(self, k: int) -> bool:
        return k in self.comps and not self.comps[k].is_zero()

    def max_arity(self) -> int:
        return max((k for k in self.comps), default=0)

    def is_saturated(self) -> bool:
        return self.truncation == SATURATED

    def first(self) -> GradedMap:
        return graded_from_op(self.comp(1))

    def __eq__(self, other):
        return (isinstance(other, ModMorphism) and self.source == other.source
                and self.target == other.target
                and {k: v for k, v in self.comps.items() if not v.is_zero()}
                == {k: v for k, v in other.comps.items() if not v.is_zero()})


def mod_morphism(source: AInfModule, target: AInfModule, comps: Mapping[int, MultiOp],
                 truncation: Truncation = SATURATED) -> ModMorphism:
    clean = {k: f for k, f in comps.items() if not f.is_zero()}
    return ModMorphism(source, target, clean, truncation)


def identity_mod_morphism(mod: AInfModule) -> ModMorphism:
    return mod_morphism(mod, mod, {1: identity_op(mod.space)})


def module_morphism_defect(f: ModMorphism, m: int) -> MultiOp:
    """LHS minus RHS of the level-``m`` module morphism relation."""
    S, T = f.source, f.target
    A = S.algebra
    shape = ((S.space,) + (A.space,) * (m - 1), T.space, 2 - m)
    acc = zero_op(*shape)
    for k in range(1, m + 1):
        # leading-slot terms: the source module operation feeds the morphism
        l = m - k
        if S.has_op(k) and f.has_comp(1 + l):
            term = op_insert(f.comp(1 + l), S.op(k), 0)
            sgn = signs.structure_sign(0, k, l)
            acc = op_add(acc, term if sgn == 1 else op_neg(term))
        # algebra insertions
        if A.has_op(k):
            for j in range(1, m - k + 1):
                l = m - k - j
                if not f.has_comp(j + 1 + l):
                    continue
                term = op_insert(f.comp(j + 1 + l), A.op(k), j)
                sgn = signs.structure_sign(j, k, l)
                acc = op_add(acc, term if sgn == 1 else op_neg(term))
    for r in range(1, m + 1):
        s = m - r
        if f.has_comp(r) and T.has_op(s + 1):
            term = op_insert(T.op(s + 1), f.comp(r), 0)
            acc = op_add(acc, op_neg(term))
    return acc


def module_morphism_check_bound(f: ModMorphism) -> int:
    nu = f.max_arity()
    return max(nu + f.source.max_arity() - 1,
               nu + f.source.algebra.max_arity() - 1,
               nu + f.target.max_arity() - 1, 1)


def check_mod_morphism(f: ModMorphism, up_to: Optional[int] = None) -> Optional[RelationFailure]:
    if up_to is None:
        sat = (f.is_saturated() and f.source.is_saturated() and f.target.is_saturated()
               and f.source.algebra.is_saturated())
        if sat:
            bound = module_morphism_check_bound(f)
        else:
            bound = min(x for x in
                        [f.truncation if not f.is_saturated() else None,
                         f.source.truncation if not f.source.is_saturated() else None,
                         f.target.truncation if not f.target.is_saturated() else None]
                        if x is not None)
    else:
        bound = up_to
    for m in range(1, bound + 1):
        res = module_morphism_defect(f, m)
        if not res.is_zero():
            args, vec = _lex_min_entry(res)
            return RelationFailure(m, args, vec)
    return None


def compose_mod_morphisms(g: ModMorphism, f: ModMorphism) -> ModMorphism:
    """``(g o f)_n = sum_{k+l=n} g_{l+1}(f_k (x) id^(x l))``, sign-free."""
    if f.target != g.source:
        raise ShapeError("compose_mod_morphisms: f.target != g.source")
    if f.is_saturated() and g.is_saturated():
        trunc: Truncation = SATURATED
        bound = max(f.max_arity() + g.max_arity() - 1, 1)
    else:
        trunc = min(t.truncation for t in (f, g) if not t.is_saturated())
        bound = trunc
    comps: Dict[int, MultiOp] = {}
    for n in range(1, bound + 1):
        acc = zero_op((f.source.space,) + (f.source.algebra.space,) * (n - 1),
                      g.target.space, 1 - n)
        for k in range(1, n + 1):
            l = n - k
            if f.has_comp(k) and g.has_comp(l + 1):
                acc = op_add(acc, op_insert(g.comp(l + 1), f.comp(k), 0))
        if not acc.is_zero():
            comps[n] = acc
    return mod_morphism(f.source, g.target, comps, trunc)


def is_mod_quasi_iso(f: ModMorphism) -> bool:
    c_src = contraction_from_complex(f.source.space, f.source.differential())
    c_tgt = contraction_from_complex(f.target.space, f.target.differential())
    return graded_map_invertible(induced_on_homology(f.first(), c_src, c_tgt))


# ---------------------------------------------------------------------------
# restriction along algebra morphisms

def restrict_along(f: AlgMorphism, module: AInfModule) -> AInfModule:
    """Pull a module back along an algebra morphism.

    Assembled in the shifted picture, where morphism components have
    degree zero and the comodule pullback is sign-free: the level-``m``
    operation sums ``b_r (id (x) F_{i_1} (x) ... (x) F_{i_{r-1}})`` over
    splittings of the ``m - 1`` algebra inputs into blocks.
    """
    if module.algebra != f.target:
        raise ShapeError("module is not over the morphism's target algebra")
    nu, n_m = f.max_arity(), module.max_arity()
    if nu == 0 or n_m == 0:
        # only the differential survives pullback along the zero morphism
        ops = {1: module.op(1)} if module.has_op(1) else {}
        return ainf_module(f.source, module.space, ops, minimal=not ops)
    if f.is_saturated() and module.is_saturated():
        trunc: Truncation = SATURATED
        bound = (n_m - 1) * nu + 1
    else:
        # knowledge horizon: an unknown f_{t+1} first enters at level t + 2,
        # an unknown module operation at level t + 1
        limits = []
        if not f.is_saturated():
            limits.append(f.truncation + 1)
        if not module.is_saturated():
            limits.append(module.truncation)
        trunc = min(limits)
        bound = trunc

    sN = shift_space(module.space)
    id_sN = identity_op(sN)
    F = {k: suspend_op(c) for k, c in f.comps.items()}
    bN = {k: suspend_op(op) for k, op in module.ops.items()}
    available = sorted(F)

    from .algebras import _compositions
    ops: Dict[int, MultiOp] = {}
    for m in range(1, bound + 1):
        acc = zero_op((sN,) + (shift_space(f.source.space),) * (m - 1), sN, 1)
        if m == 1 and 1 in bN:
            acc = op_add(acc, bN[1])
        if m >= 2:
            for parts in _compositions(m - 1, available):
                r = len(parts) + 1
                if r not in bN:
                    continue
                term = op_tensor_compose(bN[r], [id_sN] + [F[i] for i in parts])
                acc = op_add(acc, term)
        if not acc.is_zero():
            ops[m] = desuspend_op(acc)
    return ainf_module(f.source, module.space, ops, truncation=trunc,
                       minimal=1 not in ops)


def restrict_mod_morphism(f: AlgMorphism, g: ModMorphism):
    """Not needed in scope: morphisms are always built into restricted targets."""
    raise NotImplementedError


# ---------------------------------------------------------------------------
# the underlying associative module

def truncate_to_M2(mod: AInfModule) -> AInfModule:
    """Erase all higher operations of a minimal module over a graded algebra.

    The result always satisfies the module relations (they reduce to
    associativity of the binary action); this is asserted unconditionally.
    """
    A = mod.algebra
    if not mod.op(1).is_zero():
        raise StructureError("truncate_to_M2 needs a minimal module")
    if not A.op(1).is_zero() or any(k > 2 for k in A.ops if A.has_op(k)):
        raise StructureError("truncate_to_M2 needs a graded associative base algebra")
    out = ainf_module(A, mod.space, {2: mod.op(2)}, truncation=SATURATED, minimal=True)
    fail = check_mod_relations(out)
    if fail is not None:
        raise StructureError(f"binary action is not associative: {fail}")
    return out


# ---------------------------------------------------------------------------
# pairs

@dataclass(frozen=True)
class Pair:
    """An algebra together with a module over it."""

    algebra: AInfAlgebra
    module: AInfModule

    def __post_init__(self):
        if self.module.algebra != self.algebra:
            raise ShapeError("pair module must live over the pair algebra")


@dataclass(frozen=True)
class PairMorphism:
    """``(f, g)``: an algebra morphism and a module morphism into ``f* target``."""

    source: Pair
    target: Pair
    alg_morphism: AlgMorphism
    mod_morphism: ModMorphism

    def __post_init__(self):
        if self.alg_morphism.source != self.source.algebra:
            raise ShapeError("algebra morphism source mismatch")
        if self.alg_morphism.target != self.target.algebra:
            raise ShapeError("algebra morphism target mismatch")
        if self.mod_morphism.source != self.source.module:
            raise ShapeError("module morphism source mismatch")


def identity_pair_morphism(p: Pair) -> PairMorphism:
    from .algebras import identity_alg_morphism
    return PairMorphism(p, p, identity_alg_morphism(p.algebra),
                        identity_mod_morphism(p.module))


@dataclass(frozen=True)
class PairFailure:
    """Which leg of a pair morphism failed, and how."""

    side: str  # "algebra" | "module" | "quasi-iso"
    failure: Optional[RelationFailure]
    reason: str

    def __str__(self):
        return f"pair morphism fails on the {self.side} side: {self.reason}"


def check_pair(pm: PairMorphism, require_quasi_iso: bool = False) -> Optional[PairFailure]:
    """Check both legs of a pair morphism; None on pass.

    The module leg is checked as a morphism into the restriction of the
    target module along the algebra leg.
    """
    fail = check_alg_morphism(pm.alg_morphism)
    if fail is not None:
        return PairFailure("algebra", fail, str(fail))
    restricted = restrict_along(pm.alg_morphism, pm.target.module)
    if pm.mod_morphism.target != restricted:
        raise ShapeError("module leg must land in the restriction of the target module")
    fail = check_mod_morphism(pm.mod_morphism)
    if fail is not None:
        return PairFailure("module", fail, str(fail))
    if require_quasi_iso:
        from .algebras import is_quasi_iso
        if not is_quasi_iso(pm.alg_morphism):
            return PairFailure("quasi-iso", None, "algebra leg is not a quasi-isomorphism")
        if not is_mod_quasi_iso(pm.mod_morphism):
            return PairFailure("quasi-iso", None, "module leg is not a quasi-isomorphism")
    return None
