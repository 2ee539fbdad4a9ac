"""Minimal models by homotopy transfer.

Given a contraction of the underlying complex, the minimal structure and
the quasi-isomorphism lifting the chosen representatives are assembled in
the shifted picture, where all operations have degree ``+1`` and the only
signs are Koszul evaluation signs.  Writing ``b_r`` for the suspended
operations, ``i``, ``p``, ``h`` for the suspended contraction maps, the
recursion over arity is::

    t_1 = i
    T_k = sum_{r>=2} sum_{k_1+...+k_r=k} b_r (t_{k_1} (x) ... (x) t_{k_r})
    transferred b_k = p o T_k,     t_k = h o T_k

(planar trees with the homotopy on internal edges, inclusions at the
leaves).  The module version decorates the leading slot with module-shaped
partial sums.  Outputs are never trusted: every transfer re-verifies the
structure relations, the morphism relations and the quasi-isomorphism
property through the independent checkers before returning.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Dict, List, Optional, Tuple

from .algebras import (SATURATED, AInfAlgebra, AlgMorphism, _compositions,
                       ainf_algebra, alg_morphism, check_alg_morphism,
                       check_alg_relations, is_quasi_iso)
from .contraction import Contraction, contraction_from_complex, normalize_contraction
from .exceptions import ShapeError, StructureError
from .graded import (GradedSpace, MultiOp, algebra_saturation_bound,
                     desuspend_op, graded_from_op, graded_map_from_entries,
                     identity_op, module_saturation_bound, multiop, op_add,
                     op_from_graded, op_insert, op_tensor_compose, shift_space,
                     suspend_op, zero_op)
from .modules import (AInfModule, ModMorphism, Pair, PairMorphism, ainf_module,
                      check_mod_morphism, check_mod_relations, check_pair,
                      is_mod_quasi_iso, mod_morphism, restrict_along)
from .rings import one

__all__ = [
    "Contraction", "contraction_from_complex", "normalize_contraction",
    "transfer_algebra", "transfer_pair", "minimal_pair_equiv_probe",
    "ProbeVerdict", "default_transfer_bound",
]


def default_transfer_bound(small: GradedSpace, fallback: int) -> int:
    """Arity bound for transferred operations: the exact degree-feasibility
    bound when finite, otherwise ``fallback``."""
    sat = algebra_saturation_bound(small)
    return sat if sat is not None else fallback


def _suspended_contraction(c: Contraction):
    i = suspend_op(op_from_graded(c.incl))
    p = suspend_op(op_from_graded(c.proj))
    h = suspend_op(op_from_graded(c.htpy))
    return i, p, h


def _shifted_algebra_transfer(alg: AInfAlgebra, c: Contraction, up_to: int):
    """Returns (transferred suspended ops, shifted morphism components)."""
    s_small = shift_space(c.small)
    b = {k: suspend_op(op) for k, op in alg.ops.items() if k >= 2}
    i, p, h = _suspended_contraction(c)
    t: Dict[int, MultiOp] = {1: i}
    bh: Dict[int, MultiOp] = {}
    arities = sorted(b)
    for k in range(2, up_to + 1):
        acc = zero_op((s_small,) * k, shift_space(alg.space), 1)
        for parts in _compositions(k, list(t), max_parts=max(arities, default=0) or None):
            r = len(parts)
            if r < 2 or r not in b:
                continue
            acc = op_add(acc, op_tensor_compose(b[r], [t[u] for u in parts]))
        bh[k] = op_insert(p, acc, 0)
        t[k] = op_insert(h, acc, 0)
    return bh, t


def transfer_algebra(alg: AInfAlgebra, c: Optional[Contraction] = None,
                     up_to: Optional[int] = None) -> Tuple[AInfAlgebra, AlgMorphism]:
    """Minimal model of ``alg`` plus the quasi-isomorphism into it.

    The transferred binary operation is the one induced on homology
    representatives, and the outputs always pass the independent relation,
    morphism and quasi-isomorphism checkers; a failure there is a bug and
    raises.
    """
    fail = check_alg_relations(alg)
    if fail is not None:
        raise StructureError(f"input is not a valid structure: {fail}")
    if c is None:
        c = contraction_from_complex(alg.space, alg.differential())
    else:
        c.verify()
        if c.big != alg.space:
            raise ShapeError("contraction is not over the algebra's space")
    if up_to is None:
        up_to = default_transfer_bound(c.small, max(2 * alg.max_arity() - 1, 3))
    bh, t = _shifted_algebra_transfer(alg, c, up_to)

    ops = {k: desuspend_op(op) for k, op in bh.items() if not op.is_zero()}
    sat = algebra_saturation_bound(c.small)
    trunc = SATURATED if (sat is not None and up_to >= sat) else up_to
    small_alg = ainf_algebra(c.small, ops, truncation=trunc, minimal=True)
    comps = {k: desuspend_op(op) for k, op in t.items() if not op.is_zero()}
    f = alg_morphism(small_alg, alg, comps, truncation=trunc)

    # binary operation must be the induced product on representatives
    incl_op = op_from_graded(c.incl)
    induced = op_insert(op_from_graded(c.proj),
                        op_tensor_compose(alg.op(2), [incl_op, incl_op]), 0)
    if small_alg.op(2) != induced:
        raise StructureError("transferred binary operation is not the induced product")

    fail = check_alg_relations(small_alg)
    if fail is not None:
        raise StructureError(f"transfer produced an invalid structure: {fail}")
    fail = check_alg_morphism(f)
    if fail is not None:
        raise StructureError(f"transfer produced an invalid morphism: {fail}")
    if not is_quasi_iso(f):
        raise StructureError("transfer morphism is not a quasi-isomorphism")
    return small_alg, f


def transfer_pair(alg: AInfAlgebra, mod: AInfModule,
                  c_alg: Optional[Contraction] = None,
                  c_mod: Optional[Contraction] = None,
                  up_to: Optional[int] = None,
                  mod_up_to: Optional[int] = None
                  ) -> Tuple[AInfAlgebra, AInfModule, PairMorphism]:
    """Minimal model of a pair and the quasi-isomorphism of pairs into it."""
    if mod.algebra != alg:
        raise ShapeError("module must live over the given algebra")
    fail = check_mod_relations(mod)
    if fail is not None:
        raise StructureError(f"input module is invalid: {fail}")
    if c_mod is None:
        c_mod = contraction_from_complex(mod.space, mod.differential())
    else:
        c_mod.verify()
    if c_alg is None:
        c_alg = contraction_from_complex(alg.space, alg.differential())
    if up_to is None:
        up_to = default_transfer_bound(c_alg.small, max(2 * alg.max_arity() - 1, 3))
    small_alg, f = transfer_algebra(alg, c_alg, up_to)
    _, t = _shifted_algebra_transfer(alg, c_alg, max(up_to, 1))

    if mod_up_to is None:
        msat = module_saturation_bound(c_mod.small, c_alg.small)
        mod_up_to = msat if msat is not None else max(2 * mod.max_arity() - 1, 3)

    s_small_m = shift_space(c_mod.small)
    s_small_a = shift_space(c_alg.small)
    bm = {k: suspend_op(op) for k, op in mod.ops.items() if k >= 2}
    i_m, p_m, h_m = _suspended_contraction(c_mod)
    q: Dict[int, MultiOp] = {1: i_m}
    bhm: Dict[int, MultiOp] = {}
    for k in range(2, mod_up_to + 1):
        acc = zero_op((s_small_m,) + (s_small_a,) * (k - 1), shift_space(mod.space), 1)
        for first in range(1, k + 1):
            if first not in q:
                continue
            rest = k - first
            if rest == 0:
                continue
            for parts in _compositions(rest, list(t)):
                r = 1 + len(parts)
                if r not in bm:
                    continue
                acc = op_add(acc, op_tensor_compose(
                    bm[r], [q[first]] + [t[u] for u in parts]))
        bhm[k] = op_insert(p_m, acc, 0)
        q[k] = op_insert(h_m, acc, 0)

    mops = {k: desuspend_op(op) for k, op in bhm.items() if not op.is_zero()}
    msat = module_saturation_bound(c_mod.small, c_alg.small)
    mtrunc = SATURATED if (msat is not None and mod_up_to >= msat) else mod_up_to
    small_mod = ainf_module(small_alg, c_mod.small, mops, truncation=mtrunc, minimal=True)

    # binary action must be induced by the action on representatives
    induced = op_insert(op_from_graded(c_mod.proj),
                        op_tensor_compose(mod.op(2), [op_from_graded(c_mod.incl),
                                                      op_from_graded(c_alg.incl)]), 0)
    if small_mod.op(2) != induced:
        raise StructureError("transferred binary action is not the induced one")

    fail = check_mod_relations(small_mod)
    if fail is not None:
        raise StructureError(f"transfer produced an invalid module: {fail}")

    restricted = restrict_along(f, mod)
    gcomps = {k: desuspend_op(op) for k, op in q.items() if not op.is_zero()}
    g = mod_morphism(small_mod, restricted, gcomps, truncation=mtrunc)
    pm = PairMorphism(Pair(small_alg, small_mod), Pair(alg, mod), f, g)
    fail = check_pair(pm, require_quasi_iso=True)
    if fail is not None:
        raise StructureError(f"transfer produced an invalid pair morphism: {fail}")
    return small_alg, small_mod, pm


# ---------------------------------------------------------------------------
# bounded equivalence probe for minimal pairs

@dataclass(frozen=True)
class ProbeVerdict:
    kind: str  # "equivalent-witnessed" | "not-equivalent-by-invariants" | "unknown"
    witness: Optional[PairMorphism]
    detail: str


_PROBE_CAP = 5000


def _graded_dims(space: GradedSpace) -> Tuple[Tuple[int, int], ...]:
    return tuple((d, space.dim(d)) for d in space.degrees())


def _product_ranks(op: MultiOp) -> Tuple[Tuple[int, int], ...]:
    """Per-degree rank of a binary operation (a quasi-iso invariant of
    minimal structures: dimension of the span of its values)."""
    from .linalg import rank
    ring = op.target.ring
    by_deg: Dict[int, List[Dict[str, object]]] = {}
    for key, vec in op.table.items():
        d = sum(sp.degree_of(lab) for sp, lab in zip(op.slots, key)) + op.degree
        by_deg.setdefault(d, []).append(vec)
    out = []
    for d in sorted(by_deg):
        labels = op.target.labels(d)
        mat = [[vec.get(lab, None) or _zero(ring) for vec in by_deg[d]] for lab in labels]
        out.append((d, rank(mat, ring)))
    return tuple(out)


def _zero(ring):
    from .rings import zero
    return zero(ring)


def _massey_pattern(p: Pair) -> Optional[bool]:
    """Whether the first obstruction class of the module vanishes; None
    when the invariant does not apply (non-associative algebra side)."""
    alg = p.algebra
    if any(k != 2 for k in alg.ops if alg.has_op(k)):
        return None
    if not p.module.op(1).is_zero():
        return None
    from .formality import first_module_obstruction
    report = first_module_obstruction(alg, p.module)
    return report.vanished


def _permutation_maps(space: GradedSpace):
    """All degreewise basis permutations of a space, as graded maps."""
    per_degree = [list(permutations(range(space.dim(d)))) for d in space.degrees()]
    total = 1
    for ps in per_degree:
        total *= len(ps)
        if total > _PROBE_CAP:
            return None
    ring = space.ring

    def build(choice):
        entries = {}
        for (d, labels), perm in zip(space.components, choice):
            for j, lab in enumerate(labels):
                entries[(labels[perm[j]], lab)] = one(ring)
        return graded_map_from_entries(space, space, 0, entries)

    out = [()]
    for ps in per_degree:
        out = [acc + (p,) for acc in out for p in ps]
    return [build(choice) for choice in out]


def minimal_pair_equiv_probe(pa: Pair, pb: Pair) -> ProbeVerdict:
    """Bounded comparison of two minimal pairs.

    Disproofs come only from honest quasi-isomorphism invariants (graded
    dimensions, binary-operation ranks, vanishing of the first module
    obstruction class).  Witnesses come from a bounded search over strict
    degreewise basis permutations; everything else is ``unknown``.
    """
    for side in ("algebra", "module"):
        sa = pa.algebra.space if side == "algebra" else pa.module.space
        sb = pb.algebra.space if side == "algebra" else pb.module.space
        if _graded_dims(sa) != _graded_dims(sb):
            return ProbeVerdict("not-equivalent-by-invariants", None,
                                f"{side} graded dimensions differ")
    if _product_ranks(pa.algebra.op(2)) != _product_ranks(pb.algebra.op(2)):
        return ProbeVerdict("not-equivalent-by-invariants", None,
                            "binary product ranks differ")
    if _product_ranks(pa.module.op(2)) != _product_ranks(pb.module.op(2)):
        return ProbeVerdict("not-equivalent-by-invariants", None,
                            "binary action ranks differ")
    ma, mb = _massey_pattern(pa), _massey_pattern(pb)
    if ma is not None and mb is not None and ma != mb:
        return ProbeVerdict("not-equivalent-by-invariants", None,
                            "first module obstruction class vanishes on one side only")

    alg_perms = _permutation_maps(pa.algebra.space)
    mod_perms = _permutation_maps(pa.module.space)
    if alg_perms is None or mod_perms is None:
        return ProbeVerdict("unknown", None, "dimensions too large for bounded search")
    if len(alg_perms) * len(mod_perms) > _PROBE_CAP:
        return ProbeVerdict("unknown", None, "dimensions too large for bounded search")
    for fa in alg_perms:
        f = alg_morphism(pa.algebra, pb.algebra, {1: op_from_graded(fa)})
        if check_alg_morphism(f) is not None:
            continue
        restricted = restrict_along(f, pb.module)
        for gm in mod_perms:
            g = mod_morphism(pa.module, restricted, {1: op_from_graded(gm)})
            pm = PairMorphism(pa, pb, f, g)
            if check_pair(pm, require_quasi_iso=True) is None:
                return ProbeVerdict("equivalent-witnessed", pm, "strict permutation witness")
    return ProbeVerdict("unknown", None, "bounded search found no witness")
