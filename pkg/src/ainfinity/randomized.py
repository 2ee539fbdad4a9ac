"""Seeded random structures for property tests and self-checks.

Validity is always by construction: monomial algebras (word concatenation
on a subword-closed set) are associative, inner differentials by an odd
square-zero element satisfy the Leibniz rule, and random basis conjugation
transports everything without breaking it.  Invalid instances come from
:func:`mutate_algebra` / :func:`mutate_module`, which tweak one
degree-consistent table entry.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Tuple

from .algebras import AInfAlgebra, ainf_algebra, dga
from .graded import (GradedMap, GradedSpace, MultiOp, Vector, basis_vector,
                     graded_map_from_blocks, graded_space, identity_op,
                     multiop, op_from_graded, op_insert, op_tensor_compose,
                     vec_add)
from .linalg import inverse
from .modules import AInfModule, ainf_module, algebra_as_module
from .rings import (RATIONALS, RingDescriptor, Scalar, from_int, one,
                    prime_field, zero)


def random_scalar(ring: RingDescriptor, rng: random.Random, size: int = 6) -> Scalar:
    k = ring.kind
    if k == "rationals":
        from fractions import Fraction
        return Scalar(ring, Fraction(rng.randint(-size, size),
                                     rng.randint(1, size)))
    if k == "prime_field":
        return Scalar(ring, rng.randrange(ring.p))
    if k in ("poly", "truncated_poly"):
        deg = rng.randint(0, 3)
        coeffs = [random_scalar(ring.base, rng, size).value for _ in range(deg + 1)]
        return Scalar(ring, tuple(coeffs))
    num = random_scalar(ring.base, rng, size)
    den = random_scalar(ring.base, rng, size)
    while den.is_zero():
        den = random_scalar(ring.base, rng, size)
    from .rings import embed_fraction
    return embed_fraction(num) / embed_fraction(den)


def random_nonzero_scalar(ring: RingDescriptor, rng: random.Random, size: int = 6) -> Scalar:
    s = random_scalar(ring, rng, size)
    while s.is_zero():
        s = random_scalar(ring, rng, size)
    return s


# ---------------------------------------------------------------------------
# monomial dgas

def _monomial_words(letters: List[str], max_len: int) -> List[Tuple[str, ...]]:
    words: List[Tuple[str, ...]] = [()]
    layer: List[Tuple[str, ...]] = [()]
    for _ in range(max_len):
        layer = [w + (x,) for w in layer for x in letters]
        words.extend(layer)
    return words


def random_monomial_dga(rng: random.Random,
                        ring: RingDescriptor = RATIONALS) -> AInfAlgebra:
    """Concatenation algebra on all words up to a length cap, with an inner
    differential by a random odd square-zero element."""
    n_letters = rng.randint(1, 2)
    max_len = rng.randint(1, 2)
    letters = [f"x{i}" for i in range(n_letters)]
    degs = {x: rng.choice([0, 1, 1, 2]) for x in letters}
    words = _monomial_words(letters, max_len)
    comps: Dict[int, List[str]] = {}
    label_of: Dict[Tuple[str, ...], str] = {}
    for w in words:
        lab = "".join(w) if w else "u"
        d = sum(degs[x] for x in w)
        comps.setdefault(d, []).append(lab)
        label_of[w] = lab
    space = graded_space(ring, comps)
    word_of = {lab: w for w, lab in label_of.items()}
    table = {}
    for wa, la in label_of.items():
        for wb, lb in label_of.items():
            if len(wa) + len(wb) <= max_len:
                table[(la, lb)] = {label_of[wa + wb]: one(ring)}
    m2 = multiop((space, space), space, 0, table)
    # inner differential by an odd letter whose square falls out of the cap
    odd = [x for x in letters if degs[x] % 2 == 1 and degs[x] == 1]
    m1_table: Dict[Tuple[str, ...], Vector] = {}
    if odd and rng.random() < 0.8:
        a = rng.choice(odd)
        for w, lab in label_of.items():
            out: Vector = {}
            left = (a,) + w
            if len(left) <= max_len:
                out = vec_add(out, {label_of[left]: one(ring)})
            right = w + (a,)
            if len(right) <= max_len:
                d = sum(degs[x] for x in w)
                c = -one(ring) if d % 2 == 0 else one(ring)
                out = vec_add(out, {label_of[right]: c})
            if out:
                m1_table[(lab,)] = out
    m1 = multiop((space,), space, 1, m1_table)
    return dga(space, m1, m2)


def random_degree_zero_automorphism(space: GradedSpace, rng: random.Random) -> GradedMap:
    """Unipotent-plus-permutation block automorphism; invertible over any ring."""
    ring = space.ring
    blocks = {}
    for d, labels in space.components:
        n = len(labels)
        # permutation times unipotent upper-triangular: always invertible
        uni = [[one(ring) if i == j else
                (random_scalar(ring, rng, 3) if i < j and rng.random() < 0.4
                 else zero(ring)) for j in range(n)] for i in range(n)]
        perm = list(range(n))
        rng.shuffle(perm)
        blocks[d] = [uni[perm[i]] for i in range(n)]
    return graded_map_from_blocks(space, space, 0, blocks)


def conjugate_algebra(alg: AInfAlgebra, g: GradedMap) -> AInfAlgebra:
    """Transport the structure along a degree-zero automorphism."""
    ring = alg.space.ring
    ginv = graded_map_from_blocks(
        alg.space, alg.space, 0,
        {d: inverse(g.block_or_zero(d), ring) for d, _ in alg.space.components})
    g_op, ginv_op = op_from_graded(g), op_from_graded(ginv)
    ops = {}
    for k, op in alg.ops.items():
        moved = op_tensor_compose(op, [ginv_op] * k)
        ops[k] = op_insert(g_op, moved, 0)
    return ainf_algebra(alg.space, ops, truncation=alg.truncation, minimal=alg.minimal)


def conjugate_module(mod: AInfModule, new_alg: AInfAlgebra, g_alg: GradedMap,
                     g_mod: GradedMap) -> AInfModule:
    ring = mod.space.ring
    ginv_mod = graded_map_from_blocks(
        mod.space, mod.space, 0,
        {d: inverse(g_mod.block_or_zero(d), ring) for d, _ in mod.space.components})
    ginv_alg = graded_map_from_blocks(
        mod.algebra.space, mod.algebra.space, 0,
        {d: inverse(g_alg.block_or_zero(d), ring) for d, _ in mod.algebra.space.components})
    gm, gim, gia = op_from_graded(g_mod), op_from_graded(ginv_mod), op_from_graded(ginv_alg)
    ops = {}
    for k, op in mod.ops.items():
        moved = op_tensor_compose(op, [gim] + [gia] * (k - 1))
        ops[k] = op_insert(gm, moved, 0)
    return ainf_module(new_alg, mod.space, ops, truncation=mod.truncation,
                       minimal=mod.minimal)


def random_dga(rng: random.Random, ring: RingDescriptor = RATIONALS,
               conjugate: bool = True) -> AInfAlgebra:
    """A random valid dga: catalog pick or monomial algebra, then a random
    change of basis."""
    from .catalog import acyclic_two_term, heisenberg_dga, torus_algebra
    roll = rng.random()
    if roll < 0.25:
        alg = heisenberg_dga(ring)
    elif roll < 0.4:
        alg = torus_algebra(ring, rng.randint(1, 2))
    elif roll < 0.5:
        alg = acyclic_two_term(ring)
    else:
        alg = random_monomial_dga(rng, ring)
    if conjugate:
        g = random_degree_zero_automorphism(alg.space, rng)
        alg = conjugate_algebra(alg, g)
    return alg


def random_minimal_ainf(rng: random.Random,
                        ring: RingDescriptor = RATIONALS) -> AInfAlgebra:
    """A random valid saturated structure with (possibly) nonzero higher
    operations: a transferred minimal model whose computed tail vanishes,
    conjugated afterwards (conjugation preserves saturation)."""
    from .algebras import declare_saturated
    from .catalog import heisenberg_dga
    from .exceptions import StructureError
    from .transfer import transfer_algebra
    small = None
    for _ in range(5):
        alg = random_dga(rng, ring, conjugate=False)
        candidate, _ = transfer_algebra(alg, up_to=6)
        try:
            small = declare_saturated(candidate)
            break
        except StructureError:
            # the computed tail does not stabilize at this cap; redraw
            continue
    if small is None:
        candidate, _ = transfer_algebra(heisenberg_dga(ring), up_to=6)
        small = declare_saturated(candidate)
    g = random_degree_zero_automorphism(small.space, rng)
    return conjugate_algebra(small, g)


def random_dg_module(alg: AInfAlgebra, rng: random.Random) -> AInfModule:
    """A random valid dg module over ``alg``: the regular module in a
    random basis."""
    mod = algebra_as_module(alg)
    g = random_degree_zero_automorphism(mod.space, rng)
    ident = graded_map_from_blocks(
        alg.space, alg.space, 0,
        {d: [[one(alg.space.ring) if i == j else zero(alg.space.ring)
              for j in range(len(ls))] for i in range(len(ls))]
         for d, ls in alg.space.components})
    return conjugate_module(mod, alg, ident, g)


# ---------------------------------------------------------------------------
# mutations

def _random_entry(slots, target, degree, rng: random.Random):
    labels = [sp.all_labels() for sp in slots]
    if any(not ls for ls in labels) or not target.all_labels():
        return None
    for _ in range(200):
        key = tuple(rng.choice(ls) for ls in labels)
        din = sum(sp.degree_of(lab) for sp, lab in zip(slots, key))
        outs = target.labels(din + degree)
        if outs:
            return key, rng.choice(outs)
    return None


def mutate_algebra(alg: AInfAlgebra, rng: random.Random,
                   arity: Optional[int] = None) -> Optional[AInfAlgebra]:
    """Add a random degree-consistent entry to one operation table."""
    k = arity if arity is not None else rng.choice(sorted(alg.ops) or [2])
    op = alg.op(k)
    hit = _random_entry(op.slots, op.target, op.degree, rng)
    if hit is None:
        return None
    key, lab = hit
    table = {kk: dict(v) for kk, v in op.table.items()}
    bump = {lab: random_nonzero_scalar(alg.space.ring, rng, 3)}
    table[key] = vec_add(table.get(key, {}), bump)
    ops = dict(alg.ops)
    ops[k] = multiop(op.slots, op.target, op.degree, table)
    return ainf_algebra(alg.space, ops, truncation=alg.truncation)


def mutate_module(mod: AInfModule, rng: random.Random,
                  arity: Optional[int] = None) -> Optional[AInfModule]:
    k = arity if arity is not None else rng.choice(sorted(mod.ops) or [2])
    op = mod.op(k)
    hit = _random_entry(op.slots, op.target, op.degree, rng)
    if hit is None:
        return None
    key, lab = hit
    table = {kk: dict(v) for kk, v in op.table.items()}
    bump = {lab: random_nonzero_scalar(mod.space.ring, rng, 3)}
    table[key] = vec_add(table.get(key, {}), bump)
    ops = dict(mod.ops)
    ops[k] = multiop(op.slots, op.target, op.degree, table)
    return ainf_module(mod.algebra, mod.space, ops, truncation=mod.truncation)
