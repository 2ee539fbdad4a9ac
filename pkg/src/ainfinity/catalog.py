"""Named small structures used by tests, demos and the command line.

Everything here is exact and deterministic: exterior algebras with chosen
differentials, their associated dg modules, and the handful of fixtures
the test suite exercises end to end.
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .algebras import AInfAlgebra, ainf_algebra, dga, graded_algebra
from .exceptions import ShapeError
from .graded import (GradedSpace, Label, MultiOp, Vector, basis_vector,
                     graded_space, multiop, vec_add, vec_scale)
from .rings import RATIONALS, RingDescriptor, from_int, one, zero


def exterior_label(subset: Sequence[int]) -> Label:
    return "1" if not subset else "e" + "".join(str(i) for i in subset)


def exterior_space(ring: RingDescriptor, n: int) -> GradedSpace:
    """Basis of an exterior algebra on n degree-1 generators."""
    comps: Dict[int, List[Label]] = {}
    for r in range(n + 1):
        comps[r] = [exterior_label(s) for s in combinations(range(1, n + 1), r)]
    return graded_space(ring, comps)


def _wedge_subsets(s: Tuple[int, ...], t: Tuple[int, ...]) -> Optional[Tuple[int, Tuple[int, ...]]]:
    if set(s) & set(t):
        return None
    inversions = sum(1 for a in s for b in t if a > b)
    sign = -1 if inversions % 2 else 1
    return sign, tuple(sorted(s + t))


def _label_subset(lab: Label) -> Tuple[int, ...]:
    return () if lab == "1" else tuple(int(c) for c in lab[1:])


def exterior_product(space: GradedSpace) -> MultiOp:
    """The wedge product as a sparse binary operator."""
    ring = space.ring
    table = {}
    for a in space.all_labels():
        for b in space.all_labels():
            w = _wedge_subsets(_label_subset(a), _label_subset(b))
            if w is None:
                continue
            sign, s = w
            lab = exterior_label(s)
            if lab not in space:
                continue
            table[(a, b)] = {lab: from_int(ring, sign)}
    return multiop((space, space), space, 0, table)


def exterior_differential(space: GradedSpace, images: Mapping[int, Vector]) -> MultiOp:
    """The derivation with ``d(e_i) = images[i]`` extended by the Leibniz rule."""
    ring = space.ring
    table = {}
    for lab in space.all_labels():
        s = _label_subset(lab)
        acc: Vector = {}
        for pos, gen in enumerate(s):
            img = images.get(gen)
            if not img:
                continue
            rest = s[:pos] + s[pos + 1:]
            sign = -1 if pos % 2 else 1
            for out_lab, c in img.items():
                w = _wedge_subsets(_label_subset(out_lab), rest)
                if w is None:
                    continue
                wsign, u = w
                # move d(e_gen) into position: (-1)^(pos) from passing pos generators
                total = sign * wsign
                coeff = c if total == 1 else -c
                acc = vec_add(acc, {exterior_label(u): coeff})
        if acc:
            table[(lab,)] = acc
    return multiop((space,), space, 1, table)


def heisenberg_dga(ring: RingDescriptor = RATIONALS) -> AInfAlgebra:
    """The 8-dimensional exterior dga on e1, e2, e3 with ``d e3 = e1 e2``."""
    space = exterior_space(ring, 3)
    m2 = exterior_product(space)
    m1 = exterior_differential(space, {3: {"e12": one(ring)}})
    return dga(space, m1, m2)


def torus_algebra(ring: RingDescriptor = RATIONALS, n: int = 2) -> AInfAlgebra:
    """Exterior algebra on n generators with zero differential."""
    space = exterior_space(ring, n)
    return graded_algebra(space, exterior_product(space), unital=True, unit="1")


def ground_field_algebra(ring: RingDescriptor = RATIONALS) -> AInfAlgebra:
    """The ground ring in degree 0."""
    space = graded_space(ring, {0: ["1"]})
    table = {("1", "1"): {"1": one(ring)}}
    return graded_algebra(space, multiop((space, space), space, 0, table),
                          unital=True, unit="1")


def acyclic_two_term(ring: RingDescriptor = RATIONALS) -> AInfAlgebra:
    """The contractible complex ``R -> R`` (identity differential), zero product."""
    space = graded_space(ring, {0: ["x"], 1: ["y"]})
    m1 = multiop((space,), space, 1, {("x",): {"y": one(ring)}})
    m2 = multiop((space, space), space, 0, {})
    return dga(space, m1, m2)


def heisenberg_over_exterior(ring: RingDescriptor = RATIONALS):
    """The Heisenberg complex as a dg module over the exterior subalgebra.

    The base is the zero-differential algebra on e1, e2; the module is the
    full 8-dimensional complex with the wedge action from the right.  Its
    minimal model is the standard source of a nonvanishing first
    obstruction class.
    """
    from .modules import ainf_module
    A = torus_algebra(ring, 2)
    D = heisenberg_dga(ring)
    table = {}
    for x in D.space.all_labels():
        for a in A.space.all_labels():
            w = _wedge_subsets(_label_subset(x), _label_subset(a))
            if w is None:
                continue
            sign, s = w
            table[(x, a)] = {exterior_label(s): from_int(ring, sign)}
    m2 = multiop((D.space, A.space), D.space, 0, table)
    m1 = multiop((D.space,), D.space, 1, D.op(1).table)
    M = ainf_module(A, D.space, {1: m1, 2: m2})
    return A, M


def massey_module_fixture(ring: RingDescriptor = RATIONALS):
    """Minimal module over the exterior algebra with a nonzero first
    obstruction class: the transferred Heisenberg module, declared
    saturated after full re-verification.

    Returns the pair (base algebra, module); the base is the transferred
    copy of the exterior algebra, whose labels are bracketed classes.
    """
    from .modules import declare_module_saturated
    from .transfer import transfer_pair
    A, M = heisenberg_over_exterior(ring)
    _, hm, _ = transfer_pair(A, M, up_to=4, mod_up_to=6)
    out = declare_module_saturated(hm)
    return out.algebra, out


def formal_module_fixture(ring: RingDescriptor = RATIONALS, entry: int = 0):
    """A formal minimal module whose ternary operation is nonzero but exact.

    Built by transporting the bare associative module through a gauge
    ``(id, f_2)`` with a single table entry (``entry`` selects which): the
    result is formal by construction, with a nonzero primitive for the
    prover to find.  Entries whose transport does not stabilize are
    skipped.
    """
    from .exceptions import StructureError
    from .formality import transport_source_through
    from .graded import multiop as _multiop
    from .modules import declare_module_saturated, truncate_to_M2
    A, hm = massey_module_fixture(ring)
    m2flat = truncate_to_M2(hm)
    # deterministic degree -1 gauge component with a single entry
    cands = []
    for key in _binary_keys(m2flat, A):
        din = m2flat.space.degree_of(key[0]) + A.space.degree_of(key[1])
        for lab in m2flat.space.labels(din - 1):
            cands.append((key, lab))
    for shift in range(len(cands)):
        key, lab = cands[(entry + shift) % len(cands)]
        f2 = _multiop((m2flat.space, A.space), m2flat.space, -1, {key: {lab: one(ring)}})
        try:
            src = transport_source_through(m2flat, {2: f2}, up_to=8)
            out = declare_module_saturated(src)
        except StructureError:
            continue
        if out.has_op(3):
            return A, out
    raise StructureError("no stabilizing gauge entry found")


def _binary_keys(mod, alg):
    for x in mod.space.all_labels():
        for a in alg.space.all_labels():
            yield (x, a)
