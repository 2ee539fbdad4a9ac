"""Contractions: a complex, its homology, and explicit splitting data.

A contraction packages a choice of homology representatives together with
inclusion, projection and a degree ``-1`` homotopy satisfying, exactly:

* ``proj o incl = id``
* ``incl o proj - id = m1 o htpy + htpy o m1``
* side conditions ``htpy o incl = 0``, ``proj o htpy = 0``, ``htpy o htpy = 0``.

:func:`contraction_from_complex` builds one deterministically from reduced
row echelon pivots, so every downstream computation (homology, minimal
models, representative choices) is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .exceptions import CoefficientError, ShapeError, StructureError
from .graded import (GradedMap, GradedSpace, add_graded, compose_graded,
                     graded_map_from_blocks, graded_space, identity_graded_map,
                     scale_graded, zero_graded_map)
from .linalg import (identity_matrix, inverse, mat_mul, mat_vec, nullspace,
                     rref, solve, zero_matrix)
from .rings import Scalar, one, zero


@dataclass(frozen=True)
class Contraction:
    """Splitting data for a complex ``(big, m1)`` onto its homology."""

    big: GradedSpace
    small: GradedSpace
    m1: GradedMap
    incl: GradedMap
    proj: GradedMap
    htpy: GradedMap

    def verify(self) -> None:
        """Raise unless all contraction identities hold exactly."""
        if not compose_graded(self.m1, self.m1).is_zero():
            raise StructureError("m1 o m1 != 0")
        if not compose_graded(self.m1, self.incl).is_zero():
            raise StructureError("incl is not a chain map (m1 o incl != 0)")
        if not compose_graded(self.proj, self.m1).is_zero():
            raise StructureError("proj is not a chain map (proj o m1 != 0)")
        pi = compose_graded(self.proj, self.incl)
        if pi != identity_graded_map(self.small):
            raise StructureError("proj o incl != id")
        lhs = add_graded(compose_graded(self.incl, self.proj),
                         scale_graded(-one(self.big.ring), identity_graded_map(self.big)))
        rhs = add_graded(compose_graded(self.m1, self.htpy),
                         compose_graded(self.htpy, self.m1))
        if lhs != rhs:
            raise StructureError("incl o proj - id != m1 o htpy + htpy o m1")
        if not compose_graded(self.htpy, self.incl).is_zero():
            raise StructureError("htpy o incl != 0")
        if not compose_graded(self.proj, self.htpy).is_zero():
            raise StructureError("proj o htpy != 0")
        if not compose_graded(self.htpy, self.htpy).is_zero():
            raise StructureError("htpy o htpy != 0")


def homology_label(lead: str) -> str:
    """Label of the homology class represented by pivot label ``lead``."""
    return f"[{lead}]"


def contraction_from_complex(space: GradedSpace, m1: GradedMap) -> Contraction:
    """Deterministic contraction of ``(space, m1)`` via echelon pivots.

    Representatives are echelon vectors whose leading basis label names
    the class; the homotopy inverts ``m1`` on the chosen complement with
    the sign that makes ``incl o proj - id = m1 o htpy + htpy o m1``.
    """
    ring = space.ring
    if not ring.is_field:
        raise CoefficientError(
            f"contraction needs field coefficients, got {ring}; base change first")
    if m1.degree != 1 or m1.source != space or m1.target != space:
        raise ShapeError("m1 must be a degree 1 endomorphism of the space")
    if not compose_graded(m1, m1).is_zero():
        raise StructureError("m1 o m1 != 0")

    degrees = list(space.degrees())
    z, o = zero(ring), one(ring)

    # per-degree bases, as coordinate column vectors
    kernels: Dict[int, List[List[Scalar]]] = {}
    pivots_of_d: Dict[int, List[int]] = {}
    free_cols_of: Dict[int, List[int]] = {}
    for d in degrees:
        nd = space.dim(d)
        if nd == 0:
            kernels[d], pivots_of_d[d], free_cols_of[d] = [], [], []
            continue
        if space.dim(d + 1) == 0:
            # everything is a cycle
            eye = identity_matrix(nd, ring)
            kernels[d] = [[eye[i][j] for i in range(nd)] for j in range(nd)]
            pivots_of_d[d] = []
            free_cols_of[d] = list(range(nd))
            continue
        mat = m1.block_or_zero(d)
        kernels[d] = nullspace(mat, ring)
        pivots_of_d[d] = rref(mat, ring)[1]
        free_cols_of[d] = [j for j in range(nd) if j not in set(pivots_of_d[d])]

    small_comps: Dict[int, List[str]] = {}
    incl_blocks: Dict[int, List[List[Scalar]]] = {}
    proj_blocks: Dict[int, List[List[Scalar]]] = {}
    htpy_blocks: Dict[int, List[List[Scalar]]] = {}
    reps_by_degree: Dict[int, List[List[Scalar]]] = {}

    for d in degrees:
        nd = space.dim(d)
        if nd == 0:
            continue
        # boundaries: image of the previous differential, at its pivot columns
        prev = m1.block_or_zero(d - 1) if space.dim(d - 1) else zero_matrix(nd, 0, ring)
        prev_pivots = rref(prev, ring)[1] if space.dim(d - 1) else []
        boundary_basis = [[prev[i][j] for j in prev_pivots] for i in range(nd)]
        kernel_basis = kernels[d]

        # extend boundaries to the kernel: pivots of [B | Z] beyond B pick reps
        cand = [boundary_basis[i] + [kernel_basis[j][i] for j in range(len(kernel_basis))]
                for i in range(nd)]
        nb = len(prev_pivots)
        _, piv = rref(cand, ring) if cand and cand[0] else (None, [])
        rep_cols = [p - nb for p in piv if p >= nb]
        reps = [kernel_basis[j] for j in rep_cols]
        reps_by_degree[d] = reps

        # name each class by the free column that distinguishes its
        # echelon representative (unique by construction)
        labels = space.labels(d)
        names = [homology_label(labels[free_cols_of[d][j]]) for j in rep_cols]
        if names:
            small_comps[d] = names
            incl_blocks[d] = [[reps[j][i] for j in range(len(reps))] for i in range(nd)]

    small = graded_space(ring, small_comps)

    for d in degrees:
        nd = space.dim(d)
        if nd == 0:
            continue
        reps = reps_by_degree.get(d, [])
        # full decomposition basis at degree d: boundaries | reps | complement
        prev = m1.block_or_zero(d - 1) if space.dim(d - 1) else zero_matrix(nd, 0, ring)
        prev_pivots = rref(prev, ring)[1] if space.dim(d - 1) else []
        cols: List[List[Scalar]] = []
        col_kind: List[Tuple[str, int]] = []
        for jj, j in enumerate(prev_pivots):
            cols.append([prev[i][j] for i in range(nd)])
            col_kind.append(("boundary", j))
        for jj, v in enumerate(reps):
            cols.append(v)
            col_kind.append(("rep", jj))
        for j in pivots_of_d[d]:
            e = [z] * nd
            e[j] = o
            cols.append(e)
            col_kind.append(("complement", j))
        if len(cols) != nd:
            raise StructureError("internal: decomposition basis is not full")
        T = [[cols[j][i] for j in range(nd)] for i in range(nd)]
        Tinv = inverse(T, ring)

        # proj: rep-coordinates of Tinv
        if reps:
            proj_blocks[d] = [Tinv[k] for k in range(nd)
                              if col_kind[k][0] == "rep"]

        # htpy on degree d: send boundary columns to -(m1|C)^(-1), kill the rest
        if space.dim(d - 1):
            h_cols: List[List[Scalar]] = []
            nd_prev = space.dim(d - 1)
            for k in range(nd):
                kind, j = col_kind[k]
                if kind != "boundary":
                    continue
                # preimage under m1 of the boundary column, inside the complement
                pre = [z] * nd_prev
                pre[j] = o
                h_cols.append([-x for x in pre])
            # assemble htpy_d = (columns for boundary part) o (coordinates)
            hb = zero_matrix(nd_prev, nd, ring)
            bi = 0
            for k in range(nd):
                kind, j = col_kind[k]
                if kind != "boundary":
                    continue
                for i in range(nd_prev):
                    if not h_cols[bi][i].is_zero():
                        for c in range(nd):
                            if not Tinv[k][c].is_zero():
                                hb[i][c] = hb[i][c] + h_cols[bi][i] * Tinv[k][c]
                bi += 1
            if any(not x.is_zero() for row in hb for x in row):
                htpy_blocks[d] = hb

    incl = graded_map_from_blocks(small, space, 0, incl_blocks)
    proj = graded_map_from_blocks(space, small, 0, proj_blocks)
    htpy = graded_map_from_blocks(space, space, -1, htpy_blocks)
    c = Contraction(space, small, m1, incl, proj, htpy)
    c.verify()
    return c


def normalize_contraction(c: Contraction) -> Contraction:
    """Enforce the side conditions on raw contraction data.

    Only the chain maps, ``proj o incl = id`` and the homotopy identity
    are required of the input.  The homotopy is rebuilt from scratch on
    the acyclic image of the idempotent ``1 - incl proj``: that subcomplex
    splits (echelon pivots) as boundaries plus a complement on which the
    differential is injective, and the new homotopy is minus the inverse
    on boundaries and zero elsewhere, which satisfies every side condition
    by construction.
    """
    ring = c.big.ring
    space = c.big
    ip = compose_graded(c.incl, c.proj)
    e = add_graded(identity_graded_map(space), scale_graded(-one(ring), ip))
    # sanity on the input (the homotopy itself may be dirty)
    if not compose_graded(c.m1, c.incl).is_zero() or not compose_graded(c.proj, c.m1).is_zero():
        raise StructureError("raw contraction maps are not chain maps")
    if compose_graded(c.proj, c.incl) != identity_graded_map(c.small):
        raise StructureError("proj o incl != id")
    lhs = scale_graded(-one(ring), e)
    rhs = add_graded(compose_graded(c.m1, c.htpy), compose_graded(c.htpy, c.m1))
    if lhs != rhs:
        raise StructureError("raw homotopy identity fails; nothing to normalize")

    z = zero(ring)
    # per-degree bases of W = im(e), its d-kernel complement C, and the
    # preimages of boundaries
    w_basis: Dict[int, List[List[Scalar]]] = {}
    c_basis: Dict[int, List[List[Scalar]]] = {}
    for d in space.degrees():
        nd = space.dim(d)
        eb = e.block_or_zero(d)
        piv = rref(eb, ring)[1]
        w_basis[d] = [[eb[i][j] for i in range(nd)] for j in piv]
        if space.dim(d + 1) and w_basis[d]:
            dmat = m1_times(c.m1, d, w_basis[d], ring)
            cpiv = rref(dmat, ring)[1]
            c_basis[d] = [w_basis[d][j] for j in cpiv]
        else:
            c_basis[d] = []
    htpy_blocks: Dict[int, List[List[Scalar]]] = {}
    for d in space.degrees():
        nd = space.dim(d)
        if nd == 0:
            continue
        prev_c = c_basis.get(d - 1, [])
        boundaries = (m1_times(c.m1, d - 1, prev_c, ring)
                      if prev_c and space.dim(d) else [])
        bt = [[boundaries[j][i] for j in range(len(prev_c))] for i in range(nd)] \
            if prev_c else [[] for _ in range(nd)]
        ct = [[c_basis[d][j][i] for j in range(len(c_basis[d]))] for i in range(nd)] \
            if c_basis[d] else [[] for _ in range(nd)]
        cols = [bt[i] + ct[i] for i in range(nd)]
        eb = e.block_or_zero(d)
        block = None
        nd_prev = space.dim(d - 1)
        for col in range(nd):
            ex = [eb[i][col] for i in range(nd)]
            y = solve(cols, ex, ring) if cols and cols[0] else ([] if all(x.is_zero() for x in ex) else None)
            if y is None:
                raise StructureError("idempotent complement is not acyclic")
            if block is None:
                block = [[z] * nd for _ in range(nd_prev)]
            for j in range(len(prev_c)):
                if not y[j].is_zero():
                    for i in range(nd_prev):
                        block[i][col] = block[i][col] - y[j] * prev_c[j][i]
        if block is not None and any(not x.is_zero() for row in block for x in row):
            htpy_blocks[d] = block
    htpy = graded_map_from_blocks(space, space, -1, htpy_blocks)
    out = Contraction(c.big, c.small, c.m1, c.incl, c.proj, htpy)
    out.verify()
    return out


def m1_times(m1: GradedMap, d: int, columns: List[List[Scalar]], ring) -> List[List[Scalar]]:
    """Apply a differential block to coordinate columns at degree ``d``."""
    from .linalg import mat_vec
    block = m1.block_or_zero(d)
    return [mat_vec(block, col, ring) for col in columns]


def induced_on_homology(f1: GradedMap, c_source: Contraction, c_target: Contraction) -> GradedMap:
    """The map induced on chosen homology representatives."""
    return compose_graded(c_target.proj, compose_graded(f1, c_source.incl))


def graded_map_invertible(f: GradedMap) -> bool:
    """True iff every block of ``f`` is a square invertible matrix."""
    if f.degree != 0:
        return False
    ring = f.source.ring
    for d in set(f.source.degrees()) | set(f.target.degrees()):
        rows, cols = f.target.dim(d), f.source.dim(d)
        if rows != cols:
            return False
        if cols == 0:
            continue
        mat = f.block_or_zero(d)
        if len(rref(mat, ring)[1]) != cols:
            return False
    return True
