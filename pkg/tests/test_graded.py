"""Graded spaces, maps, sparse operators, the shift dictionary and the
saturation bounds."""

import random

import pytest

from ainfinity.catalog import heisenberg_dga, torus_algebra
from ainfinity.exceptions import ShapeError, StructureError
from ainfinity.graded import (GradedSpace, algebra_saturation_bound,
                              apply_multi, basis_vector, compose_graded,
                              desuspend_op, graded_map_from_blocks,
                              graded_map_from_entries, graded_space,
                              identity_graded_map, max_feasible_letters,
                              module_saturation_bound, multiop, op_add,
                              op_insert, op_tensor_compose, shift_space,
                              suspend_op, tensor_basis, zero_graded_map)
from ainfinity.linalg import mat_mul
from ainfinity.randomized import random_scalar
from ainfinity.rings import RATIONALS, from_int, one, zero

Q = RATIONALS


@pytest.fixture
def space22():
    return graded_space(Q, {0: ["a", "b"], 1: ["c", "d"]})


def random_graded_map(src, tgt, degree, rng):
    entries = {}
    for lab in src.all_labels():
        d = src.degree_of(lab)
        for out in tgt.labels(d + degree):
            entries[(out, lab)] = random_scalar(Q, rng, 4)
    return graded_map_from_entries(src, tgt, degree, entries)


def test_space_validation():
    with pytest.raises(StructureError):
        graded_space(Q, {0: ["x", "x"]})
    s = graded_space(Q, {2: ["u"], 0: ["v"]})
    assert s.degrees() == (0, 2)
    assert s.degree_of("u") == 2
    assert s.total_dim() == 2


def test_compose_graded_identity_and_zero(space22, rng):
    f = random_graded_map(space22, space22, 1, rng)
    ident = identity_graded_map(space22)
    assert compose_graded(ident, f) == f
    assert compose_graded(f, ident) == f
    z = zero_graded_map(space22, space22, 0)
    assert compose_graded(f, z).is_zero()


def test_compose_graded_matches_dense_oracle(space22, rng):
    # dense block multiplication on a dim-(2,2) space
    f = random_graded_map(space22, space22, 0, rng)
    g = random_graded_map(space22, space22, 0, rng)
    gf = compose_graded(g, f)
    for d in space22.degrees():
        expected = mat_mul(g.block_or_zero(d), f.block_or_zero(d), Q)
        assert gf.block_or_zero(d) == expected


def test_compose_graded_shape_mismatch(space22):
    other = graded_space(Q, {0: ["z"]})
    f = zero_graded_map(space22, space22, 0)
    g = zero_graded_map(other, other, 0)
    with pytest.raises(ShapeError):
        compose_graded(g, f)


def test_apply_multi_unit_and_linearity():
    alg = torus_algebra()
    m2 = alg.op(2)
    assert apply_multi(m2, ("1", "e1")) == basis_vector(alg.space, "e1")
    # exterior-algebra multiplication oracle
    heis = heisenberg_dga()
    v = apply_multi(heis.op(2), ("e1", "e2"))
    assert v == {"e12": one(Q)}
    # zero slot kills everything
    assert apply_multi(m2, ({}, "e1")) == {}
    # multilinear extension
    x = {"e1": from_int(Q, 2), "e2": from_int(Q, 3)}
    out = apply_multi(heis.op(2), (x, "e2"))
    assert out == {"e12": from_int(Q, 2)}


def test_degree_bookkeeping_enforced(space22):
    with pytest.raises(StructureError):
        multiop((space22, space22), space22, 0, {("a", "b"): {"c": one(Q)}})


def test_suspend_desuspend_round_trip(rng):
    heis = heisenberg_dga()
    labels = heis.space.all_labels()
    count = 0
    while count < 50:
        arity = rng.randint(1, 4)
        deg = rng.randint(-2, 2)
        table = {}
        for _ in range(5):
            key = tuple(rng.choice(labels) for _ in range(arity))
            din = sum(heis.space.degree_of(x) for x in key)
            outs = [l for l in labels if heis.space.degree_of(l) == din + deg]
            if outs:
                table[key] = {rng.choice(outs): from_int(Q, rng.randint(-3, 3))}
        op = multiop((heis.space,) * arity, heis.space, deg, table)
        assert desuspend_op(suspend_op(op)) == op
        count += 1


def test_suspension_degree():
    heis = heisenberg_dga()
    # k = 3, deg m = -1 gives a degree 1 shifted operator
    m3 = multiop((heis.space,) * 3, heis.space, -1, {})
    assert suspend_op(m3).degree == 1
    assert suspend_op(heis.op(1)).degree == 1
    assert suspend_op(heis.op(2)).degree == 1


def test_suspend_arity_one_sign():
    # on a 1-dimensional space the dictionary is just the stated sign
    s = graded_space(Q, {1: ["x"]})
    m1 = multiop((s,), s, 0, {("x",): {"x": from_int(Q, 5)}})
    sus = suspend_op(m1)
    # arity 1, degree 0: coefficient (-1)^(1-1+0) = +1, no Koszul factors
    assert sus.table[("x",)] == {"x": from_int(Q, 5)}
    d = multiop((s,), s, 1, {})
    assert desuspend_op(suspend_op(d)) == d


def test_tensor_basis_enumeration():
    one_slot = graded_space(Q, {0: ["a"]})
    assert tensor_basis([one_slot]) == [("a",)]
    two = graded_space(Q, {0: ["x", "y"]})
    assert tensor_basis([two, two]) == [("x", "x"), ("x", "y"), ("y", "x"), ("y", "y")]
    # counting oracle: n^k tuples on a degree-homogeneous space
    three = graded_space(Q, {1: ["p", "q", "r"]})
    assert len(tensor_basis([three] * 3)) == 27
    assert tensor_basis([three] * 2, window=(2, 2)) == tensor_basis([three] * 2)
    assert tensor_basis([three] * 2, window=(5, 9)) == []


def test_saturation_bounds():
    # degrees >= 2: finite bound, and beyond it no entries are possible
    s = graded_space(Q, {2: ["a"], 3: ["b"]})
    bound = algebra_saturation_bound(s)
    assert bound is not None
    for k in range(bound + 1, bound + 3):
        feasible = [key for key in tensor_basis([s] * k)
                    if s.labels(sum(s.degree_of(x) for x in key) + 2 - k)]
        assert feasible == []
    # degree-1 letters allow arbitrarily large arities
    t = graded_space(Q, {0: ["u"], 1: ["v"]})
    assert algebra_saturation_bound(t) is None
    # spec's b - a + 2 formula is an upper bound when the support starts at 2
    assert bound <= (3 - 2) + 2


def test_saturation_forced_zero_matches_constructor():
    s = graded_space(Q, {2: ["a"], 3: ["b"]})
    bound = algebra_saturation_bound(s)
    k = bound + 1
    with pytest.raises(StructureError):
        multiop((s,) * k, s, 2 - k, {("a",) * k: {"a": one(Q)}})


def test_max_feasible_letters_edge_cases():
    assert max_feasible_letters([], [0]) == 0
    assert max_feasible_letters([1], []) == 0
    assert max_feasible_letters([1], [3]) == 3
    assert max_feasible_letters([0], [0]) is None
    assert max_feasible_letters([-1, 1], [0]) is None
    assert max_feasible_letters([-2], [-4]) == 2


def test_module_saturation_bound():
    heis = heisenberg_dga()
    s = heis.space
    assert module_saturation_bound(s, s) is None
    a = graded_space(Q, {2: ["x"]})
    m = graded_space(Q, {0: ["m"], 2: ["n"]})
    assert module_saturation_bound(m, a) is not None


def test_op_insert_koszul_sign():
    # inserting a degree-odd operator past a degree-one element flips sign
    s = graded_space(Q, {0: ["p"], 1: ["x"], 2: ["y"], 3: ["z"]})
    inner = multiop((s,), s, 1, {("x",): {"y": one(Q)}})
    outer = multiop((s, s), s, 0, {("x", "y"): {"z": one(Q)}})
    composed = op_insert(outer, inner, 1)
    assert composed.table[("x", "x")] == {"z": -one(Q)}
    composed0 = op_insert(outer, inner, 0)
    assert composed0.is_zero()  # outer has no entry starting in degree 2


def test_op_tensor_compose_matches_manual():
    s = graded_space(Q, {0: ["p"], 1: ["x"]})
    f = multiop((s,), s, 0, {("p",): {"p": from_int(Q, 2)}, ("x",): {"x": from_int(Q, 3)}})
    m2 = multiop((s, s), s, 0, {("p", "x"): {"x": one(Q)}, ("p", "p"): {"p": one(Q)}})
    out = op_tensor_compose(m2, [f, f])
    assert out.table[("p", "x")] == {"x": from_int(Q, 6)}
    assert out.table[("p", "p")] == {"p": from_int(Q, 4)}
