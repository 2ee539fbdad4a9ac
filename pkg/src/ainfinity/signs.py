"""The single sign oracle.

Every sign used by the engine routes through this module: the Koszul rule
for evaluating tensor products of graded maps, the explicit exponents of
the structure and morphism relations, and the shift dictionary between
operations and their suspended counterparts.  Keeping them in one place
makes the conventions auditable and lets the bar-construction tests
validate all of them mechanically.

Conventions:

* operations ``m_k`` have degree ``2 - k``; morphism components ``f_k``
  have degree ``1 - k`` (upper-index grading);
* ``(f (x) g)(x (x) y) = (-1)^(|g| |x|) f(x) (x) g(y)`` (Koszul);
* the shift dictionary is ``m |-> (-1)^(k - 1 + deg m) s o m o (s^-1)^(x k)``
  where ``s`` is the canonical degree ``-1`` identification with the
  shifted space.
"""

from __future__ import annotations

from typing import Sequence


def koszul_insert_sign(op_degree: int, prefix_degree: int) -> int:
    """Sign for evaluating ``id^(x j) (x) g (x) id^(x l)`` on elements.

    ``prefix_degree`` is the total degree of the elements in the first
    ``j`` slots that ``g`` moves past.
    """
    return -1 if (op_degree * prefix_degree) % 2 else 1


def koszul_tensor_sign(map_degrees: Sequence[int], block_degrees: Sequence[int]) -> int:
    """Sign for evaluating ``f_1 (x) ... (x) f_r`` on blocks of elements.

    ``(-1)^(sum_{u<v} deg f_v * deg x_u)`` with ``deg x_u`` the total
    degree of the block handed to ``f_u``.
    """
    e = 0
    for v in range(1, len(map_degrees)):
        if map_degrees[v] % 2:
            e += sum(block_degrees[:v])
    return -1 if e % 2 else 1


def structure_sign(j: int, k: int, l: int) -> int:
    """The explicit exponent ``(-1)^(jk + l)`` of the structure relations."""
    return -1 if (j * k + l) % 2 else 1


def module_action_sign(l: int) -> int:
    """The exponent ``(-1)^l`` on the leading-slot sum of the module relations."""
    return -1 if l % 2 else 1


def morphism_tensor_sign(parts: Sequence[int]) -> int:
    """The exponent on ``m_r(f_{i_1} (x) ... (x) f_{i_r})``.

    ``(-1)^s`` with ``s = sum_{u >= 2} (1 - i_u)(i_1 + ... + i_{u-1})``.
    Including ``i_u`` itself in the inner sum would not change the sign:
    ``(1 - i) i`` is always even.
    """
    e = 0
    acc = 0
    for u, i_u in enumerate(parts):
        if u >= 1:
            e += (1 - i_u) * acc
        acc += i_u
    return -1 if e % 2 else 1


def suspension_sign(arity: int, op_degree: int) -> int:
    """The coefficient ``(-1)^(arity - 1 + op_degree)`` of the shift dictionary."""
    return -1 if (arity - 1 + op_degree) % 2 else 1


def shift_tuple_sign(unshifted_degrees: Sequence[int], shift: int) -> int:
    """Koszul sign of ``(s^-1)^(x k)`` (shift=-1) or ``s^(x k)`` (shift=+1).

    Evaluating a tensor power of the degree ``+-1`` identification on a
    tuple of elements gives ``(-1)^(sum_u (k - u) d_u)`` where ``d_u`` are
    the degrees the factors move past; for ``(s^-1)^(x k)`` those are the
    shifted degrees ``deg - 1``, for ``s^(x k)`` the unshifted ones.
    """
    k = len(unshifted_degrees)
    e = 0
    for u, d in enumerate(unshifted_degrees):
        d_eff = d - 1 if shift == -1 else d
        e += (k - 1 - u) * d_eff
    return -1 if e % 2 else 1


def shift_power_swap_sign(arity: int) -> int:
    """``(s^-1)^(x k) o s^(x k) = (-1)^(k(k-1)/2) id``; this is that sign."""
    return -1 if (arity * (arity - 1) // 2) % 2 else 1
