"""Bar-construction oracles.

The operations of a structure transport, through the shift dictionary, to
a degree ``+1`` coderivation on the truncated reduced tensor coalgebra of
the shifted space (for modules: on ``M[1] (x) T(A[1])``).  The structure
relations hold if and only if the coderivation squares to zero; checking
``d o d = 0`` word by word is therefore an independent verification path
for the relation checkers, sharing no sign logic with them beyond the
shift dictionary itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .algebras import AInfAlgebra, RelationFailure
from .exceptions import StructureError
from .graded import GradedSpace, Label, MultiOp, shift_space, suspend_op
from .rings import Scalar

Word = Tuple[Label, ...]
WordVector = Dict[Word, Scalar]


def _wv_add_scaled(acc: WordVector, word: Word, c: Scalar) -> None:
    got = acc.get(word)
    s = c if got is None else got + c
    if s.is_zero():
        acc.pop(word, None)
    else:
        acc[word] = s


@dataclass(frozen=True)
class BarDifferential:
    """The coderivation induced by suspended algebra operations."""

    algebra: AInfAlgebra
    shifted: GradedSpace
    suspended: Dict[int, MultiOp]
    max_length: int

    def apply(self, word: Word) -> WordVector:
        out: WordVector = {}
        prefix_deg = 0
        for j in range(len(word)):
            for k, dk in self.suspended.items():
                if j + k > len(word):
                    continue
                hit = dk.table.get(word[j:j + k])
                if not hit:
                    continue
                sgn = -1 if prefix_deg % 2 else 1
                for out_lab, c in hit.items():
                    _wv_add_scaled(out, word[:j] + (out_lab,) + word[j + k:],
                                   c if sgn == 1 else -c)
            prefix_deg += self.shifted.degree_of(word[j])
        return out

    def apply_vector(self, wv: WordVector) -> WordVector:
        out: WordVector = {}
        for word, c in wv.items():
            for w2, c2 in self.apply(word).items():
                _wv_add_scaled(out, w2, c * c2)
        return out

    def words(self, max_length: Optional[int] = None) -> List[Word]:
        """All words of length 1..max_length in deterministic order."""
        n = self.max_length if max_length is None else max_length
        labels = self.shifted.all_labels()
        out: List[Word] = []
        layer: List[Word] = [()]
        for _ in range(n):
            layer = [w + (lab,) for w in layer for lab in labels]
            out.extend(layer)
        return out

    def matrix(self, max_length: Optional[int] = None):
        """Sparse matrix of the coderivation on the word basis.

        Returns ``(words, entries)`` with ``entries[(image_word, word)]``.
        """
        ws = self.words(max_length)
        entries: Dict[Tuple[Word, Word], Scalar] = {}
        for w in ws:
            for w2, c in self.apply(w).items():
                entries[(w2, w)] = c
        return ws, entries


def bar_differential(alg: AInfAlgebra) -> BarDifferential:
    """Assemble the coderivation from the suspended operations.

    The algebra must be saturated: declared zero beyond its largest stored
    arity, so that the truncation captures every relation.
    """
    if not alg.is_saturated():
        raise StructureError("bar construction needs a saturated structure")
    suspended = {k: suspend_op(op) for k, op in alg.ops.items()}
    return BarDifferential(alg, shift_space(alg.space), suspended, alg.available_up_to())


def bar_check(alg: AInfAlgebra) -> bool:
    """True iff the coderivation squares to zero on the full truncation."""
    d = bar_differential(alg)
    for w in d.words():
        dw = d.apply(w)
        if not dw:
            continue
        if d.apply_vector(dw):
            return False
    return True


# ---------------------------------------------------------------------------
# module version

@dataclass(frozen=True)
class ModuleBarDifferential:
    """Comodule coderivation on ``M[1] (x) T(A[1])`` word vectors.

    Words are ``(module label, letter, ..., letter)``.  The differential
    applies suspended module operations to the leading block and suspended
    algebra operations, with Koszul signs, inside the tail.
    """

    shifted_module: GradedSpace
    shifted_algebra: GradedSpace
    suspended_module: Dict[int, MultiOp]
    suspended_algebra: Dict[int, MultiOp]
    max_tail: int

    def apply(self, word: Word) -> WordVector:
        out: WordVector = {}
        for k, dk in self.suspended_module.items():
            if k > len(word):
                continue
            hit = dk.table.get(word[:k])
            if not hit:
                continue
            for out_lab, c in hit.items():
                _wv_add_scaled(out, (out_lab,) + word[k:], c)
        prefix_deg = self.shifted_module.degree_of(word[0])
        for j in range(1, len(word)):
            for k, dk in self.suspended_algebra.items():
                if j + k > len(word):
                    continue
                hit = dk.table.get(word[j:j + k])
                if not hit:
                    continue
                sgn = -1 if prefix_deg % 2 else 1
                for out_lab, c in hit.items():
                    _wv_add_scaled(out, word[:j] + (out_lab,) + word[j + k:],
                                   c if sgn == 1 else -c)
            prefix_deg += self.shifted_algebra.degree_of(word[j])
        return out

    def apply_vector(self, wv: WordVector) -> WordVector:
        out: WordVector = {}
        for word, c in wv.items():
            for w2, c2 in self.apply(word).items():
                _wv_add_scaled(out, w2, c * c2)
        return out

    def words(self) -> List[Word]:
        m_labels = self.shifted_module.all_labels()
        a_labels = self.shifted_algebra.all_labels()
        out: List[Word] = []
        layer: List[Word] = [(m,) for m in m_labels]
        out.extend(layer)
        for _ in range(self.max_tail):
            layer = [w + (lab,) for w in layer for lab in a_labels]
            out.extend(layer)
        return out


def module_bar_differential(mod) -> ModuleBarDifferential:
    from .modules import AInfModule
    if not isinstance(mod, AInfModule):
        raise StructureError("module_bar_differential needs an AInfModule")
    alg = mod.algebra
    if not mod.is_saturated() or not alg.is_saturated():
        raise StructureError("bar construction needs saturated structures")
    n_m, n_a = mod.max_arity(), alg.max_arity()
    max_level = max(2 * n_m - 1, n_m + n_a - 1, 1)
    return ModuleBarDifferential(
        shift_space(mod.space), shift_space(alg.space),
        {k: suspend_op(op) for k, op in mod.ops.items()},
        {k: suspend_op(op) for k, op in alg.ops.items()},
        max_tail=max_level - 1)


def module_bar_check(mod) -> bool:
    """True iff the comodule coderivation squares to zero.

    Assumes the underlying algebra is valid (check it first); the check
    then holds iff the module relations do.
    """
    d = module_bar_differential(mod)
    for w in d.words():
        dw = d.apply(w)
        if not dw:
            continue
        if d.apply_vector(dw):
            return False
    return True
