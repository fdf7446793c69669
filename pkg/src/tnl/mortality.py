"""Bounded search for vanishing products over integer-matrix libraries.

Mortality is only semi-decidable, so the search is breadth-first by word
length with exact arithmetic, reporting the shortest zero word
(lexicographically least among the shortest) up to a caller-set bound.
Repeated products are pruned: once a product matrix has been seen, longer
words reaching it again can contribute nothing new.  If every matrix is
invertible no product can vanish at all, which short-circuits the search.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .gadget import IntegerMatrix, embed_3x3, gadget_gate
from .physicality import GateLibrary

DEFAULT_MAX_LEN = 12

#: Past this many memoized products the search degrades to plain BFS.
MEMO_CAP = 1 << 24


@dataclass(frozen=True)
class MortalityInstance:
    matrices: tuple[IntegerMatrix, ...]
    max_len: int = DEFAULT_MAX_LEN

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(self.matrices))
        if not self.matrices:
            raise ValueError("need at least one matrix")
        if self.max_len < 1:
            raise ValueError("max_len must be positive")
        dims = {(m.rows, m.cols) for m in self.matrices}
        if len(dims) != 1 or not self.matrices[0].is_square():
            raise ValueError(f"matrices must be square and equal-sized, got {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.matrices[0].rows


def product(inst: MortalityInstance, word) -> IntegerMatrix:
    """Exact product in word order; the empty word is the identity."""
    out = IntegerMatrix.identity(inst.dim)
    for i in word:
        i = int(i)
        if not 1 <= i <= len(inst.matrices):
            raise IndexError(f"matrix index {i} out of range 1..{len(inst.matrices)}")
        out = out @ inst.matrices[i - 1]
    return out


def all_invertible(inst: MortalityInstance) -> bool:
    """True when every matrix has nonzero determinant: provably no zero word."""
    return all(m.determinant() != 0 for m in inst.matrices)


def search_zero_word(inst: MortalityInstance) -> tuple[int, ...] | None:
    """Shortest zero word (lexicographically least among shortest), or None.

    None means no zero word exists with length <= max_len; it is the
    "not found" outcome of a semi-decision, not an error.
    """
    if all_invertible(inst):
        return None
    k = len(inst.matrices)
    seen: set[tuple[tuple[int, ...], ...]] | None = {IntegerMatrix.identity(inst.dim).entries}
    frontier: list[tuple[IntegerMatrix, tuple[int, ...]]] = [
        (IntegerMatrix.identity(inst.dim), ())
    ]
    for _ in range(inst.max_len):
        nxt: list[tuple[IntegerMatrix, tuple[int, ...]]] = []
        for mat, word in frontier:
            for i in range(1, k + 1):
                cand = mat @ inst.matrices[i - 1]
                if cand.is_zero():
                    return word + (i,)
                if seen is not None:
                    if cand.entries in seen:
                        continue
                    seen.add(cand.entries)
                    if len(seen) > MEMO_CAP:
                        warnings.warn(
                            "mortality memo cap exceeded; continuing without pruning",
                            RuntimeWarning,
                        )
                        seen = None
                nxt.append((cand, word + (i,)))
        frontier = nxt
        if not frontier:
            break
    return None


def enumerate_zero_word(inst: MortalityInstance) -> tuple[int, ...] | None:
    """Independent oracle: plain enumeration of every word up to max_len."""
    from itertools import product as iproduct

    k = len(inst.matrices)
    for length in range(1, inst.max_len + 1):
        for word in iproduct(range(1, k + 1), repeat=length):
            if product(inst, word).is_zero():
                return word
    return None


def to_physicality_instance(inst: MortalityInstance) -> GateLibrary:
    """Realize the matrices as postselected SVD gadget gates.

    3x3 matrices go through the two-qubit block embedding first; matrices
    already of size 2^d pass to the gadget directly.  Chaining a word then
    contracts to prod(M_i') / prod(||M_i'||_F^2), so a zero word makes the
    working block of the chained network vanish.
    """
    gates = []
    for idx, mat in enumerate(inst.matrices, start=1):
        if mat.is_zero():
            raise ValueError(f"matrix {idx} is zero; its gadget is undefined")
        if mat.rows == 3:
            mat = embed_3x3(mat)
        elif mat.rows & (mat.rows - 1):
            raise ValueError(
                f"matrix {idx} is {mat.rows}x{mat.rows}; need 3x3 or a power of two"
            )
        gates.append(gadget_gate(f"M{idx}", mat))
    return GateLibrary(tuple(gates))
