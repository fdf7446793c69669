"""Dense tensors over two scalar backends.

The exact backend stores rational numbers (``int`` or ``fractions.Fraction``,
always real) in a numpy object array; zero tests are exact equality.  The
float backend stores ``complex128``; zero tests are tolerance-scaled.  The
two backends are never mixed inside one contraction: mixing raises instead
of coercing, because an exact zero and a small float mean different things
here.

Entry layout is row major with leg 0 most significant, so a tensor on
binary legs indexed by ``(x1, x2, ...)`` reads like the ket string
``|x1 x2 ...>``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

EXACT = "exact"
FLOAT = "float"

#: Relative zero tolerance on the float backend.
FLOAT_TOL = 1e-9

_DEFAULT_MAX_ENTRIES = 1 << 24


class BackendMismatch(TypeError):
    """Raised when exact and float tensors meet in one operation."""


def max_entries() -> int:
    """Dense-tensor size cap; override with the TNL_MAX_ENTRIES env var."""
    raw = os.environ.get("TNL_MAX_ENTRIES")
    if raw is None:
        return _DEFAULT_MAX_ENTRIES
    return int(raw)


def _check_exact(value) -> object:
    if isinstance(value, bool) or not isinstance(value, Rational):
        raise TypeError(f"exact backend holds rationals, got {value!r}")
    return value


def as_scalar(value, backend: str):
    """Coerce a number literal into the given backend's scalar type."""
    if backend == EXACT:
        if isinstance(value, Fraction) or isinstance(value, int):
            return _check_exact(value)
        if isinstance(value, str):
            return Fraction(value)
        raise TypeError(f"cannot put {value!r} on the exact backend")
    if backend == FLOAT:
        return complex(value)
    raise ValueError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class Tensor:
    """Dense multiway array with named legs.

    legs: ordered ``(label, dim)`` pairs, labels distinct within the tensor.
    entries: numpy array of shape ``tuple(dim for _, dim in legs)``;
        dtype object (rationals) on the exact backend, complex128 on float.
    """

    legs: tuple[tuple[str, int], ...]
    entries: np.ndarray = field(repr=False)
    backend: str = EXACT

    def __post_init__(self):
        labels = [lab for lab, _ in self.legs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate leg labels in {labels}")
        dims = tuple(d for _, d in self.legs)
        if any(d <= 0 for d in dims):
            raise ValueError(f"leg dimensions must be positive: {dims}")
        size = 1
        for d in dims:
            size *= d
        if size > max_entries():
            raise ValueError(f"tensor with {size} entries exceeds cap {max_entries()}")
        if self.entries.shape != dims:
            raise ValueError(f"entry shape {self.entries.shape} != leg dims {dims}")
        if self.backend == EXACT:
            if self.entries.dtype != object:
                raise TypeError("exact backend requires an object-dtype array")
        elif self.backend == FLOAT:
            if self.entries.dtype != np.complex128:
                raise TypeError("float backend requires complex128 entries")
        else:
            raise ValueError(f"unknown backend {self.backend!r}")
        self.entries.flags.writeable = False

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_flat(legs: Sequence[tuple[str, int]], values: Iterable, backend: str = EXACT) -> "Tensor":
        """Build from a flat row-major value list (leg 0 most significant)."""
        legs = tuple((str(lab), int(d)) for lab, d in legs)
        dims = tuple(d for _, d in legs)
        vals = [as_scalar(v, backend) for v in values]
        size = 1
        for d in dims:
            size *= d
        if len(vals) != size:
            raise ValueError(f"{len(vals)} values for shape {dims}")
        if backend == EXACT:
            arr = np.empty(size, dtype=object)
            for i, v in enumerate(vals):
                arr[i] = v
        else:
            arr = np.array(vals, dtype=np.complex128)
        return Tensor(legs, arr.reshape(dims) if dims else arr.reshape(()), backend)

    @staticmethod
    def zeros(legs: Sequence[tuple[str, int]], backend: str = EXACT) -> "Tensor":
        legs = tuple((str(lab), int(d)) for lab, d in legs)
        dims = tuple(d for _, d in legs)
        if backend == EXACT:
            arr = np.zeros(dims, dtype=object)
            arr[...] = 0
        else:
            arr = np.zeros(dims, dtype=np.complex128)
        return Tensor(legs, arr, backend)

    @staticmethod
    def scalar(value, backend: str = EXACT) -> "Tensor":
        return Tensor.from_flat((), [value], backend)

    # -- basic views -------------------------------------------------------

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.legs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.legs)

    @property
    def size(self) -> int:
        n = 1
        for d in self.dims:
            n *= d
        return n

    def dim(self, label: str) -> int:
        for lab, d in self.legs:
            if lab == label:
                return d
        raise KeyError(label)

    def axis(self, label: str) -> int:
        for i, (lab, _) in enumerate(self.legs):
            if lab == label:
                return i
        raise KeyError(label)

    def item(self):
        """The scalar value of a 0-leg tensor."""
        if self.legs:
            raise ValueError("item() on a tensor with open legs")
        return self.entries[()]

    def __getitem__(self, idx):
        return self.entries[idx]

    def relabel(self, mapping: dict[str, str]) -> "Tensor":
        legs = tuple((mapping.get(lab, lab), d) for lab, d in self.legs)
        return Tensor(legs, self.entries, self.backend)

    def transpose(self, order: Sequence[str]) -> "Tensor":
        """Reorder legs to the given label order."""
        if set(order) != set(self.labels) or len(order) != len(self.legs):
            raise ValueError(f"transpose order {order} != legs {self.labels}")
        perm = [self.axis(lab) for lab in order]
        legs = tuple(self.legs[p] for p in perm)
        return Tensor(legs, np.transpose(self.entries, perm), self.backend)

    def to_float(self) -> "Tensor":
        """Copy onto the float backend (exact -> float is the allowed direction)."""
        if self.backend == FLOAT:
            return self
        return Tensor(self.legs, self.entries.astype(np.complex128), FLOAT)

    # -- numerics ----------------------------------------------------------

    def frobenius_norm(self) -> float:
        if self.backend == EXACT:
            total = sum((abs(v) ** 2 for v in self.entries.flat), start=Fraction(0))
            return float(total) ** 0.5
        return float(np.sqrt(np.sum(np.abs(self.entries) ** 2)))

    def is_zero(self, tol: float | None = None) -> bool:
        """Entrywise zero test: exact equality, or scaled tolerance on floats."""
        if self.backend == EXACT:
            return all(v == 0 for v in self.entries.flat)
        if tol is None:
            tol = FLOAT_TOL
        return bool(np.all(np.abs(self.entries) <= tol))

    def equals(self, other: "Tensor", tol: float | None = None) -> bool:
        """Entrywise equality after matching leg labels (order-insensitive)."""
        if self.backend != other.backend:
            return False
        if set(self.labels) != set(other.labels) or len(self.legs) != len(other.legs):
            return False
        o = other.transpose(self.labels)
        if self.dims != o.dims:
            return False
        if self.backend == EXACT:
            return all(a == b for a, b in zip(self.entries.flat, o.entries.flat))
        if tol is None:
            tol = FLOAT_TOL * max(1.0, self.frobenius_norm(), o.frobenius_norm())
        return bool(np.all(np.abs(self.entries - o.entries) <= tol))


def _require_same_backend(a: Tensor, b: Tensor) -> str:
    if a.backend != b.backend:
        raise BackendMismatch(f"cannot mix backends {a.backend!r} and {b.backend!r}")
    return a.backend


def tensor_product(a: Tensor, b: Tensor) -> Tensor:
    """Outer product; legs are a's legs followed by b's.

    Colliding labels are disambiguated by prefixing every leg of the two
    operands with ``a:`` and ``b:`` respectively.
    """
    backend = _require_same_backend(a, b)
    if set(a.labels) & set(b.labels):
        a = a.relabel({lab: f"a:{lab}" for lab in a.labels})
        b = b.relabel({lab: f"b:{lab}" for lab in b.labels})
    entries = np.tensordot(a.entries, b.entries, axes=0)
    return Tensor(a.legs + b.legs, entries, backend)


def conjugate(t: Tensor) -> Tensor:
    """Entrywise complex conjugate; the exact (real) backend is unchanged."""
    if t.backend == EXACT:
        return t
    return Tensor(t.legs, np.conj(t.entries), FLOAT)


def contract_tensors(a: Tensor, b: Tensor, pairs: Sequence[tuple[str, str]]) -> Tensor:
    """Sum over the given (a-label, b-label) leg pairs of two tensors.

    With no pairs this degenerates to the tensor product.  Result legs are
    a's remaining legs then b's remaining legs; a label collision among the
    survivors is resolved by ``a:``/``b:`` prefixes on the colliding names.
    """
    backend = _require_same_backend(a, b)
    ax_a = [a.axis(la) for la, _ in pairs]
    ax_b = [b.axis(lb) for _, lb in pairs]
    for (la, lb), ia, ib in zip(pairs, ax_a, ax_b):
        if a.legs[ia][1] != b.legs[ib][1]:
            raise ValueError(f"bond dimension mismatch {la}({a.legs[ia][1]}) vs {lb}({b.legs[ib][1]})")
    rest_a = [leg for i, leg in enumerate(a.legs) if i not in set(ax_a)]
    rest_b = [leg for i, leg in enumerate(b.legs) if i not in set(ax_b)]
    names_a = {lab for lab, _ in rest_a}
    out_legs = list(rest_a)
    for lab, d in rest_b:
        out_legs.append((f"b:{lab}" if lab in names_a else lab, d))
    entries = np.tensordot(a.entries, b.entries, axes=(ax_a, ax_b))
    return Tensor(tuple(out_legs), entries, backend)
