"""Boolean functions and relations as tensors, and the support map back.

A Boolean tensor has 0/1 entries on binary legs; its support is the set of
index tuples with nonzero entries, read as a relation.  Function encodings
put inputs first (leg 0 most significant) and the output last, so the
entry at ``(x, y)`` is 1 exactly when ``y = f(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .tensor import EXACT, FLOAT_TOL, Tensor


@dataclass(frozen=True)
class BoolFunction:
    """Truth table on {0,1}^arity, indexed lexicographically (x1 msb)."""

    arity: int
    table: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError("negative arity")
        object.__setattr__(self, "table", tuple(int(b) for b in self.table))
        if len(self.table) != 1 << self.arity:
            raise ValueError(f"table length {len(self.table)} != 2^{self.arity}")
        if any(b not in (0, 1) for b in self.table):
            raise ValueError("table entries must be bits")

    @staticmethod
    def from_callable(arity: int, fn) -> "BoolFunction":
        table = [int(fn(*bits)) for bits in product((0, 1), repeat=arity)]
        return BoolFunction(arity, tuple(table))

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise ValueError(f"arity {self.arity} function called with {len(args)} args")
        idx = 0
        for a in args:
            idx = (idx << 1) | (a & 1)
        return self.table[idx]

    def describe(self) -> str:
        return f"f/{self.arity}:" + "".join(str(b) for b in self.table)


@dataclass(frozen=True)
class BoolRelation:
    """A subset of {0,1}^arity."""

    arity: int
    tuples: frozenset[tuple[int, ...]]

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError("negative arity")
        tups = frozenset(tuple(int(b) for b in t) for t in self.tuples)
        object.__setattr__(self, "tuples", tups)
        for t in tups:
            if len(t) != self.arity or any(b not in (0, 1) for b in t):
                raise ValueError(f"bad tuple {t} for arity {self.arity}")

    @staticmethod
    def from_strings(arity: int, rows) -> "BoolRelation":
        return BoolRelation(arity, frozenset(tuple(int(c) for c in r) for r in rows))

    def __len__(self) -> int:
        return len(self.tuples)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuples

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def describe(self) -> str:
        rows = ",".join("".join(map(str, t)) for t in self.sorted_tuples())
        return f"rel/{self.arity}:{{{rows}}}"


def _leg_names(n: int, prefix: str = "x") -> list[tuple[str, int]]:
    return [(f"{prefix}{i}", 2) for i in range(n)]


def encode_function(f: BoolFunction) -> Tensor:
    """The graph-of-f tensor: m input legs then one output leg."""
    legs = _leg_names(f.arity) + [("out", 2)]
    arr = np.zeros((2,) * (f.arity + 1), dtype=object)
    arr[...] = 0
    for i, bits in enumerate(product((0, 1), repeat=f.arity)):
        arr[bits + (f.table[i],)] = 1
    return Tensor(tuple(legs), arr, EXACT)


def encode_relation(r: BoolRelation) -> Tensor:
    """The characteristic tensor of a relation: entry 1 exactly on its tuples."""
    arr = np.zeros((2,) * r.arity, dtype=object)
    arr[...] = 0
    for t in r.tuples:
        arr[t] = 1
    return Tensor(tuple(_leg_names(r.arity)), arr, EXACT)


def support(t: Tensor, tol: float | None = None) -> BoolRelation:
    """Index tuples with nonzero entries, as a relation on binary legs."""
    if any(d != 2 for d in t.dims):
        raise ValueError(f"support needs binary legs, got dims {t.dims}")
    if t.backend == EXACT:
        nz = {idx for idx in np.ndindex(*t.dims) if t.entries[idx] != 0}
    else:
        if tol is None:
            tol = FLOAT_TOL * max(1.0, float(np.max(np.abs(t.entries))) if t.size else 1.0)
        nz = {idx for idx in np.ndindex(*t.dims) if abs(t.entries[idx]) > tol}
    return BoolRelation(len(t.dims), frozenset(nz))


# -- the standard tensor library -------------------------------------------


def _function_tensor(arity, fn, in_names):
    f = BoolFunction.from_callable(arity, fn)
    t = encode_function(f)
    mapping = {f"x{i}": nm for i, nm in enumerate(in_names)}
    return t.relabel(mapping)


def standard_tensor(name: str) -> Tensor:
    """Named exact tensors used throughout: gates, relations and (co)states.

    AND/OR/XOR are 2-in-1-out function tensors (legs in0, in1, out); NOT is
    1-in-1-out (out, in); COPY3 is the 3-leg all-equal relation; SWAP and
    CNOT are 2-qubit gates with legs (out0, out1, in0, in1); BELL is the
    unnormalized |00>+|11>, BELL_COSTATE its dual; ZERO_BRA, ONE_BRA and
    PLUS are the vectors (1,0), (0,1) and (1,1).
    """
    key = name.upper()
    if key == "AND":
        return _function_tensor(2, lambda a, b: a & b, ["in0", "in1"])
    if key == "OR":
        return _function_tensor(2, lambda a, b: a | b, ["in0", "in1"])
    if key == "XOR":
        return _function_tensor(2, lambda a, b: a ^ b, ["in0", "in1"])
    if key == "NOT":
        # legs (out, in): entry [o, i] = 1 iff o = 1 - i
        return Tensor.from_flat([("out", 2), ("in", 2)], [0, 1, 1, 0])
    if key == "COPY3":
        return encode_relation(BoolRelation(3, frozenset({(0, 0, 0), (1, 1, 1)}))).relabel(
            {"x0": "a", "x1": "b", "x2": "c"}
        )
    if key == "SWAP":
        rows = [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]
        flat = [x for row in rows for x in row]
        return Tensor.from_flat(
            [("out0", 2), ("out1", 2), ("in0", 2), ("in1", 2)], flat
        )
    if key == "CNOT":
        # control = qubit 0 (most significant), target = qubit 1
        rows = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
        flat = [x for row in rows for x in row]
        return Tensor.from_flat(
            [("out0", 2), ("out1", 2), ("in0", 2), ("in1", 2)], flat
        )
    if key == "BELL":
        return Tensor.from_flat([("a", 2), ("b", 2)], [1, 0, 0, 1])
    if key == "BELL_COSTATE":
        return Tensor.from_flat([("a", 2), ("b", 2)], [1, 0, 0, 1])
    if key == "ZERO_BRA":
        return Tensor.from_flat([("in", 2)], [1, 0])
    if key == "ONE_BRA":
        return Tensor.from_flat([("in", 2)], [0, 1])
    if key == "PLUS":
        return Tensor.from_flat([("leg", 2)], [1, 1])
    raise KeyError(f"unknown standard tensor {name!r}")


STANDARD_NAMES = (
    "AND", "OR", "XOR", "NOT", "COPY3", "SWAP", "CNOT",
    "BELL", "BELL_COSTATE", "ZERO_BRA", "ONE_BRA", "PLUS",
)

#: The paper's 3-leg OR relation {0,1}^3 minus {111}; the DIMACS clause
#: relation {0,1}^k minus the all-zero point is or_clause_relation(k).
OR_WITHOUT_111 = BoolRelation(3, frozenset(
    t for t in product((0, 1), repeat=3) if t != (1, 1, 1)
))


def or_clause_relation(k: int) -> BoolRelation:
    """{0,1}^k minus the all-false point: the k-literal clause relation."""
    return BoolRelation(k, frozenset(t for t in product((0, 1), repeat=k) if any(t)))


def all_equal_relation(n: int = 3) -> BoolRelation:
    return BoolRelation(n, frozenset({(0,) * n, (1,) * n}))


# -- relation / function files ----------------------------------------------


def parse_relation(text: str) -> BoolRelation:
    """``rel n`` header, then one n-bit string per line."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if not lines or not lines[0][1].startswith("rel"):
        raise ValueError("relation file must start with 'rel n'")
    head = lines[0][1].split()
    if len(head) != 2:
        raise ValueError(f"line {lines[0][0]}: bad header {lines[0][1]!r}")
    n = int(head[1])
    rows = []
    for lineno, ln in lines[1:]:
        if len(ln) != n or any(c not in "01" for c in ln):
            raise ValueError(f"line {lineno}: expected {n}-bit string, got {ln!r}")
        rows.append(ln)
    return BoolRelation.from_strings(n, rows)


def format_relation(r: BoolRelation) -> str:
    rows = ["".join(map(str, t)) for t in r.sorted_tuples()]
    return "\n".join([f"rel {r.arity}"] + rows) + "\n"


def parse_function(text: str) -> BoolFunction:
    """``fun m`` header, then a 2^m-character bit string."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if not lines or not lines[0][1].startswith("fun"):
        raise ValueError("function file must start with 'fun m'")
    head = lines[0][1].split()
    if len(head) != 2:
        raise ValueError(f"line {lines[0][0]}: bad header {lines[0][1]!r}")
    m = int(head[1])
    bits = "".join(ln for _, ln in lines[1:])
    if len(bits) != 1 << m or any(c not in "01" for c in bits):
        raise ValueError(f"expected a {1 << m}-bit table, got {bits!r}")
    return BoolFunction(m, tuple(int(c) for c in bits))


def format_function(f: BoolFunction) -> str:
    return f"fun {f.arity}\n" + "".join(str(b) for b in f.table) + "\n"
