"""Postselected-SVD gadgets: any integer matrix as unitaries plus one measurement.

An n x n integer matrix M with SVD U S V^T becomes, on m = ceil(log2 n)
qubits, the network  U . copy . V^T  where the copy tensor's branch wire is
postselected on Psi = (1/||M||_F^2) (sigma_1, sigma_2, ...).  Contracting
the network yields M / ||M||_F^2.  The copy tensor itself is assembled from
m CNOT gates with |0> targets and m(m-1)/2 SWAP gates that regroup the
interleaved wires.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import TensorNetwork, contract_network, network
from .physicality import Gate
from .tensor import FLOAT, Tensor


@dataclass(frozen=True)
class IntegerMatrix:
    """Dense exact integer matrix."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("matrix dimensions must be positive")
        ent = tuple(tuple(int(x) for x in row) for row in self.entries)
        object.__setattr__(self, "entries", ent)
        if len(ent) != self.rows or any(len(r) != self.cols for r in ent):
            raise ValueError(f"entries do not fill {self.rows}x{self.cols}")

    @staticmethod
    def from_rows(rows) -> "IntegerMatrix":
        rows = [list(r) for r in rows]
        return IntegerMatrix(len(rows), len(rows[0]) if rows else 0, tuple(map(tuple, rows)))

    @staticmethod
    def identity(n: int) -> "IntegerMatrix":
        return IntegerMatrix.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise ValueError(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        out = [
            [
                sum(self.entries[i][k] * other.entries[k][j] for k in range(self.cols))
                for j in range(other.cols)
            ]
            for i in range(self.rows)
        ]
        return IntegerMatrix.from_rows(out)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def frobenius_sq(self) -> int:
        return sum(x * x for row in self.entries for x in row)

    def determinant(self) -> int:
        """Exact integer determinant by fraction-free Gaussian elimination."""
        if not self.is_square():
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        a = [list(row) for row in self.entries]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def block(self, r: int, c: int) -> "IntegerMatrix":
        return IntegerMatrix.from_rows([row[:c] for row in self.entries[:r]])

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.float64)


@dataclass(frozen=True)
class GateGadget:
    """SVD decomposition of an integer matrix into a postselected circuit.

    u, vt: unitary tensors on 2m legs (outputs then inputs, float backend).
    psi: the branch measurement, sigma / ||M||_F^2 padded to length 2^m.
    """

    u: Tensor
    vt: Tensor
    psi: np.ndarray
    m: int
    frobenius_sq: int

    @property
    def dim(self) -> int:
        return 1 << self.m


def _matrix_tensor(arr: np.ndarray, m: int, prefix: str) -> Tensor:
    legs = [(f"{prefix}o{i}", 2) for i in range(m)] + [(f"{prefix}i{i}", 2) for i in range(m)]
    return Tensor(tuple(legs), np.asarray(arr, dtype=np.complex128).reshape((2,) * (2 * m)), FLOAT)


def svd_embed(mat: IntegerMatrix) -> GateGadget:
    """Lemma-style gadget for a square nonzero integer matrix.

    The matrix is zero-padded into the enclosing qubit space, decomposed by
    double-precision SVD, and made deterministic by sorting singular values
    nonincreasing (ties and signs fixed so each left singular vector's first
    nonzero component is positive).
    """
    if not mat.is_square():
        raise ValueError("svd_embed needs a square matrix")
    if mat.is_zero():
        raise ValueError("zero matrix has no gadget (Frobenius norm vanishes)")
    n = mat.rows
    m = max(1, (n - 1).bit_length())
    dim = 1 << m
    a = np.zeros((dim, dim), dtype=np.float64)
    a[:n, :n] = mat.to_array()
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    # Deterministic signs: first nonzero component of each left singular
    # vector positive; V^T rows flip in tandem so the product is unchanged.
    for j in range(dim):
        col = u[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            u[:, j] = -col
            vt[j, :] = -vt[j, :]
    fro2 = mat.frobenius_sq()
    psi = s / fro2
    return GateGadget(
        u=_matrix_tensor(u, m, "u"),
        vt=_matrix_tensor(vt, m, "v"),
        psi=psi,
        m=m,
        frobenius_sq=fro2,
    )


def _cnot_tensor() -> Tensor:
    rows = np.zeros((4, 4), dtype=np.complex128)
    for c, t in ((0, 0), (0, 1), (1, 0), (1, 1)):
        rows[(c << 1) | (t ^ c), (c << 1) | t] = 1.0
    return Tensor(
        (("co", 2), ("to", 2), ("ci", 2), ("ti", 2)), rows.reshape(2, 2, 2, 2), FLOAT
    )


def _swap_tensor() -> Tensor:
    rows = np.zeros((4, 4), dtype=np.complex128)
    for a, b in ((0, 0), (0, 1), (1, 0), (1, 1)):
        rows[(b << 1) | a, (a << 1) | b] = 1.0
    return Tensor(
        (("ao", 2), ("bo", 2), ("ai", 2), ("bi", 2)), rows.reshape(2, 2, 2, 2), FLOAT
    )


def gadget_network(g: GateGadget, prefix: str = "") -> tuple[TensorNetwork, tuple, tuple]:
    """Assemble the gadget's network; returns (net, input ports, output ports).

    Wiring, bottom to top: V^T, then per qubit a CNOT with a |0> target
    making the copy branch, then the m(m-1)/2 SWAPs that regroup the
    interleaved (main, branch) wires, then the branch group postselected on
    Psi and the main group fed into U.
    """
    m = g.m
    p = prefix
    nodes: dict[str, Tensor] = {p + "vt": g.vt, p + "u": g.u}
    bonds = []

    wires: list[tuple[str, tuple[str, str]]] = []  # (kind, port) in interleaved order
    for i in range(m):
        zid, cid = f"{p}zero{i}", f"{p}cnot{i}"
        nodes[zid] = Tensor((("z", 2),), np.array([1, 0], dtype=np.complex128), FLOAT)
        nodes[cid] = _cnot_tensor()
        bonds.append(((cid, "ci"), (p + "vt", f"vo{i}")))
        bonds.append(((cid, "ti"), (zid, "z")))
        wires.append(("main", (cid, "co")))
        wires.append(("branch", (cid, "to")))

    # Bubble the branch wires right with explicit SWAP gates.
    swaps = 0
    changed = True
    while changed:
        changed = False
        for k in range(len(wires) - 1):
            if wires[k][0] == "branch" and wires[k + 1][0] == "main":
                sid = f"{p}swap{swaps}"
                swaps += 1
                nodes[sid] = _swap_tensor()
                bonds.append(((sid, "ai"), wires[k][1]))
                bonds.append(((sid, "bi"), wires[k + 1][1]))
                wires[k] = ("main", (sid, "ao"))
                wires[k + 1] = ("branch", (sid, "bo"))
                changed = True
    assert swaps == m * (m - 1) // 2
    mains = [port for kind, port in wires if kind == "main"]
    branches = [port for kind, port in wires if kind == "branch"]

    pid = p + "psi"
    nodes[pid] = Tensor(
        tuple((f"b{i}", 2) for i in range(m)),
        np.asarray(g.psi, dtype=np.complex128).reshape((2,) * m),
        FLOAT,
    )
    for i, port in enumerate(branches):
        bonds.append(((pid, f"b{i}"), port))
    for i, port in enumerate(mains):
        bonds.append(((p + "u", f"ui{i}"), port))

    inputs = tuple((p + "vt", f"vi{i}") for i in range(m))
    outputs = tuple((p + "u", f"uo{i}") for i in range(m))
    net = network(nodes, bonds, outputs + inputs)
    return net, inputs, outputs


def gadget_contract(g: GateGadget) -> np.ndarray:
    """Contract the assembled gadget network to its 2^m x 2^m matrix."""
    net, _, _ = gadget_network(g)
    t = contract_network(net)
    return t.entries.reshape(g.dim, g.dim)


def gadget_gate(name: str, mat: IntegerMatrix) -> Gate:
    """The gadget as a chainable postselected gate."""
    g = svd_embed(mat)
    net, inputs, outputs = gadget_network(g, prefix=f"{name}/")
    return Gate(name, net, inputs=inputs, outputs=outputs, postselected=True)


def embed_3x3(mat: IntegerMatrix) -> IntegerMatrix:
    """Place a 3x3 matrix in the two-qubit block pattern with a 1 at (3,3).

    Rows and columns {0,1,2} of the input occupy basis states {00,01,10};
    the |11> diagonal entry is 1 and its off-diagonal entries are 0.
    """
    if (mat.rows, mat.cols) != (3, 3):
        raise ValueError("embed_3x3 expects a 3x3 matrix")
    e = mat.entries
    return IntegerMatrix.from_rows(
        [
            [e[0][0], e[0][1], e[0][2], 0],
            [e[1][0], e[1][1], e[1][2], 0],
            [e[2][0], e[2][1], e[2][2], 0],
            [0, 0, 0, 1],
        ]
    )


def block_product_check(mats, word) -> bool:
    """Is the top-left 3x3 block of prod(embed_3x3(M_i)) equal to prod(M_i)?"""
    mats = list(mats)
    big = IntegerMatrix.identity(4)
    small = IntegerMatrix.identity(3)
    for i in word:
        mat = mats[int(i) - 1]
        big = big @ embed_3x3(mat)
        small = small @ mat
    return big.block(3, 3).entries == small.entries


# -- matrix files -------------------------------------------------------------


def parse_matrix(text: str) -> IntegerMatrix:
    """``mat R C`` header then R rows of C integers."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if not lines or not lines[0][1].startswith("mat"):
        raise ValueError("matrix file must start with 'mat R C'")
    head = lines[0][1].split()
    if len(head) != 3:
        raise ValueError(f"line {lines[0][0]}: bad header {lines[0][1]!r}")
    r, c = int(head[1]), int(head[2])
    rows = []
    for lineno, ln in lines[1:]:
        try:
            row = [int(tok) for tok in ln.split()]
        except ValueError:
            raise ValueError(f"line {lineno}: bad integer row {ln!r}") from None
        if len(row) != c:
            raise ValueError(f"line {lineno}: expected {c} integers, got {len(row)}")
        rows.append(row)
    if len(rows) != r:
        raise ValueError(f"expected {r} rows, got {len(rows)}")
    return IntegerMatrix.from_rows(rows)


def format_matrix(mat: IntegerMatrix) -> str:
    body = "\n".join(" ".join(str(x) for x in row) for row in mat.entries)
    return f"mat {mat.rows} {mat.cols}\n{body}\n"
