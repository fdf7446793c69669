"""Physicality checking: a network is physical iff its norm does not vanish.

The two paradox fixtures are frozen as TNF files under ``tnl/data`` so the
wire routing is auditable; both reproduce their published contraction values
(scalar 0, and the Bell state on two open legs).  Gate libraries chain
operators in sequence, one optional postselection per gate, and physicality
of a chained word is judged on the fully postselected network's norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .network import TensorNetwork, contract_network, network, node_norm_scale, norm_squared
from .tensor import EXACT, FLOAT, FLOAT_TOL, Tensor
from .tnf import parse_tnf

Port = tuple[str, str]


def is_physical(net: TensorNetwork) -> tuple[bool, object]:
    """(norm_squared != 0, norm_squared).

    The float backend calls the value zero when it is below 1e-9 times the
    product of the doubled network's node Frobenius norms.
    """
    ns = norm_squared(net)
    if net.backend == EXACT:
        return ns != 0, ns
    threshold = FLOAT_TOL * node_norm_scale(net) ** 2
    return ns > threshold, ns


def _load_fixture(name: str) -> TensorNetwork:
    text = resources.files("tnl").joinpath("data").joinpath(name).read_text(encoding="utf-8")
    return parse_tnf(text)


def grandfather_network(loop_gate: str = "X") -> TensorNetwork:
    """The closed feedback-loop fixture; contracts to exactly 0.

    ``loop_gate="I"`` removes the bit-flip contradiction, which makes the
    contraction a nonzero scalar instead.
    """
    net = _load_fixture("grandfather.tnf")
    if loop_gate == "X":
        return net
    if loop_gate == "I":
        ident = Tensor.from_flat([("out", 2), ("in", 2)], [1, 0, 0, 1])
        nodes = dict(net.nodes)
        nodes["sx"] = ident.relabel({"out": "lx", "in": "la"})
        return TensorNetwork(nodes, net.bonds, net.open_legs)
    raise ValueError(f"loop_gate must be 'X' or 'I', got {loop_gate!r}")


def unproved_theorem_network() -> TensorNetwork:
    """The open-loop fixture; contracts to (1,0,0,1) on two open legs."""
    return _load_fixture("unproved_theorem.tnf")


# -- gate libraries ----------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    """An operator on d qubits given as a network with input/output ports.

    A plain matrix is a single-node network; a postselected gadget keeps its
    internal preparation and measurement nodes.
    """

    name: str
    net: TensorNetwork
    inputs: tuple[Port, ...]
    outputs: tuple[Port, ...]
    postselected: bool = False

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple((n, l) for n, l in self.inputs))
        object.__setattr__(self, "outputs", tuple((n, l) for n, l in self.outputs))
        if len(self.inputs) != len(self.outputs):
            raise ValueError("gate needs equal input and output leg groups")
        declared = set(self.net.open_legs)
        for p in (*self.inputs, *self.outputs):
            if p not in declared:
                raise ValueError(f"gate port {p} is not an open leg of its network")

    @property
    def qubits(self) -> int:
        return len(self.inputs)

    def matrix(self) -> np.ndarray:
        """Contract to a 2^d x 2^d matrix (rows = outputs)."""
        t = contract_network(self.net)
        want_ports = list(self.outputs) + list(self.inputs)
        order = _port_labels(self.net, t, want_ports)
        t = t.transpose(order)
        n = 1 << self.qubits
        return t.entries.reshape(n, n)


def _port_labels(net: TensorNetwork, contracted: Tensor, ports: list[Port]) -> list[str]:
    """Map (node, leg) open ports to the contracted tensor's leg labels."""
    bare = [lab for _, lab in net.open_legs]
    labels = []
    for nid, lab in ports:
        labels.append(lab if bare.count(lab) == 1 else f"{nid}.{lab}")
    missing = set(labels) - set(contracted.labels)
    if missing:
        raise AssertionError(f"ports {missing} not found on contracted tensor")
    return labels


def matrix_gate(name: str, entries, backend: str = FLOAT, postselected: bool = False) -> Gate:
    """Wrap a 2^d x 2^d matrix as a single-node gate."""
    arr = np.asarray(entries, dtype=np.complex128 if backend == FLOAT else object)
    n = arr.shape[0]
    if arr.shape != (n, n) or n < 2 or (n & (n - 1)):
        raise ValueError(f"need a square power-of-two matrix, got shape {arr.shape}")
    d = n.bit_length() - 1
    legs = [(f"out{i}", 2) for i in range(d)] + [(f"in{i}", 2) for i in range(d)]
    t = Tensor(tuple(legs), arr.reshape((2,) * (2 * d)), backend)
    nid = name
    net = network({nid: t}, [], [(nid, lab) for lab, _ in legs])
    return Gate(
        name,
        net,
        inputs=tuple((nid, f"in{i}") for i in range(d)),
        outputs=tuple((nid, f"out{i}") for i in range(d)),
        postselected=postselected,
    )


@dataclass(frozen=True)
class GateLibrary:
    gates: tuple[Gate, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not self.gates:
            raise ValueError("library needs at least one gate")
        d = {g.qubits for g in self.gates}
        if len(d) != 1:
            raise ValueError(f"gates act on different qubit counts {sorted(d)}")
        backends = {g.net.backend for g in self.gates}
        if len(backends) != 1:
            raise ValueError("gates mix scalar backends")

    @property
    def qubits(self) -> int:
        return self.gates[0].qubits

    def gate(self, index: int) -> Gate:
        """1-based lookup, matching word notation."""
        if not 1 <= index <= len(self.gates):
            raise IndexError(f"gate index {index} out of range 1..{len(self.gates)}")
        return self.gates[index - 1]


def chain_word(lib: GateLibrary, word) -> TensorNetwork:
    """The network of the operator product M_w1 M_w2 ... M_wk.

    Word order is product order: the first index is the outermost (last
    applied) operator.  Gates keep their internal postselections.  The
    result's open legs are the final outputs then the initial inputs.
    """
    word = tuple(int(i) for i in word)
    if not word:
        raise ValueError("empty word")
    gates = [lib.gate(i) for i in word]

    nodes: dict[str, Tensor] = {}
    bonds = []
    opens = []
    port_of: list[dict[str, Port]] = []
    for k, g in enumerate(gates):
        prefix = f"g{k}|"
        for nid, t in g.net.nodes.items():
            nodes[prefix + nid] = t
        for (a, la), (b, lb) in g.net.bond_list():
            bonds.append(((prefix + a, la), (prefix + b, lb)))
        port_of.append({})
    # Chain: gate k's inputs consume gate k+1's outputs (rightmost applies first).
    for k in range(len(gates) - 1):
        upper, lower = gates[k], gates[k + 1]
        for (ni, li), (no, lo) in zip(upper.inputs, lower.outputs):
            bonds.append(((f"g{k}|{ni}", li), (f"g{k + 1}|{no}", lo)))
    top, bottom = gates[0], gates[-1]
    opens = [(f"g0|{n}", l) for n, l in top.outputs]
    opens += [(f"g{len(gates) - 1}|{n}", l) for n, l in bottom.inputs]
    return network(nodes, bonds, opens)


def chain_matrix(lib: GateLibrary, word) -> np.ndarray:
    """Contract a chained word to its 2^d x 2^d matrix."""
    net = chain_word(lib, word)
    t = contract_network(net)
    n = 1 << lib.qubits
    return t.entries.reshape(n, n)


def is_unitary(gate: Gate, tol: float = FLOAT_TOL) -> bool:
    m = gate.matrix()
    n = m.shape[0]
    if gate.net.backend == EXACT:
        prod = np.dot(m.T, m)  # exact backend is real
        return all(prod[i, j] == (1 if i == j else 0) for i in range(n) for j in range(n))
    prod = np.dot(np.conj(m.T), m)
    return bool(np.all(np.abs(prod - np.eye(n)) <= tol * max(1.0, float(np.abs(m).max())) * n))


def word_problem_unitary(lib: GateLibrary, w1, w2) -> bool:
    """Do two words over a unitary-only library multiply to the same matrix?

    Every gate must pass the unitarity check and carry no postselection;
    the empty word is the identity.
    """
    for g in lib.gates:
        if g.postselected:
            raise ValueError(f"gate {g.name!r} carries a postselection")
        if not is_unitary(g):
            raise ValueError(f"gate {g.name!r} is not unitary")
    n = 1 << lib.qubits
    backend = lib.gates[0].net.backend

    def product(word):
        if backend == EXACT:
            out = np.zeros((n, n), dtype=object)
            for i in range(n):
                out[i, i] = 1
        else:
            out = np.eye(n, dtype=np.complex128)
        for i in word:
            out = np.dot(out, lib.gate(int(i)).matrix())
        return out

    p1, p2 = product(w1), product(w2)
    if backend == EXACT:
        return all(p1[i, j] == p2[i, j] for i in range(n) for j in range(n))
    scale = max(1.0, float(np.abs(p1).max()), float(np.abs(p2).max()))
    return bool(np.all(np.abs(p1 - p2) <= FLOAT_TOL * scale))
