"""CNF formulas as tensor networks: model counting by contraction.

A formula f over n variables becomes a network whose contraction over all
non-open legs is the state sum_x f(x)|x>.  Its squared two-norm is then the
number of satisfying assignments, which is how ``count_models`` is defined;
the implementation contracts along a variable-elimination order instead of
materializing the 2^n state, and stays exact throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boolean import BoolFunction, encode_function, support
from .network import TensorNetwork, contract_network, network
from .tensor import EXACT, Tensor

DEFAULT_VAR_BOUND = 24


class DimacsError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class CNF:
    """Clauses as tuples of nonzero signed variable indices (1-based)."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be positive")
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for c in self.clauses:
            if not c:
                raise ValueError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")
            if len({abs(l) for l in c}) != len(set(c)):
                raise ValueError(f"clause {c} contains a variable and its negation")


def parse_dimacs(text: str) -> CNF:
    """Parse DIMACS CNF: ``c`` comments, ``p cnf V C`` header, 0-terminated clauses."""
    num_vars = num_clauses = None
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []
    pending_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if num_vars < 1 or num_clauses < 0:
                raise DimacsError(f"bad header counts {line!r}", lineno)
            continue
        if num_vars is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        try:
            lits = [int(tok) for tok in line.split()]
        except ValueError:
            raise DimacsError(f"bad literal in {line!r}", lineno) from None
        for lit in lits:
            if lit == 0:
                if not pending:
                    raise DimacsError("empty clause", lineno)
                if any(-l in pending for l in pending):
                    raise DimacsError(f"clause {pending} has complementary literals", pending_line)
                dedup = tuple(dict.fromkeys(pending))
                clauses.append(dedup)
                pending = []
            else:
                if abs(lit) > num_vars:
                    raise DimacsError(f"literal {lit} out of range 1..{num_vars}", lineno)
                if not pending:
                    pending_line = lineno
                pending.append(lit)
    if pending:
        raise DimacsError(f"unterminated clause {pending}", pending_line)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if num_clauses != len(clauses):
        raise DimacsError(f"header promises {num_clauses} clauses, found {len(clauses)}")
    return CNF(num_vars, tuple(clauses))


def _or_function(k: int) -> BoolFunction:
    return BoolFunction.from_callable(k, lambda *bits: int(any(bits)))


_AND = BoolFunction(2, (0, 0, 0, 1))


def _copy_arr() -> np.ndarray:
    arr = np.zeros((2, 2, 2), dtype=object)
    arr[...] = 0
    arr[0, 0, 0] = 1
    arr[1, 1, 1] = 1
    return arr


def _not_arr() -> np.ndarray:
    arr = np.zeros((2, 2), dtype=object)
    arr[...] = 0
    arr[0, 1] = 1
    arr[1, 0] = 1
    return arr


def build_sat_network(cnf: CNF) -> TensorNetwork:
    """The formula's network, one open leg per variable.

    Each variable fans out through a left-deep chain of copy tensors to its
    occurrences; each clause is the k-ary OR function tensor with NOT
    tensors on negated literals; clause outputs feed a left-deep AND tree
    whose root is postselected on <1|.  Contracting every non-open leg
    yields sum_x f(x)|x>.
    """
    nodes: dict[str, Tensor] = {}
    bonds: list[tuple[tuple[str, str], tuple[str, str]]] = []
    open_of: dict[int, tuple[str, str]] = {}

    # Clause nodes first: record, per variable, the input ports to feed.
    var_ports: dict[int, list[tuple[str, str]]] = {v: [] for v in range(1, cnf.num_vars + 1)}
    for ci, clause in enumerate(cnf.clauses):
        cid = f"c{ci}"
        nodes[cid] = encode_function(_or_function(len(clause)))
        for pos, lit in enumerate(clause):
            port = (cid, f"x{pos}")
            if lit < 0:
                nid = f"c{ci}n{pos}"
                nodes[nid] = Tensor((("out", 2), ("in", 2)), _not_arr(), EXACT)
                bonds.append(((nid, "out"), port))
                port = (nid, "in")
            var_ports[abs(lit)].append(port)

    # Variable fanout chains (left-deep).
    for v in range(1, cnf.num_vars + 1):
        ports = var_ports[v]
        if not ports:
            # Unconstrained variable: the unnormalized plus state sum_x |x>.
            nid = f"v{v}free"
            nodes[nid] = Tensor.from_flat([("x", 2)], [1, 1])
            open_of[v] = (nid, "x")
            continue
        if len(ports) == 1:
            open_of[v] = ports[0]
            continue
        prev: tuple[str, str] | None = None
        for j in range(len(ports) - 1):
            nid = f"v{v}copy{j}"
            nodes[nid] = Tensor((("a", 2), ("b", 2), ("c", 2)), _copy_arr(), EXACT)
            if prev is None:
                open_of[v] = (nid, "a")
            else:
                bonds.append((prev, (nid, "a")))
            bonds.append(((nid, "b"), ports[j]))
            prev = (nid, "c")
        bonds.append((prev, ports[-1]))

    # Left-deep AND tree over clause outputs, root postselected on <1|.
    outs = [(f"c{ci}", "out") for ci in range(len(cnf.clauses))]
    if outs:
        port = outs[0]
        for j in range(1, len(outs)):
            nid = f"and{j}"
            nodes[nid] = encode_function(_AND)
            bonds.append((port, (nid, "x0")))
            bonds.append((outs[j], (nid, "x1")))
            port = (nid, "out")
        nodes["post"] = Tensor.from_flat([("in", 2)], [0, 1])
        bonds.append((port, ("post", "in")))

    opens = [open_of[v] for v in range(1, cnf.num_vars + 1)]
    return network(nodes, bonds, opens)


def _factor_tensors(cnf: CNF) -> list[tuple[frozenset[int], np.ndarray, tuple[int, ...]]]:
    """Per-clause 0/1 factors over the clause's variables (object-int arrays)."""
    factors = []
    for clause in cnf.clauses:
        vars_ = tuple(dict.fromkeys(abs(l) for l in clause))
        k = len(vars_)
        arr = np.zeros((2,) * k, dtype=object)
        arr[...] = 0
        for idx in np.ndindex(*(2,) * k):
            assign = dict(zip(vars_, idx))
            if any((assign[abs(l)] == 1) == (l > 0) for l in clause):
                arr[idx] = 1
        factors.append((frozenset(vars_), arr, vars_))
    return factors


def _join(a_vars: tuple[int, ...], a: np.ndarray, b_vars: tuple[int, ...], b: np.ndarray):
    """Pointwise product of two factors over the union of their variables.

    Output variable order: a's variables, then b's new ones.  Since a's
    variables open the union in order, a broadcasts by appending singleton
    axes; b's axes are permuted into their union positions first.
    """
    out_vars = tuple(dict.fromkeys(a_vars + b_vars))
    shape_a = [2] * len(a_vars) + [1] * (len(out_vars) - len(a_vars))
    ax_b = [out_vars.index(v) for v in b_vars]
    perm_b = sorted(range(len(b_vars)), key=lambda i: ax_b[i])
    b_view = np.transpose(b, perm_b)
    shape_b = [1] * len(out_vars)
    for pos in ax_b:
        shape_b[pos] = 2
    return out_vars, a.reshape(shape_a) * b_view.reshape(shape_b)


def count_models(cnf: CNF, max_vars: int = DEFAULT_VAR_BOUND) -> int:
    """|{x : f(x) = 1}| by exact bucket elimination over the clause factors.

    Equal, by construction, to norm_squared(build_sat_network(cnf)): the
    state's amplitudes are 0/1, so the squared two-norm is the model count.
    Variables are eliminated fewest-occurrences-first (ties on index).
    """
    if cnf.num_vars > max_vars:
        raise ValueError(f"{cnf.num_vars} variables exceeds the bound {max_vars}")
    factors: list[tuple[tuple[int, ...], np.ndarray]] = [
        (vars_, arr) for _, arr, vars_ in _factor_tensors(cnf)
    ]
    free = set(range(1, cnf.num_vars + 1)) - {v for vs, _ in factors for v in vs}
    total = 1 << len(free)

    remaining = sorted({v for vs, _ in factors for v in vs})
    while remaining:
        counts = {v: sum(1 for vs, _ in factors if v in vs) for v in remaining}
        v = min(remaining, key=lambda u: (counts[u], u))
        bucket = [(vs, arr) for vs, arr in factors if v in vs]
        rest = [(vs, arr) for vs, arr in factors if v not in vs]
        vs, arr = bucket[0]
        for vs2, arr2 in bucket[1:]:
            vs, arr = _join(vs, arr, vs2, arr2)
        axis = vs.index(v)
        summed = np.asarray(arr.sum(axis=axis), dtype=object)
        new_vars = tuple(u for u in vs if u != v)
        rest.append((new_vars, summed))
        factors = rest
        remaining = [u for u in remaining if u != v]

    value = 1
    for vs, arr in factors:
        assert not vs
        value *= int(arr[()])
    return value * total


def is_satisfiable(cnf: CNF, max_vars: int = DEFAULT_VAR_BOUND) -> bool:
    """True iff count_models > 0 (a strictly positive norm)."""
    return count_models(cnf, max_vars=max_vars) > 0


# -- tree tensor networks ----------------------------------------------------


@dataclass(frozen=True)
class TreeTensorNetwork:
    """A network whose bond graph is a tree, with one parent leg per node.

    ``parent`` maps each node id to the label of its parent leg; exactly one
    node (the root) maps to None.  The parent leg is an open leg of the
    network or absent for the root.
    """

    net: TensorNetwork
    parent: dict[str, str | None]

    def __post_init__(self):
        object.__setattr__(self, "parent", dict(self.parent))
        if set(self.parent) != set(self.net.nodes):
            raise ValueError("parent map must cover exactly the network's nodes")
        roots = [n for n, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise ValueError(f"need exactly one root, got {roots}")
        # Bond graph must be a connected tree.
        n = len(self.net.nodes)
        edges = {frozenset((a, b)) for (a, _), (b, _) in self.net.bond_list()}
        if len(edges) != n - 1:
            raise ValueError(f"{len(edges)} tree edges for {n} nodes")
        seen = {next(iter(self.net.nodes))}
        frontier = [next(iter(seen))]
        adj: dict[str, set[str]] = {k: set() for k in self.net.nodes}
        for e in edges:
            a, b = tuple(e)
            adj[a].add(b)
            adj[b].add(a)
        while frontier:
            cur = frontier.pop()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        if len(seen) != n:
            raise ValueError("bond graph is not connected")
        for nid, lab in self.parent.items():
            if lab is not None:
                self.net.nodes[nid].dim(lab)


def check_tree_condition(ttn: TreeTensorNetwork) -> bool:
    """Per-node test: Supp(T T^dagger) over non-parent legs equals identity.

    For each node, T is contracted with its own conjugate over every leg
    except the parent leg; the verdict is true iff the support of the
    resulting parent x parent matrix is exactly the diagonal, at every
    node.  A passing Boolean tree encodes a nonempty (satisfiable) relation.
    """
    for nid, t in ttn.net.nodes.items():
        if any(d != 2 for d in t.dims):
            raise ValueError(f"node {nid!r} has a non-binary leg")
        plab = ttn.parent[nid]
        if plab is None:
            others = list(t.labels)
            d = 1
        else:
            others = [lab for lab in t.labels if lab != plab]
            d = t.dim(plab)
        mat = t.transpose(others + ([plab] if plab else []))
        rows = 1
        for lab in others:
            rows *= t.dim(lab)
        arr = mat.entries.reshape(rows, d)
        if t.backend == EXACT:
            gram = np.dot(arr.T, arr)
            ok = all(
                (gram[i, j] != 0) == (i == j) for i in range(d) for j in range(d)
            )
        else:
            gram = np.dot(np.conj(arr.T), arr)
            scale = max(1.0, float(np.max(np.abs(gram))))
            ok = all(
                (abs(gram[i, j]) > 1e-9 * scale) == (i == j)
                for i in range(d)
                for j in range(d)
            )
        if not ok:
            return False
    return True


def tree_state_support(ttn: TreeTensorNetwork):
    """Support of the contracted tree state (helper for soundness checks)."""
    return support(contract_network(ttn.net))
