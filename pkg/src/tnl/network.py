"""Tensor networks: labeled graphs of tensors, contraction and order search.

A network is a map from node ids to tensors plus a set of bonds, each bond
joining two distinct (node, leg) endpoints of equal dimension.  Every leg of
every node is either one endpoint of exactly one bond or listed exactly once
in ``open_legs``.  Self-bonds (both endpoints on one node) are rejected;
traces are expressed through cup/cap tensors, which keeps pairwise merging
closed under contraction.

Networks and tensors are immutable after construction, so they are safe to
share across threads; contracting one network is single-threaded.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import combinations

from .tensor import EXACT, Tensor, conjugate, contract_tensors

Port = tuple[str, str]  # (node id, leg label)


@dataclass(frozen=True)
class TensorNetwork:
    nodes: dict[str, Tensor]
    bonds: frozenset[frozenset[Port]]
    open_legs: tuple[Port, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", dict(self.nodes))
        object.__setattr__(self, "bonds", frozenset(frozenset(b) for b in self.bonds))
        object.__setattr__(self, "open_legs", tuple((str(n), str(l)) for n, l in self.open_legs))
        self._validate()

    def _validate(self):
        if not self.nodes:
            raise ValueError("empty network")
        backends = {t.backend for t in self.nodes.values()}
        if len(backends) > 1:
            raise ValueError(f"mixed backends in one network: {sorted(backends)}")
        seen: dict[Port, str] = {}
        for bond in self.bonds:
            ends = sorted(bond)
            if len(ends) != 2:
                raise ValueError(f"bond needs two distinct endpoints: {ends}")
            (n1, l1), (n2, l2) = ends
            if n1 == n2:
                raise ValueError(f"self-bond on node {n1!r}; use cup/cap tensors for traces")
            d1, d2 = self._leg_dim(n1, l1), self._leg_dim(n2, l2)
            if d1 != d2:
                raise ValueError(f"bond {ends} joins dims {d1} != {d2}")
            for p in ends:
                if p in seen:
                    raise ValueError(f"leg {p} used twice ({seen[p]} and bond)")
                seen[p] = "bond"
        for p in self.open_legs:
            self._leg_dim(*p)
            if p in seen:
                raise ValueError(f"leg {p} used twice ({seen[p]} and open)")
            seen[p] = "open"
        for nid, t in self.nodes.items():
            for lab, _ in t.legs:
                if (nid, lab) not in seen:
                    raise ValueError(f"leg ({nid!r}, {lab!r}) neither bonded nor open")

    def _leg_dim(self, nid: str, lab: str) -> int:
        if nid not in self.nodes:
            raise KeyError(f"unknown node {nid!r}")
        return self.nodes[nid].dim(lab)

    @property
    def backend(self) -> str:
        return next(iter(self.nodes.values())).backend

    def bond_list(self) -> list[tuple[Port, Port]]:
        """Bonds as sorted endpoint pairs, in deterministic order."""
        out = [tuple(sorted(b)) for b in self.bonds]
        out.sort()
        return out


@dataclass(frozen=True)
class ContractionOrder:
    """A sequence of pairwise node merges; the first id of a pair survives."""

    steps: tuple[tuple[str, str], ...]


def network(nodes: dict[str, Tensor], bonds, open_legs=()) -> TensorNetwork:
    """Convenience constructor taking bonds as ((node, leg), (node, leg)) pairs."""
    return TensorNetwork(nodes, frozenset(frozenset(b) for b in bonds), tuple(open_legs))


def _qualified(net: TensorNetwork):
    """Lift leg labels to globally unique 'node:leg' names for merging.

    Bonds become ((current node, qualified label), ...) pairs; the label part
    never changes across merges, only the node part is remapped.
    """
    nodes = {
        nid: t.relabel({lab: f"{nid}:{lab}" for lab in t.labels})
        for nid, t in net.nodes.items()
    }
    pairs = [
        ((a, f"{a}:{la}"), (b, f"{b}:{lb}"))
        for (a, la), (b, lb) in net.bond_list()
    ]
    return nodes, pairs


def _merge(nodes: dict[str, Tensor], bonds: list, n1: str, n2: str) -> tuple[dict, list]:
    """Merge n2 into n1, summing over every bond between them."""
    shared = []
    rest = []
    for (a, qa), (b, qb) in bonds:
        if {a, b} == {n1, n2}:
            shared.append((qa, qb) if a == n1 else (qb, qa))
        else:
            rest.append(((a, qa), (b, qb)))
    merged = contract_tensors(nodes[n1], nodes[n2], shared)
    out = dict(nodes)
    del out[n2]
    out[n1] = merged
    remap = lambda n: n1 if n == n2 else n
    rest = [((remap(a), qa), (remap(b), qb)) for (a, qa), (b, qb) in rest]
    return out, rest


def contract_pair(net: TensorNetwork, n1: str, n2: str) -> TensorNetwork:
    """Replace n1 and n2 by one node (id n1), summing their shared bonds.

    Zero shared bonds degenerates to a tensor product.
    """
    if n1 not in net.nodes or n2 not in net.nodes:
        raise KeyError(f"unknown node in pair ({n1!r}, {n2!r})")
    if n1 == n2:
        raise ValueError("contract_pair needs two distinct nodes")
    nodes, bonds = _qualified(net)
    worked, rest = _merge(nodes, bonds, n1, n2)

    # Drop the qualification where it is unambiguous again.
    new_nodes: dict[str, Tensor] = {}
    rename: dict[str, Port] = {}  # qualified label -> (node, final label)
    for nid, t in worked.items():
        bare_counts: dict[str, int] = {}
        for lab in t.labels:
            bare = lab.split(":", 1)[1]
            bare_counts[bare] = bare_counts.get(bare, 0) + 1
        mapping = {}
        for lab in t.labels:
            bare = lab.split(":", 1)[1]
            final = bare if bare_counts[bare] == 1 else lab
            mapping[lab] = final
            rename[lab] = (nid, final)
        new_nodes[nid] = t.relabel(mapping)
    new_bonds = [(rename[qa], rename[qb]) for (_, qa), (_, qb) in rest]
    new_open = tuple(rename[f"{nid}:{lab}"] for nid, lab in net.open_legs)
    return network(new_nodes, new_bonds, new_open)


def contract_network(net: TensorNetwork, order: ContractionOrder | None = None) -> Tensor:
    """Contract everything; the result's legs are open_legs in declared order.

    The value is independent of the order.  Disconnected components are
    handled uniformly: merging unlinked nodes is a tensor product.
    """
    if order is None:
        order = optimize_order(net)
    nodes, bonds = _qualified(net)
    for a, b in order.steps:
        if a not in nodes or b not in nodes or a == b:
            raise ValueError(f"invalid contraction step ({a!r}, {b!r})")
        nodes, bonds = _merge(nodes, bonds, a, b)
    if len(nodes) != 1:
        raise ValueError(f"order leaves {len(nodes)} nodes unmerged")
    result = next(iter(nodes.values()))

    want = [f"{nid}:{lab}" for nid, lab in net.open_legs]
    if set(want) != set(result.labels):
        raise AssertionError("contracted legs disagree with declared open legs")
    result = result.transpose(want)

    bare = [lab.split(":", 1)[1] for lab in want]
    final = [b if bare.count(b) == 1 else w.replace(":", ".", 1) for b, w in zip(bare, want)]
    return result.relabel(dict(zip(want, final)))


def optimize_order(net: TensorNetwork) -> ContractionOrder:
    """Pick a contraction order.

    Up to 8 nodes: exhaustive minimum of the summed intermediate entry
    counts, by memoized search over partitions.  Larger networks: greedy
    smallest-intermediate-first.  Ties break on the lexicographically
    least merge pair, so the result is deterministic.
    """
    ids = sorted(net.nodes)
    if len(ids) == 1:
        return ContractionOrder(())

    # For each node, its legs as (dim, peer node or None).
    peer: dict[Port, str] = {}
    for (a, la), (b, lb) in net.bond_list():
        peer[(a, la)] = b
        peer[(b, lb)] = a
    node_legs = {
        nid: [(lab, d, peer.get((nid, lab))) for lab, d in net.nodes[nid].legs]
        for nid in ids
    }

    def result_size(cluster: frozenset[str]) -> int:
        size = 1
        for nid in cluster:
            for _, d, p in node_legs[nid]:
                if p is None or p not in cluster:
                    size *= d
        return size

    def merge_key(c1: frozenset, c2: frozenset) -> tuple[str, str]:
        return tuple(sorted((min(c1), min(c2))))  # type: ignore[return-value]

    if len(ids) <= 8:
        best: dict[frozenset[frozenset[str]], tuple[int, tuple]] = {}

        def solve(state: frozenset[frozenset[str]]) -> tuple[int, tuple]:
            if len(state) == 1:
                return 0, ()
            if state in best:
                return best[state]
            candidates = sorted(combinations(sorted(state, key=min), 2), key=lambda p: merge_key(*p))
            top: tuple[int, tuple] | None = None
            for c1, c2 in candidates:
                joined = c1 | c2
                cost = result_size(joined)
                sub_state = (state - {c1, c2}) | {joined}
                sub_cost, sub_steps = solve(frozenset(sub_state))
                total = cost + sub_cost
                steps = (merge_key(c1, c2),) + sub_steps
                if top is None or (total, steps) < top:
                    top = (total, steps)
            best[state] = top  # type: ignore[assignment]
            return top  # type: ignore[return-value]

        _, steps = solve(frozenset(frozenset([i]) for i in ids))
        return ContractionOrder(steps)

    # Greedy fallback for big networks.
    clusters = {frozenset([i]) for i in ids}
    steps = []
    while len(clusters) > 1:
        pick = None
        for c1, c2 in combinations(sorted(clusters, key=min), 2):
            cand = (result_size(c1 | c2), merge_key(c1, c2))
            if pick is None or cand < pick[0]:
                pick = (cand, c1, c2)
        _, c1, c2 = pick
        steps.append(merge_key(c1, c2))
        clusters -= {c1, c2}
        clusters.add(c1 | c2)
    return ContractionOrder(tuple(steps))


def all_orders(net: TensorNetwork):
    """Yield every valid ContractionOrder (any pair may merge at each step)."""

    def rec(alive: tuple[str, ...]):
        if len(alive) == 1:
            yield ()
            return
        for a, b in combinations(alive, 2):
            keep, drop = sorted((a, b))
            rest = tuple(sorted(set(alive) - {drop}))
            for tail in rec(rest):
                yield ((keep, drop),) + tail

    for steps in rec(tuple(sorted(net.nodes))):
        yield ContractionOrder(steps)


_MIRROR = "~conj"


def norm_squared(state: TensorNetwork):
    """<psi|psi>: contract the network against its conjugated mirror image.

    Every open leg is bonded to its mirror twin.  Returns an exact rational
    on the exact backend, a nonnegative float on the float backend.
    """
    suff = _MIRROR
    nodes: dict[str, Tensor] = dict(state.nodes)
    for nid, t in state.nodes.items():
        nodes[nid + suff] = conjugate(t)
    bonds = []
    for (a, la), (b, lb) in state.bond_list():
        bonds.append(((a, la), (b, lb)))
        bonds.append(((a + suff, la), (b + suff, lb)))
    for nid, lab in state.open_legs:
        bonds.append(((nid, lab), (nid + suff, lab)))
    doubled = network(nodes, bonds, ())
    value = contract_network(doubled).item()
    if state.backend == EXACT:
        return value
    return float(value.real)


def node_norm_scale(net: TensorNetwork) -> float:
    """Product of node Frobenius norms, the scale for float zero tests."""
    return float(reduce(lambda acc, t: acc * t.frobenius_norm(), net.nodes.values(), 1.0))
