"""Tensor Network Format (TNF): a line-based UTF-8 network description.

Grammar (``#`` starts a comment anywhere)::

    tensor NAME d1 d2 ... {
        i1 i2 ... VALUE     # one nonzero entry per line, 0-based indices
        ...
    }
    node ID NAME leg1 leg2 ...
    open legX legY ...

Omitted entries are zero.  VALUE is an integer, a rational ``p/q``, or a
complex ``a+bi`` with decimal parts.  A leg label appearing on two nodes is
a bond; a label appearing once must be listed in ``open``.  Using a label
twice on one node is rejected (traces are written with cup/cap tensors).

A file whose values are all integers or rationals loads on the exact
backend; any decimal or imaginary part switches the whole network to float.
"""

from __future__ import annotations

import re
from fractions import Fraction

import numpy as np

from .tensor import EXACT, FLOAT, Tensor
from .network import TensorNetwork, network

_COMPLEX_RE = re.compile(
    r"^(?P<re>[+-]?(?:\d+\.?\d*|\.\d+))?(?P<im>[+-]?(?:\d+\.?\d*|\.\d+)?i)?$"
)


class TnfError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def parse_value(token: str, line: int | None = None):
    """Parse a TNF value literal into (value, is_float)."""
    if re.fullmatch(r"[+-]?\d+", token):
        return int(token), False
    if re.fullmatch(r"[+-]?\d+/\d+", token):
        return Fraction(token), False
    m = _COMPLEX_RE.fullmatch(token)
    if m and (m.group("re") or m.group("im")):
        re_part = float(m.group("re")) if m.group("re") else 0.0
        im_tok = m.group("im")
        if im_tok:
            im_tok = im_tok[:-1]
            if im_tok in ("", "+"):
                im_part = 1.0
            elif im_tok == "-":
                im_part = -1.0
            else:
                im_part = float(im_tok)
        else:
            im_part = 0.0
        return complex(re_part, im_part), True
    raise TnfError(f"bad value literal {token!r}", line)


def format_value(v) -> str:
    if isinstance(v, (int, Fraction)):
        return str(v)
    c = complex(v)
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}i"
    sign = "+" if c.imag >= 0 else ""
    return f"{c.real!r}{sign}{c.imag!r}i"


def parse_tnf(text: str, backend: str | None = None) -> TensorNetwork:
    """Parse TNF text into a TensorNetwork.

    backend forces ``exact`` or ``float``; by default it is inferred from
    the value literals.  Forcing ``exact`` on a file with float values is an
    error (never silently round).
    """
    tensors: dict[str, tuple[tuple[int, ...], dict[tuple[int, ...], object]]] = {}
    node_lines: list[tuple[int, str, str, list[str]]] = []
    open_labels: list[str] = []
    saw_float = False
    cur: str | None = None  # tensor block being filled

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if cur is not None:
            if toks == ["}"]:
                cur = None
                continue
            dims, entries = tensors[cur]
            if toks[-1] == "{":
                raise TnfError("nested tensor block", lineno)
            if len(toks) != len(dims) + 1:
                raise TnfError(
                    f"entry needs {len(dims)} indices and a value, got {len(toks)} tokens", lineno
                )
            try:
                idx = tuple(int(t) for t in toks[:-1])
            except ValueError:
                raise TnfError(f"bad index in {toks[:-1]}", lineno) from None
            for i, d in zip(idx, dims):
                if not 0 <= i < d:
                    raise TnfError(f"index {i} out of range for dim {d}", lineno)
            value, isf = parse_value(toks[-1], lineno)
            saw_float = saw_float or isf
            if idx in entries:
                raise TnfError(f"duplicate entry at {idx}", lineno)
            entries[idx] = value
            continue
        if toks[0] == "tensor":
            if len(toks) < 3 or toks[-1] != "{":
                raise TnfError("expected: tensor NAME d1 ... {", lineno)
            name = toks[1]
            if name in tensors:
                raise TnfError(f"tensor {name!r} redefined", lineno)
            try:
                dims = tuple(int(t) for t in toks[2:-1])
            except ValueError:
                raise TnfError("bad dimension", lineno) from None
            if not dims or any(d <= 0 for d in dims):
                raise TnfError(f"bad dimensions {dims}", lineno)
            tensors[name] = (dims, {})
            cur = name
        elif toks[0] == "node":
            if len(toks) < 3:
                raise TnfError("expected: node ID NAME leg1 ...", lineno)
            node_lines.append((lineno, toks[1], toks[2], toks[3:]))
        elif toks[0] == "open":
            open_labels.extend(toks[1:])
        else:
            raise TnfError(f"unknown directive {toks[0]!r}", lineno)
    if cur is not None:
        raise TnfError(f"unterminated tensor block {cur!r}")

    if backend is None:
        backend = FLOAT if saw_float else EXACT
    elif backend == EXACT and saw_float:
        raise TnfError("file holds float values; cannot force the exact backend")

    # Instantiate nodes; a global leg label on two nodes is a bond.
    label_sites: dict[str, list[tuple[str, str]]] = {}
    nodes: dict[str, Tensor] = {}
    for lineno, nid, tname, labels in node_lines:
        if nid in nodes:
            raise TnfError(f"node {nid!r} redefined", lineno)
        if tname not in tensors:
            raise TnfError(f"unknown tensor {tname!r}", lineno)
        dims, entries = tensors[tname]
        if len(labels) != len(dims):
            raise TnfError(f"tensor {tname!r} has {len(dims)} legs, node lists {len(labels)}", lineno)
        if len(set(labels)) != len(labels):
            raise TnfError("leg label repeated on one node; use cup/cap tensors for traces", lineno)
        if backend == EXACT:
            arr = np.zeros(dims, dtype=object)
            arr[...] = 0
        else:
            arr = np.zeros(dims, dtype=np.complex128)
        for idx, v in entries.items():
            arr[idx] = v if backend == EXACT else complex(v)
        nodes[nid] = Tensor(tuple(zip(labels, dims)), arr, backend)
        for lab in labels:
            label_sites.setdefault(lab, []).append((nid, lab))

    bonds = []
    opens = []
    for lab, sites in label_sites.items():
        if len(sites) == 2:
            if lab in open_labels:
                raise TnfError(f"leg {lab!r} is a bond but also listed open")
            bonds.append(tuple(sites))
        elif len(sites) == 1:
            if lab not in open_labels:
                raise TnfError(f"leg {lab!r} appears once but is not listed open")
            opens.append(sites[0])
        else:
            raise TnfError(f"leg {lab!r} appears on {len(sites)} nodes")
    for lab in open_labels:
        if lab not in label_sites:
            raise TnfError(f"open leg {lab!r} not attached to any node")
    # Keep the declared open order.
    order = {lab: i for i, lab in enumerate(open_labels)}
    opens.sort(key=lambda p: order[p[1]])
    return network(nodes, bonds, opens)


def load_tnf(path, backend: str | None = None) -> TensorNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_tnf(fh.read(), backend=backend)


def format_tnf(net: TensorNetwork, header: str | None = None) -> str:
    """Serialize a network to TNF text (deterministic order)."""
    lines: list[str] = []
    if header:
        for h in header.splitlines():
            lines.append(f"# {h}")
    # One tensor block per node keeps labels trivially consistent.
    bond_label: dict[tuple[str, str], str] = {}
    for i, ((a, la), (b, lb)) in enumerate(net.bond_list()):
        lab = f"w{i}"
        bond_label[(a, la)] = lab
        bond_label[(b, lb)] = lab
    open_label = {}
    for nid, lab in net.open_legs:
        open_label[(nid, lab)] = lab if (lab not in {v for v in bond_label.values()}) else f"open_{nid}_{lab}"

    for nid in sorted(net.nodes):
        t = net.nodes[nid]
        dims = " ".join(str(d) for d in t.dims)
        lines.append(f"tensor T_{nid} {dims} {{")
        for idx in np.ndindex(*t.dims) if t.dims else [()]:
            v = t.entries[idx]
            if v == 0:
                continue
            pos = " ".join(str(i) for i in idx)
            lines.append(f"    {pos} {format_value(v)}".rstrip())
        lines.append("}")
    for nid in sorted(net.nodes):
        t = net.nodes[nid]
        labs = [
            bond_label.get((nid, lab)) or open_label.get((nid, lab), lab)
            for lab, _ in t.legs
        ]
        lines.append(f"node {nid} T_{nid} " + " ".join(labs))
    if net.open_legs:
        lines.append("open " + " ".join(open_label[p] for p in net.open_legs))
    return "\n".join(lines) + "\n"
