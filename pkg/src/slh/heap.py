"""Concrete heap models and the executable semantics of the heap functions.

A heap is a weighted functional graph: every vertex has exactly one
outgoing edge except the null sink, and pointer variables label vertices.
Observers (path_length, circular, alias, is_path, is_null) read the graph;
transformers (new, assign, lookup, update) build new heaps.  Smoothing
contracts unlabelled pass-through vertices, subdivision splits weighted
edges; both preserve every observation, and two heaps are homeomorphic
when they smooth to the same canonical form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from . import formula as F
from .formula import NULL

INFINITE: float = float("inf")
ExtNat = float | int  # finite int or INFINITE


class NullDereferenceError(Exception):
    """lookup/update applied to a pointer aliasing null."""


class HeapModel:
    """Immutable weighted functional graph with a pointer labelling."""

    __slots__ = ("_vertices", "_succ", "_labels", "_key")

    def __init__(self,
                 vertices: Iterable[int],
                 succ: Mapping[int, tuple[int, int]],
                 labels: Mapping[str, int]):
        self._vertices = frozenset(vertices)
        self._succ = dict(succ)
        self._labels = dict(labels)
        self._key = (self._vertices,
                     tuple(sorted(self._succ.items())),
                     tuple(sorted(self._labels.items())))

    @property
    def vertices(self) -> frozenset[int]:
        return self._vertices

    @property
    def succ(self) -> Mapping[int, tuple[int, int]]:
        return self._succ

    @property
    def labels(self) -> Mapping[str, int]:
        return self._labels

    def successor(self, v: int) -> Optional[tuple[int, int]]:
        return self._succ.get(v)

    def node_of(self, var: str) -> int:
        return self._labels[var]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, HeapModel) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        edges = ", ".join(f"{u}->{v}w{w}" for u, (v, w) in sorted(self._succ.items()))
        labs = ", ".join(f"{p}@{n}" for p, n in sorted(self._labels.items()))
        return f"HeapModel([{edges}] {labs})"


def singleton_heap(pointers: Iterable[str] = ()) -> HeapModel:
    """The one-vertex heap where every pointer aliases null."""
    labels = {NULL: 0}
    for p in pointers:
        labels[p] = 0
    return HeapModel([0], {}, labels)


def well_formed(h: HeapModel) -> bool:
    if NULL not in h.labels:
        return False
    sink = h.labels[NULL]
    if sink not in h.vertices:
        return False
    for p, n in h.labels.items():
        if n not in h.vertices:
            return False
    for v in h.vertices:
        if v == sink:
            if v in h.succ:
                return False
        elif v not in h.succ:
            return False
    for u, (v, w) in h.succ.items():
        if u not in h.vertices or v not in h.vertices or w < 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Observers
# ---------------------------------------------------------------------------

def path_length(h: HeapModel, x: str, y: str) -> ExtNat:
    """Weighted distance along the unique successor walk, INFINITE if y is
    never reached."""
    cur = h.node_of(x)
    target = h.node_of(y)
    dist = 0
    for _ in range(len(h.vertices) + 1):
        if cur == target:
            return dist
        step = h.successor(cur)
        if step is None:
            return INFINITE
        cur = step[0]
        dist += step[1]
    return INFINITE


def circular(h: HeapModel, x: str) -> bool:
    start = h.node_of(x)
    cur = start
    for _ in range(len(h.vertices)):
        step = h.successor(cur)
        if step is None:
            return False
        cur = step[0]
        if cur == start:
            return True
    return False


def alias(h: HeapModel, x: str, y: str) -> bool:
    return path_length(h, x, y) == 0


def is_path(h: HeapModel, x: str, y: str) -> bool:
    return path_length(h, x, y) != INFINITE


def is_null(h: HeapModel, x: str) -> bool:
    return path_length(h, x, NULL) == 0


# ---------------------------------------------------------------------------
# Transformers (pure: each returns a new heap)
# ---------------------------------------------------------------------------

def _fresh_vertex(h: HeapModel) -> int:
    return max(h.vertices) + 1


def apply_new(h: HeapModel, x: str) -> HeapModel:
    q = _fresh_vertex(h)
    succ = dict(h.succ)
    succ[q] = (h.labels[NULL], 1)
    labels = dict(h.labels)
    labels[x] = q
    return HeapModel(h.vertices | {q}, succ, labels)


def apply_assign(h: HeapModel, x: str, y: str) -> HeapModel:
    labels = dict(h.labels)
    labels[x] = h.node_of(y)
    return HeapModel(h.vertices, h.succ, labels)


def apply_lookup(h: HeapModel, x: str, y: str) -> HeapModel:
    n = h.node_of(y)
    step = h.successor(n)
    if step is None:
        raise NullDereferenceError(f"lookup: '{y}' is null")
    target, w = step
    if w == 1:
        labels = dict(h.labels)
        labels[x] = target
        return HeapModel(h.vertices, h.succ, labels)
    # weighted edge: split off a unit step first so the move is one cell
    sub = subdivide(h, (n, target), 1)
    q = sub.succ[n][0]
    labels = dict(sub.labels)
    labels[x] = q
    return HeapModel(sub.vertices, sub.succ, labels)


def apply_update(h: HeapModel, x: str, y: str) -> HeapModel:
    n = h.node_of(x)
    if h.successor(n) is None:
        raise NullDereferenceError(f"update: '{x}' is null")
    succ = dict(h.succ)
    succ[n] = (h.node_of(y), 1)
    return HeapModel(h.vertices, succ, labels=h.labels)


APPLY = {
    "new": apply_new,
    "assign": apply_assign,
    "lookup": apply_lookup,
    "update": apply_update,
}


# ---------------------------------------------------------------------------
# Subdivision / smoothing / canonical form
# ---------------------------------------------------------------------------

def subdivide(h: HeapModel, edge: tuple[int, int], k: int) -> HeapModel:
    u, v = edge
    step = h.successor(u)
    if step is None or step[0] != v:
        raise ValueError(f"({u}, {v}) is not an edge")
    w = step[1]
    if not 1 <= k < w:
        raise ValueError(f"split point {k} outside 1..{w - 1}")
    q = _fresh_vertex(h)
    succ = dict(h.succ)
    succ[u] = (q, k)
    succ[q] = (v, w - k)
    return HeapModel(h.vertices | {q}, succ, h.labels)


def reachable_subheap(h: HeapModel) -> HeapModel:
    keep: set[int] = set()
    for n in h.labels.values():
        cur = n
        while cur not in keep:
            keep.add(cur)
            step = h.successor(cur)
            if step is None:
                break
            cur = step[0]
    succ = {u: e for u, e in h.succ.items() if u in keep}
    return HeapModel(keep, succ, h.labels)


def smooth(h: HeapModel) -> HeapModel:
    """Restrict to the reachable part, then contract every unlabelled
    vertex with a single incoming edge.  Result has at most 2*|P| vertices."""
    h = reachable_subheap(h)
    vertices = set(h.vertices)
    succ = dict(h.succ)
    labelled = set(h.labels.values())
    while True:
        indeg: dict[int, list[int]] = {}
        for u, (v, _) in succ.items():
            indeg.setdefault(v, []).append(u)
        candidate = None
        for q in sorted(vertices):
            if q in labelled or q not in succ:
                continue
            preds = indeg.get(q, [])
            if len(preds) == 1 and preds[0] != q:
                candidate = (preds[0], q)
                break
        if candidate is None:
            return HeapModel(vertices, succ, h.labels)
        p, q = candidate
        v, m = succ[q]
        succ[p] = (v, succ[p][1] + m)
        del succ[q]
        vertices.discard(q)


kernel = smooth


def shell(h: HeapModel) -> HeapModel:
    """Maximally subdivided form: every edge has weight 1."""
    vertices = set(h.vertices)
    succ: dict[int, tuple[int, int]] = {}
    nxt = max(vertices) + 1 if vertices else 0
    for u in sorted(h.succ):
        v, w = h.succ[u]
        cur = u
        for _ in range(w - 1):
            vertices.add(nxt)
            succ[cur] = (nxt, 1)
            cur = nxt
            nxt += 1
        succ[cur] = (v, 1)
    return HeapModel(vertices, succ, h.labels)


def _pointer_order(h: HeapModel) -> list[str]:
    return [NULL] + sorted(p for p in h.labels if p != NULL)


def canonicalize(h: HeapModel) -> HeapModel:
    """Renumber vertices in first-visit order of the successor walks from
    the pointer variables (null first, then name order).  Unreachable
    vertices are dropped; isomorphic heaps map to the identical value."""
    mapping: dict[int, int] = {}
    for p in _pointer_order(h):
        cur = h.labels[p]
        while cur not in mapping:
            mapping[cur] = len(mapping)
            step = h.successor(cur)
            if step is None:
                break
            cur = step[0]
    succ = {
        mapping[u]: (mapping[v], w)
        for u, (v, w) in h.succ.items() if u in mapping
    }
    labels = {p: mapping[n] for p, n in h.labels.items()}
    return HeapModel(range(len(mapping)), succ, labels)


def homeomorphic(h1: HeapModel, h2: HeapModel) -> bool:
    if set(h1.labels) != set(h2.labels):
        raise ValueError("heaps label different pointer sets")
    return canonicalize(smooth(h1)) == canonicalize(smooth(h2))


# ---------------------------------------------------------------------------
# Formula evaluation
# ---------------------------------------------------------------------------

@dataclass
class Interpretation:
    """Assignment of heap models to heap variables and bit-vector values to
    numeric variables.  Pointer variables are interpreted inside each heap
    via its labelling."""

    heaps: dict[str, HeapModel] = field(default_factory=dict)
    numerics: dict[str, int] = field(default_factory=dict)

    def heap(self, name: str) -> HeapModel:
        return self.heaps[name]

    def num(self, name: str) -> int:
        return self.numerics[name]


def bv_of_extnat(v: ExtNat, width: int) -> int:
    """Map a path length into the bit-vector domain: the all-ones sentinel
    stands for infinity and absorbs any length at or beyond it."""
    sentinel = (1 << width) - 1
    if v == INFINITE or v >= sentinel:
        return sentinel
    return int(v)


def eval_term(t: F.NumTerm, g: Interpretation, width: int) -> int:
    """Bit-vector value of a term.

    Addition saturates at the sentinel (so INF absorbs), subtraction keeps
    INF on the left argument and is modular otherwise, multiplication is
    modular, and division/modulo by zero yield the sentinel.
    """
    sentinel = (1 << width) - 1
    mask = sentinel
    if isinstance(t, F.NumConst):
        return t.value & mask
    if isinstance(t, F.InfConst):
        return sentinel
    if isinstance(t, F.NumVar):
        return g.num(t.name) & mask
    if isinstance(t, F.PathLen):
        return bv_of_extnat(path_length(g.heap(t.heap), t.src, t.dst), width)
    assert isinstance(t, F.NumBinOp)
    a = eval_term(t.lhs, g, width)
    b = eval_term(t.rhs, g, width)
    if t.op == "+":
        return min(a + b, sentinel)
    if t.op == "-":
        return sentinel if a == sentinel else (a - b) & mask
    if t.op == "*":
        return (a * b) & mask
    if t.op == "/":
        return sentinel if b == 0 else a // b
    if t.op == "%":
        return sentinel if b == 0 else a % b
    raise ValueError(f"unknown operator {t.op}")


def _to_signed(v: int, width: int) -> int:
    return v - (1 << width) if v >= (1 << (width - 1)) else v


def eval_atom(a: F.Atom, g: Interpretation, width: int,
              diagnostics: Optional[list[str]] = None) -> bool:
    if isinstance(a, F.Alias):
        return alias(g.heap(a.heap), a.x, a.y)
    if isinstance(a, F.IsPath):
        # finite-width convention: a walk that saturates the sentinel is
        # indistinguishable from an unreachable target
        d = path_length(g.heap(a.heap), a.x, a.y)
        return bv_of_extnat(d, width) != (1 << width) - 1
    if isinstance(a, F.IsNull):
        return is_null(g.heap(a.heap), a.x)
    if isinstance(a, F.Circular):
        return circular(g.heap(a.heap), a.x)
    if isinstance(a, F.Transform):
        try:
            result = APPLY[a.kind](g.heap(a.heap), *a.args)
        except NullDereferenceError as exc:
            if diagnostics is not None:
                diagnostics.append(f"{a.kind}({a.heap}, {', '.join(a.args)}): {exc}")
            return False
        return homeomorphic(g.heap(a.out), result)
    assert isinstance(a, F.Cmp)
    lhs = eval_term(a.lhs, g, width)
    rhs = eval_term(a.rhs, g, width)
    if a.signed:
        lhs, rhs = _to_signed(lhs, width), _to_signed(rhs, width)
    if a.op == "=":
        return lhs == rhs
    if a.op == "!=":
        return lhs != rhs
    if a.op == "<":
        return lhs < rhs
    if a.op == "<=":
        return lhs <= rhs
    if a.op == ">":
        return lhs > rhs
    return lhs >= rhs


def eval_node(n: F.Node, g: Interpretation, width: int,
              diagnostics: Optional[list[str]] = None) -> bool:
    if isinstance(n, F.AtomNode):
        return eval_atom(n.atom, g, width, diagnostics)
    if isinstance(n, F.BoolLit):
        return n.value
    if isinstance(n, F.Not):
        return not eval_node(n.arg, g, width, diagnostics)
    if isinstance(n, F.And):
        return (eval_node(n.lhs, g, width, diagnostics)
                and eval_node(n.rhs, g, width, diagnostics))
    if isinstance(n, F.Or):
        return (eval_node(n.lhs, g, width, diagnostics)
                or eval_node(n.rhs, g, width, diagnostics))
    if isinstance(n, F.Implies):
        return (not eval_node(n.lhs, g, width, diagnostics)
                or eval_node(n.rhs, g, width, diagnostics))
    assert isinstance(n, F.Iff)
    return (eval_node(n.lhs, g, width, diagnostics)
            == eval_node(n.rhs, g, width, diagnostics))


def eval_formula(f: F.SlhFormula, g: Interpretation, width: int = 8,
                 diagnostics: Optional[list[str]] = None) -> bool:
    """Truth value of ``f`` under interpretation ``g`` at the given width."""
    return eval_node(f.root, g, width, diagnostics)


# ---------------------------------------------------------------------------
# DOT rendering
# ---------------------------------------------------------------------------

def to_dot(h: HeapModel, name: str = "heap") -> str:
    """Graphviz rendering: solid weighted successor edges, dashed edges from
    pointer names, null drawn as a box."""
    sink = h.labels.get(NULL)
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for v in sorted(h.vertices):
        if v == sink:
            lines.append(f'  n{v} [shape=box, label="null"];')
        else:
            lines.append(f'  n{v} [shape=circle, label="{v}"];')
    for u in sorted(h.succ):
        v, w = h.succ[u]
        lines.append(f'  n{u} -> n{v} [label="{w}"];')
    for p in sorted(h.labels):
        if p == NULL:
            continue
        lines.append(f'  var_{p} [shape=plaintext, label="{p}"];')
        lines.append(f"  var_{p} -> n{h.labels[p]} [style=dashed];")
    lines.append("}")
    return "\n".join(lines)
