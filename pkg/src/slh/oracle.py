"""Brute-force ground truth for differential testing.

Enumerates every well-formed heap over a pointer set up to a node and
weight bound, one canonical representative per isomorphism class, and
decides formula validity by exhaustive evaluation.  Deliberately naive:
the point is independence from the SAT pipeline, not speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from . import formula as F
from . import heap as H
from .formula import NULL


class EnumerationBudgetError(Exception):
    """The requested enumeration is combinatorially out of reach."""


@dataclass(frozen=True)
class EnumBounds:
    max_nodes: int
    max_weight: int
    pointers: tuple[str, ...]  # null is always included

    def __post_init__(self) -> None:
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be at least 1")
        if self.max_weight < 1:
            raise ValueError("max_weight must be at least 1")

    @property
    def names(self) -> list[str]:
        rest = sorted(p for p in self.pointers if p != NULL)
        return [NULL] + rest


def enumerate_heaps(b: EnumBounds) -> Iterator[H.HeapModel]:
    """All reachable well-formed heaps over the pointer set, one canonical
    representative (first-visit numbering) per isomorphism class.

    Construction mirrors the canonical walk: pointers are placed in name
    order with null first, each either on an already-discovered node or on
    a fresh one, and a fresh node opens a successor chain that keeps
    discovering fresh nodes until it closes on a known node.
    """
    names = b.names
    labels: dict[str, int] = {NULL: 0}
    succ: dict[int, tuple[int, int]] = {}

    def chain(frontier: int, nnodes: int, pi: int) -> Iterator[H.HeapModel]:
        # frontier is a fresh node still needing a successor
        for w in range(1, b.max_weight + 1):
            for target in range(nnodes):
                succ[frontier] = (target, w)
                yield from place(pi, nnodes)
            if nnodes < b.max_nodes:
                succ[frontier] = (nnodes, w)
                yield from chain(nnodes, nnodes + 1, pi)
        del succ[frontier]

    def place(pi: int, nnodes: int) -> Iterator[H.HeapModel]:
        if pi == len(names):
            yield H.HeapModel(range(nnodes), dict(succ), dict(labels))
            return
        name = names[pi]
        for node in range(nnodes):
            labels[name] = node
            yield from place(pi + 1, nnodes)
        if nnodes < b.max_nodes:
            labels[name] = nnodes
            yield from chain(nnodes, nnodes + 1, pi + 1)
        del labels[name]

    yield from place(1, 1)


def count_heaps(b: EnumBounds) -> int:
    return sum(1 for _ in enumerate_heaps(b))


@dataclass
class OracleVerdict:
    valid: bool
    counterexample: Optional[H.Interpretation] = None

    def __bool__(self) -> bool:
        return self.valid


class _ObsCache:
    """Per-heap memo of observer values so repeated formulas stay cheap."""

    __slots__ = ("heap", "pl", "circ")

    def __init__(self, heap: H.HeapModel):
        self.heap = heap
        self.pl: dict[tuple[str, str], H.ExtNat] = {}
        self.circ: dict[str, bool] = {}

    def path_length(self, x: str, y: str) -> H.ExtNat:
        key = (x, y)
        got = self.pl.get(key)
        if got is None:
            got = H.path_length(self.heap, x, y)
            self.pl[key] = got
        return got

    def circular(self, x: str) -> bool:
        got = self.circ.get(x)
        if got is None:
            got = H.circular(self.heap, x)
            self.circ[x] = got
        return got


def _heap_definitions(f: F.SlhFormula) -> dict[str, F.Atom]:
    defs: dict[str, F.Atom] = {}
    for a in F.atoms(f.root):
        if isinstance(a, F.Transform):
            if a.out in defs:
                raise ValueError(
                    f"heap variable '{a.out}' defined by several transformers")
            defs[a.out] = a
    return defs


class _Evaluator:
    """Formula evaluation over cached observers, with transformer-defined
    heaps computed from their inputs rather than enumerated."""

    def __init__(self, f: F.SlhFormula, width: int):
        self.f = f
        self.width = width
        self.defs = _heap_definitions(f)
        self.sentinel = (1 << width) - 1

    def run(self, base: dict[str, _ObsCache],
            numerics: dict[str, int]) -> tuple[bool, dict[str, H.HeapModel]]:
        caches = dict(base)
        derived: dict[str, H.HeapModel] = {}
        faulted: set[str] = set()

        def resolve(name: str) -> _ObsCache:
            # a faulting transformer is suppressed: the heap passes through
            # unchanged and only the defining atom itself evaluates false,
            # matching the encoded guard semantics
            got = caches.get(name)
            if got is not None:
                return got
            d = self.defs[name]
            assert isinstance(d, F.Transform)
            src = resolve(d.heap)
            try:
                result = H.APPLY[d.kind](src.heap, *d.args)
            except H.NullDereferenceError:
                faulted.add(name)
                result = src.heap
            cache = _ObsCache(result)
            caches[name] = cache
            derived[name] = result
            return cache

        def term(t: F.NumTerm) -> int:
            s = self.sentinel
            if isinstance(t, F.NumConst):
                return t.value & s
            if isinstance(t, F.InfConst):
                return s
            if isinstance(t, F.NumVar):
                return numerics[t.name] & s
            if isinstance(t, F.PathLen):
                c = resolve(t.heap)
                return H.bv_of_extnat(c.path_length(t.src, t.dst), self.width)
            assert isinstance(t, F.NumBinOp)
            a, b = term(t.lhs), term(t.rhs)
            if t.op == "+":
                return min(a + b, s)
            if t.op == "-":
                return s if a == s else (a - b) & s
            if t.op == "*":
                return (a * b) & s
            if t.op == "/":
                return s if b == 0 else a // b
            return s if b == 0 else a % b

        def atom(a: F.Atom) -> bool:
            if isinstance(a, F.Alias):
                return resolve(a.heap).path_length(a.x, a.y) == 0
            if isinstance(a, F.IsPath):
                d = resolve(a.heap).path_length(a.x, a.y)
                return H.bv_of_extnat(d, self.width) != self.sentinel
            if isinstance(a, F.IsNull):
                return resolve(a.heap).path_length(a.x, NULL) == 0
            if isinstance(a, F.Circular):
                return resolve(a.heap).circular(a.x)
            if isinstance(a, F.Transform):
                resolve(a.out)
                return a.out not in faulted
            assert isinstance(a, F.Cmp)
            lhs, rhs = term(a.lhs), term(a.rhs)
            if a.signed:
                half = 1 << (self.width - 1)
                full = 1 << self.width
                lhs = lhs - full if lhs >= half else lhs
                rhs = rhs - full if rhs >= half else rhs
            return {"=": lhs == rhs, "!=": lhs != rhs, "<": lhs < rhs,
                    "<=": lhs <= rhs, ">": lhs > rhs, ">=": lhs >= rhs}[a.op]

        def node(n: F.Node) -> bool:
            if isinstance(n, F.AtomNode):
                return atom(n.atom)
            if isinstance(n, F.BoolLit):
                return n.value
            if isinstance(n, F.Not):
                return not node(n.arg)
            if isinstance(n, F.And):
                return node(n.lhs) and node(n.rhs)
            if isinstance(n, F.Or):
                return node(n.lhs) or node(n.rhs)
            if isinstance(n, F.Implies):
                return not node(n.lhs) or node(n.rhs)
            assert isinstance(n, F.Iff)
            return node(n.lhs) == node(n.rhs)

        value = node(self.f.root)
        return value, derived


def brute_force_validity(f: F.SlhFormula, b: EnumBounds, width: int = 4,
                         budget: int = 5_000_000) -> OracleVerdict:
    """Valid iff no enumerated interpretation falsifies the formula.

    Free heap variables range over the canonical enumeration, numeric
    variables over the whole bit-vector domain, and transformer-defined
    heaps are computed from their inputs.
    """
    defs = _heap_definitions(f)
    free_heaps = [d.name for d in f.decls
                  if d.sort is F.Sort.HEAP and d.name not in defs]
    num_vars = [d.name for d in f.decls if d.sort is F.Sort.NUM]
    ev = _Evaluator(f, width)

    pool = [_ObsCache(h) for h in enumerate_heaps(b)]
    cost = len(pool) ** len(free_heaps) * (1 << width) ** len(num_vars)
    if cost > budget:
        raise EnumerationBudgetError(
            f"{cost} interpretations exceed the budget of {budget}")

    def assignments(idx: int, chosen: dict[str, _ObsCache]) -> Iterator[dict]:
        if idx == len(free_heaps):
            yield chosen
            return
        for c in pool:
            chosen[free_heaps[idx]] = c
            yield from assignments(idx + 1, chosen)

    def numeric_assignments(idx: int, vals: dict[str, int]) -> Iterator[dict]:
        if idx == len(num_vars):
            yield vals
            return
        for v in range(1 << width):
            vals[num_vars[idx]] = v
            yield from numeric_assignments(idx + 1, vals)

    for heap_choice in assignments(0, {}):
        for nums in numeric_assignments(0, {}):
            value, derived = ev.run(heap_choice, nums)
            if not value:
                heaps = {n: c.heap for n, c in heap_choice.items()}
                heaps.update(derived)
                g = H.Interpretation(heaps=heaps, numerics=dict(nums))
                return OracleVerdict(False, g)
    return OracleVerdict(True)


def replay_counterexample(vc_formula: F.SlhFormula, g: H.Interpretation,
                          width: int = 8) -> bool:
    """True iff the interpretation falsifies the formula."""
    return not H.eval_formula(vc_formula, g, width=width)
