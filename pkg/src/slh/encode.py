"""Reduction of formula validity to propositional satisfiability.

The validity query for a formula f is turned into a search for a small
countermodel of ¬f: every heap variable is represented by bounded symbolic
tables (pointer array, successor array, node counter) over bit-vector
expressions, heap functions expand to expressions over those tables, and
the resulting constraint system is bit-blasted to CNF.  The bound comes
from the small-model property: counterexample heaps never need more than
2*|P| nodes plus one per allocating function occurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from . import formula as F
from . import heap as H
from .formula import NULL
from .sat import CnfFormula


class EncodeError(Exception):
    """The formula lies outside the encodable fragment."""


class BoundOverflowError(EncodeError):
    def __init__(self, bound: int, width: int):
        self.min_width = max(2, bound.bit_length())
        super().__init__(
            f"node bound {bound} does not fit in {width}-bit node ids; "
            f"need width >= {self.min_width}")


@dataclass
class EncodeConfig:
    width: int = 8
    symmetry: bool = True
    extra_nodes: int = 0

    def __post_init__(self) -> None:
        if self.width < 2:
            raise ValueError("width must be at least 2")
        if self.extra_nodes < 0:
            raise ValueError("extra_nodes must be non-negative")

    @property
    def sentinel(self) -> int:
        return (1 << self.width) - 1


# ---------------------------------------------------------------------------
# Expression DAG (identity-hashed: construction shares subterms)
# ---------------------------------------------------------------------------

class BvExpr:
    __slots__ = ("width",)

    def __init__(self, width: int):
        self.width = width


class BvConst(BvExpr):
    __slots__ = ("value",)

    def __init__(self, value: int, width: int):
        super().__init__(width)
        self.value = value & ((1 << width) - 1)

    def __repr__(self) -> str:
        return f"{self.value}#{self.width}"


class BvVar(BvExpr):
    __slots__ = ("name",)

    def __init__(self, name: str, width: int):
        super().__init__(width)
        self.name = name

    def __repr__(self) -> str:
        return f"{self.name}#{self.width}"


class BvOp(BvExpr):
    """op in {add, sub, mul, udiv, urem}; both args share the width."""

    __slots__ = ("op", "a", "b")

    def __init__(self, op: str, a: BvExpr, b: BvExpr):
        assert a.width == b.width
        super().__init__(a.width)
        self.op = op
        self.a = a
        self.b = b


class BvIte(BvExpr):
    __slots__ = ("cond", "a", "b")

    def __init__(self, cond: "BoolExpr", a: BvExpr, b: BvExpr):
        assert a.width == b.width
        super().__init__(a.width)
        self.cond = cond
        self.a = a
        self.b = b


class BvRead(BvExpr):
    """elems[index]; out-of-range indices read elems[0]."""

    __slots__ = ("elems", "index")

    def __init__(self, elems: tuple[BvExpr, ...], index: BvExpr):
        super().__init__(elems[0].width)
        self.elems = elems
        self.index = index


class BvZext(BvExpr):
    __slots__ = ("arg",)

    def __init__(self, arg: BvExpr, width: int):
        assert width >= arg.width
        super().__init__(width)
        self.arg = arg


class BoolExpr:
    __slots__ = ()


class BoolConst(BoolExpr):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value


TRUE = BoolConst(True)
FALSE = BoolConst(False)


class BoolNot(BoolExpr):
    __slots__ = ("arg",)

    def __init__(self, arg: BoolExpr):
        self.arg = arg


class BoolAnd(BoolExpr):
    __slots__ = ("args",)

    def __init__(self, args: tuple[BoolExpr, ...]):
        self.args = args


class BoolOr(BoolExpr):
    __slots__ = ("args",)

    def __init__(self, args: tuple[BoolExpr, ...]):
        self.args = args


class BoolCmp(BoolExpr):
    """op in {eq, ult, ule, slt, sle}."""

    __slots__ = ("op", "a", "b")

    def __init__(self, op: str, a: BvExpr, b: BvExpr):
        assert a.width == b.width
        self.op = op
        self.a = a
        self.b = b


# -- smart constructors -----------------------------------------------------

def bv(value: int, width: int) -> BvConst:
    return BvConst(value, width)


def mk_add(a: BvExpr, b: BvExpr) -> BvExpr:
    if isinstance(a, BvConst) and isinstance(b, BvConst):
        return bv(a.value + b.value, a.width)
    if isinstance(b, BvConst) and b.value == 0:
        return a
    if isinstance(a, BvConst) and a.value == 0:
        return b
    return BvOp("add", a, b)


def mk_sub(a: BvExpr, b: BvExpr) -> BvExpr:
    if isinstance(a, BvConst) and isinstance(b, BvConst):
        return bv(a.value - b.value, a.width)
    if isinstance(b, BvConst) and b.value == 0:
        return a
    return BvOp("sub", a, b)


def mk_mul(a: BvExpr, b: BvExpr) -> BvExpr:
    if isinstance(a, BvConst) and isinstance(b, BvConst):
        return bv(a.value * b.value, a.width)
    for c, o in ((a, b), (b, a)):
        if isinstance(c, BvConst):
            if c.value == 0:
                return c
            if c.value == 1:
                return o
    return BvOp("mul", a, b)


def mk_udiv(a: BvExpr, b: BvExpr) -> BvExpr:
    if isinstance(a, BvConst) and isinstance(b, BvConst):
        ones = (1 << a.width) - 1
        return bv(ones if b.value == 0 else a.value // b.value, a.width)
    return BvOp("udiv", a, b)


def mk_urem(a: BvExpr, b: BvExpr) -> BvExpr:
    if isinstance(a, BvConst) and isinstance(b, BvConst):
        ones = (1 << a.width) - 1
        return bv(ones if b.value == 0 else a.value % b.value, a.width)
    return BvOp("urem", a, b)


def mk_ite(cond: BoolExpr, a: BvExpr, b: BvExpr) -> BvExpr:
    if isinstance(cond, BoolConst):
        return a if cond.value else b
    if a is b:
        return a
    if isinstance(a, BvConst) and isinstance(b, BvConst) and a.value == b.value:
        return a
    return BvIte(cond, a, b)


def mk_read(elems: tuple[BvExpr, ...], index: BvExpr) -> BvExpr:
    if isinstance(index, BvConst):
        i = index.value
        return elems[i] if i < len(elems) else elems[0]
    first = elems[0]
    if all(e is first for e in elems):
        return first
    return BvRead(elems, index)


def mk_zext(arg: BvExpr, width: int) -> BvExpr:
    if arg.width == width:
        return arg
    if isinstance(arg, BvConst):
        return bv(arg.value, width)
    return BvZext(arg, width)


def mk_not(a: BoolExpr) -> BoolExpr:
    if isinstance(a, BoolConst):
        return FALSE if a.value else TRUE
    if isinstance(a, BoolNot):
        return a.arg
    return BoolNot(a)


def mk_and(*args: BoolExpr) -> BoolExpr:
    flat: list[BoolExpr] = []
    for a in args:
        if isinstance(a, BoolConst):
            if not a.value:
                return FALSE
        elif isinstance(a, BoolAnd):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return BoolAnd(tuple(flat))


def mk_or(*args: BoolExpr) -> BoolExpr:
    flat: list[BoolExpr] = []
    for a in args:
        if isinstance(a, BoolConst):
            if a.value:
                return TRUE
        elif isinstance(a, BoolOr):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return BoolOr(tuple(flat))


def mk_implies(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    return mk_or(mk_not(a), b)


def mk_eq(a: BvExpr, b: BvExpr) -> BoolExpr:
    if a is b:
        return TRUE
    if isinstance(a, BvConst) and isinstance(b, BvConst):
        return TRUE if a.value == b.value else FALSE
    return BoolCmp("eq", a, b)


def mk_ult(a: BvExpr, b: BvExpr) -> BoolExpr:
    if a is b:
        return FALSE
    if isinstance(a, BvConst) and isinstance(b, BvConst):
        return TRUE if a.value < b.value else FALSE
    if isinstance(b, BvConst) and b.value == 0:
        return FALSE
    return BoolCmp("ult", a, b)


def mk_ule(a: BvExpr, b: BvExpr) -> BoolExpr:
    if a is b:
        return TRUE
    if isinstance(a, BvConst) and isinstance(b, BvConst):
        return TRUE if a.value <= b.value else FALSE
    if isinstance(a, BvConst) and a.value == 0:
        return TRUE
    return BoolCmp("ule", a, b)


def mk_addsat(a: BvExpr, b: BvExpr) -> BvExpr:
    """Saturating addition: clamps at the all-ones sentinel, which therefore
    absorbs (INF + x = INF)."""
    ones = bv((1 << a.width) - 1, a.width)
    if isinstance(a, BvConst) and isinstance(b, BvConst):
        return bv(min(a.value + b.value, ones.value), a.width)
    s = mk_add(a, b)
    over = mk_or(mk_ult(s, a), mk_eq(s, ones))
    return mk_ite(over, ones, s)


# ---------------------------------------------------------------------------
# Symbolic heaps and the table-level heap functions
# ---------------------------------------------------------------------------

@dataclass
class SymbolicHeap:
    """Bounded tables for one heap variable.

    Node indices (ptr entries, successor targets, nnodes) use just enough
    bits for the node bound; edge weights use the full formula width.
    """

    ptr: tuple[BvExpr, ...]                     # one node expression per pointer
    succ: tuple[tuple[BvExpr, BvExpr], ...]     # (target, weight) per node slot
    nnodes: BvExpr

    @property
    def size(self) -> int:
        return len(self.succ)

    @property
    def node_width(self) -> int:
        return self.nnodes.width

    def targets(self) -> tuple[BvExpr, ...]:
        return tuple(t for t, _ in self.succ)

    def weights(self) -> tuple[BvExpr, ...]:
        return tuple(w for _, w in self.succ)


def enc_assign(sh: SymbolicHeap, width: int, xi: int,
               yi: int) -> tuple[SymbolicHeap, BoolExpr]:
    ptr = list(sh.ptr)
    ptr[xi] = sh.ptr[yi]
    return SymbolicHeap(tuple(ptr), sh.succ, sh.nnodes), FALSE


def enc_new(sh: SymbolicHeap, width: int, xi: int) -> tuple[SymbolicHeap, BoolExpr]:
    nw = sh.node_width
    n = sh.nnodes
    succ = [sh.succ[0]]
    for j in range(1, sh.size):
        here = mk_eq(n, bv(j, nw))
        t, w = sh.succ[j]
        succ.append((mk_ite(here, bv(0, nw), t), mk_ite(here, bv(1, width), w)))
    ptr = list(sh.ptr)
    ptr[xi] = n
    return SymbolicHeap(tuple(ptr), tuple(succ), mk_add(n, bv(1, nw))), FALSE


def enc_lookup(sh: SymbolicHeap, width: int, xi: int,
               yi: int) -> tuple[SymbolicHeap, BoolExpr]:
    nw = sh.node_width
    src = sh.ptr[yi]
    violation = mk_eq(src, bv(0, nw))
    t = mk_read(sh.targets(), src)
    w = mk_read(sh.weights(), src)
    # a weighted edge is first subdivided so the move is exactly one cell
    needs_split = mk_and(mk_not(violation), mk_not(mk_eq(w, bv(1, width))))
    q = sh.nnodes
    succ = [sh.succ[0]]
    for j in range(1, sh.size):
        jj = bv(j, nw)
        at_src = mk_and(needs_split, mk_eq(src, jj))
        at_new = mk_and(needs_split, mk_eq(q, jj))
        tj, wj = sh.succ[j]
        succ.append((
            mk_ite(at_src, q, mk_ite(at_new, t, tj)),
            mk_ite(at_src, bv(1, width), mk_ite(at_new, mk_sub(w, bv(1, width)), wj)),
        ))
    ptr = list(sh.ptr)
    ptr[xi] = mk_ite(violation, sh.ptr[xi], mk_ite(needs_split, q, t))
    nnodes = mk_ite(needs_split, mk_add(q, bv(1, nw)), q)
    return SymbolicHeap(tuple(ptr), tuple(succ), nnodes), violation


def enc_update(sh: SymbolicHeap, width: int, xi: int,
               yi: int) -> tuple[SymbolicHeap, BoolExpr]:
    nw = sh.node_width
    n = sh.ptr[xi]
    violation = mk_eq(n, bv(0, nw))
    m = sh.ptr[yi]
    write = mk_not(violation)
    succ = [sh.succ[0]]
    for j in range(1, sh.size):
        here = mk_and(write, mk_eq(n, bv(j, nw)))
        tj, wj = sh.succ[j]
        succ.append((mk_ite(here, m, tj), mk_ite(here, bv(1, width), wj)))
    return SymbolicHeap(sh.ptr, tuple(succ), sh.nnodes), violation


ENC_TRANSFORM = {
    "assign": enc_assign,
    "new": enc_new,
    "lookup": enc_lookup,
    "update": enc_update,
}


# ---------------------------------------------------------------------------
# Constraint system
# ---------------------------------------------------------------------------

@dataclass
class BvConstraintSystem:
    width: int
    variables: dict[str, int] = field(default_factory=dict)   # name -> width
    assertions: list[BoolExpr] = field(default_factory=list)

    def new_var(self, name: str, width: Optional[int] = None) -> BvVar:
        w = self.width if width is None else width
        if name in self.variables:
            raise EncodeError(f"duplicate bit-vector variable '{name}'")
        self.variables[name] = w
        return BvVar(name, w)

    def add(self, assertion: BoolExpr) -> None:
        if isinstance(assertion, BoolConst) and assertion.value:
            return
        self.assertions.append(assertion)

    def dump(self) -> str:
        lines = [f"width {self.width}"]
        for name, w in sorted(self.variables.items()):
            lines.append(f"var {name} : bv{w}")
        for a in self.assertions:
            lines.append("assert " + _dump_bool(a))
        return "\n".join(lines)


def _dump_bv(e: BvExpr) -> str:
    if isinstance(e, BvConst):
        return str(e.value)
    if isinstance(e, BvVar):
        return e.name
    if isinstance(e, BvOp):
        return f"({e.op} {_dump_bv(e.a)} {_dump_bv(e.b)})"
    if isinstance(e, BvIte):
        return f"(ite {_dump_bool(e.cond)} {_dump_bv(e.a)} {_dump_bv(e.b)})"
    if isinstance(e, BvZext):
        return f"(zext{e.width} {_dump_bv(e.arg)})"
    assert isinstance(e, BvRead)
    return f"(read [{' '.join(_dump_bv(x) for x in e.elems)}] {_dump_bv(e.index)})"


def _dump_bool(e: BoolExpr) -> str:
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, BoolNot):
        return f"(not {_dump_bool(e.arg)})"
    if isinstance(e, BoolAnd):
        return f"(and {' '.join(_dump_bool(a) for a in e.args)})"
    if isinstance(e, BoolOr):
        return f"(or {' '.join(_dump_bool(a) for a in e.args)})"
    assert isinstance(e, BoolCmp)
    return f"({e.op} {_dump_bv(e.a)} {_dump_bv(e.b)})"


@dataclass
class DecodeMap:
    width: int
    pointer_names: tuple[str, ...]
    heaps: dict[str, SymbolicHeap]
    numerics: dict[str, BvExpr]
    violations: dict[F.Transform, BoolExpr] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Bound planning
# ---------------------------------------------------------------------------

def pointer_names(f: F.SlhFormula) -> tuple[str, ...]:
    others = sorted(d.name for d in f.decls
                    if d.sort is F.Sort.PTR and d.name != NULL)
    return (NULL, *others)


def alloc_count(f: F.SlhFormula) -> int:
    return sum(1 for a in F.atoms(f.root)
               if isinstance(a, F.Transform) and a.kind in ("new", "lookup"))


def plan_bound(f: F.SlhFormula, cfg: EncodeConfig) -> int:
    """Node budget per heap: 2*|P| for a kernel countermodel plus one slot
    per allocating occurrence (new, lookup) plus configured slack."""
    return 2 * len(pointer_names(f)) + alloc_count(f) + cfg.extra_nodes


# ---------------------------------------------------------------------------
# Encoder
# ---------------------------------------------------------------------------

class _Encoder:
    def __init__(self, f: F.SlhFormula, cfg: EncodeConfig):
        self.f = f
        self.cfg = cfg
        self.width = cfg.width
        self.names = pointer_names(f)
        self.pidx = {p: i for i, p in enumerate(self.names)}
        self.n_bound = plan_bound(f, cfg)
        if self.n_bound >= (1 << cfg.width):
            raise BoundOverflowError(self.n_bound, cfg.width)
        self.node_width = max(2, self.n_bound.bit_length())
        self.free_bound = 2 * len(self.names) + cfg.extra_nodes
        self.n_new = sum(1 for a in F.atoms(f.root)
                         if isinstance(a, F.Transform) and a.kind == "new")
        self.sys = BvConstraintSystem(cfg.width)
        self.heaps: dict[str, SymbolicHeap] = {}
        self.numerics: dict[str, BvExpr] = {}
        self.violations: dict[F.Transform, BoolExpr] = {}
        self.definitions: dict[str, F.Transform] = {}
        self.dist_tables: dict[tuple, tuple[BvExpr, ...]] = {}
        self.walk_cache: dict[tuple[str, int], list[BvExpr]] = {}
        self.atom_cache: dict[F.Atom, BoolExpr] = {}
        self.tuple_info: dict[int, tuple[F.Transform, BoolExpr]] = {}
        self.table_base: dict[int, tuple[tuple[BvExpr, ...], BvExpr]] = {}
        self.read_bridged: set[tuple[int, int]] = set()
        self.table_count = 0
        # (heap, target) pairs that get a distance table anyway: encode
        # isPath over them as dist != INF instead of a separate walk, so
        # the solver never has to reconcile the two formulations
        self.has_dist = {(t.heap, t.dst) for a in F.atoms(f.root)
                         if isinstance(a, F.Cmp)
                         for t in _pathlen_terms(a)}

    # -- heap variables ------------------------------------------------

    def classify(self) -> None:
        for a in F.atoms(self.f.root):
            if isinstance(a, F.Transform):
                if a.out in self.definitions:
                    raise EncodeError(
                        f"heap variable '{a.out}' is defined by more than one "
                        f"transformer atom")
                self.definitions[a.out] = a

    def heap_of(self, name: str, pending: Optional[set[str]] = None) -> SymbolicHeap:
        if name in self.heaps:
            return self.heaps[name]
        pending = pending or set()
        if name in pending:
            raise EncodeError(f"cyclic transformer definitions through '{name}'")
        d = self.definitions.get(name)
        if d is None:
            sh = self.build_free(name)
        else:
            base = self.heap_of(d.heap, pending | {name})
            args = [self.pidx[p] for p in d.args]
            sh, violation = ENC_TRANSFORM[d.kind](base, self.width, *args)
            self.violations[d] = violation
            if d.kind != "assign":  # assign shares the successor tuple
                self.tuple_info[id(sh.succ)] = (d, violation)
                self._derived_wf(sh)
        self.heaps[name] = sh
        return sh

    def _derived_wf(self, sh: SymbolicHeap) -> None:
        """Transformers preserve well-formedness; assert it on the derived
        tables so walks and reads stay range-bounded without re-deriving it
        through the write conditionals."""
        w, nw = self.width, sh.node_width
        sys = self.sys
        sys.add(mk_not(mk_eq(sh.nnodes, bv(0, nw))))
        sys.add(mk_ule(sh.nnodes, bv(sh.size, nw)))
        for p in sh.ptr[1:]:
            sys.add(mk_ult(p, sh.nnodes))
        for j in range(1, sh.size):
            alloc = mk_ult(bv(j, nw), sh.nnodes)
            t, wt = sh.succ[j]
            sys.add(mk_implies(alloc, mk_and(mk_ult(t, sh.nnodes),
                                             mk_not(mk_eq(wt, bv(0, w))))))
            sys.add(mk_implies(mk_not(alloc), mk_and(mk_eq(t, bv(0, nw)),
                                                     mk_eq(wt, bv(1, w)))))

    def build_free(self, name: str) -> SymbolicHeap:
        w, nw, nb = self.width, self.node_width, self.n_bound
        sys = self.sys
        zero, one = bv(0, nw), bv(1, nw)
        nnodes = sys.new_var(f"{name}.n", nw)
        sys.add(mk_not(mk_eq(nnodes, zero)))
        sys.add(mk_ule(nnodes, bv(min(nb, self.free_bound), nw)))
        ptr: list[BvExpr] = [zero]
        for i in range(1, len(self.names)):
            p = sys.new_var(f"{name}.p{i}", nw)
            sys.add(mk_ult(p, nnodes))
            ptr.append(p)
        succ: list[tuple[BvExpr, BvExpr]] = [(zero, bv(1, w))]
        for j in range(1, nb):
            t = sys.new_var(f"{name}.s{j}", nw)
            wt = sys.new_var(f"{name}.w{j}", w)
            alloc = mk_ult(bv(j, nw), nnodes)
            sys.add(mk_implies(alloc, mk_and(mk_ult(t, nnodes),
                                             mk_not(mk_eq(wt, bv(0, w))))))
            sys.add(mk_implies(mk_not(alloc), mk_and(mk_eq(t, zero),
                                                     mk_eq(wt, bv(1, w)))))
            succ.append((t, wt))
        sh = SymbolicHeap(tuple(ptr), tuple(succ), nnodes)
        self._admissibility(name, sh)
        if self.cfg.symmetry:
            for c in symmetry_constraints(sh, len(self.names)):
                sys.add(c)
        return sh

    def _admissibility(self, name: str, sh: SymbolicHeap) -> None:
        """Cap the total edge weight so the all-ones sentinel can only mean
        an unreachable target, never a huge finite distance.  Allocating
        transformers add unit edges, so reserve room for them."""
        w = self.width
        ext = w + max(1, self.n_bound.bit_length())
        total: BvExpr = bv(0, ext)
        for j in range(1, sh.size):
            alloc = mk_ult(bv(j, sh.node_width), sh.nnodes)
            wj = mk_ite(alloc, sh.succ[j][1], bv(0, w))
            total = mk_add(total, mk_zext(wj, ext))
        cap = self.cfg.sentinel - 1 - self.n_new
        self.sys.add(mk_ule(total, bv(max(cap, 0), ext)))

    # -- observers -------------------------------------------------------

    def walk(self, hname: str, start: BvExpr) -> list[BvExpr]:
        """Successor chain start, succ(start), succ^2(start), ... shared by
        reachability and circularity encodings."""
        key = (hname, id(start))
        chain = self.walk_cache.get(key)
        if chain is not None:
            return chain
        sh = self.heap_of(hname)
        targets = sh.targets()
        chain = [start]
        cur = start
        for _ in range(sh.size):
            cur = mk_read(targets, cur)
            chain.append(cur)
        self.walk_cache[key] = chain
        return chain

    def enc_reach(self, hname: str, x: str, y: str) -> BoolExpr:
        """Exact reachability: the walk from x hits y's node within the
        node bound.  Agrees with pathLength != INF because admissible heaps
        cannot saturate a finite distance."""
        sh = self.heap_of(hname)
        tgt = sh.ptr[self.pidx[y]]
        chain = self.walk(hname, sh.ptr[self.pidx[x]])
        return mk_or(*[mk_eq(c, tgt) for c in chain])

    def _tgt_key(self, tgt: BvExpr):
        if isinstance(tgt, BvConst):
            return ("c", tgt.value)
        return ("e", id(tgt))

    def dist_table(self, hname: str, y: str) -> tuple[BvExpr, ...]:
        sh = self.heap_of(hname)
        tgt = sh.ptr[self.pidx[y]]
        # keyed by successor-table identity: assignment-derived heaps share
        # their base heap's tables outright
        key = (id(sh.succ), self._tgt_key(tgt))
        table = self.dist_tables.get(key)
        if table is not None:
            return table
        w = self.width
        tid = self.table_count
        self.table_count += 1
        entries = tuple(self.sys.new_var(f"{hname}.d{tid}.{n}")
                        for n in range(sh.size))
        # Distance-to-target per node, defined by one equation each.  With
        # positive weights and saturating sums the fixpoint is unique: the
        # saturating walk distance, all-ones when the target is unreached.
        # The weight cap keeps finite distances strictly below the sentinel,
        # so "is infinite" propagates both ways as a plain biconditional;
        # assert it so the solver never untangles saturated sums for it.
        ones = bv(self.cfg.sentinel, w)
        for n in range(sh.size):
            t_n, w_n = sh.succ[n]
            nxt = mk_read(entries, t_n)
            through = mk_addsat(w_n, nxt)
            at_tgt = mk_eq(bv(n, sh.node_width), tgt)
            self.sys.add(mk_eq(entries[n], mk_ite(at_tgt, bv(0, w), through)))
            here_inf = mk_eq(entries[n], ones)
            next_inf = mk_eq(nxt, ones)
            self.sys.add(mk_implies(mk_not(at_tgt), _mk_iff(here_inf, next_inf)))
        self.dist_tables[key] = entries
        self._table_lemmas(hname, sh, tgt, y, entries)
        return entries

    def _table_lemmas(self, hname: str, sh: SymbolicHeap, tgt: BvExpr, y: str,
                      entries: tuple[BvExpr, ...]) -> None:
        """Redundant facts that follow from the defining equations but save
        the solver from rediscovering them.

        Allocation and lookup preserve every observation on pre-existing
        nodes (lookup at most subdivides one edge), so derived tables agree
        with the base heap's pointwise there.  After a lookup the
        dereferenced node steps to the result in exactly one unit, and a
        freshly allocated node sits one unit before null.
        """
        info = self.tuple_info.get(id(sh.succ))
        if info is None:
            return
        d, violation = info
        if d.kind not in ("new", "lookup"):
            return
        w = self.width
        base = self.heaps[d.heap]
        if y != d.args[0]:
            base_entries = self.dist_table(d.heap, y)
            if base_entries is not entries:
                self.table_base[id(entries)] = (base_entries, base.nnodes)
                for j in range(min(len(base_entries), len(entries))):
                    guard = mk_ult(bv(j, base.node_width), base.nnodes)
                    self.sys.add(mk_implies(
                        guard, mk_eq(entries[j], base_entries[j])))
        if d.kind == "lookup":
            deref = base.ptr[self.pidx[d.args[1]]]
            result = sh.ptr[self.pidx[d.args[0]]]
            at_tgt = mk_eq(deref, tgt)
            at_deref = self.read_table(entries, deref)
            at_result = self.read_table(entries, result)
            step = mk_addsat(bv(1, w), at_result)
            ones = bv(self.cfg.sentinel, w)
            self.sys.add(mk_implies(
                mk_not(violation),
                mk_eq(at_deref, mk_ite(at_tgt, bv(0, w), step))))
            self.sys.add(mk_implies(
                mk_and(mk_not(violation), mk_not(at_tgt)),
                _mk_iff(mk_eq(at_deref, ones), mk_eq(at_result, ones))))
        else:  # new
            fresh = sh.ptr[self.pidx[d.args[0]]]
            at_tgt = mk_eq(fresh, tgt)
            via_null = mk_addsat(bv(1, w), entries[0])
            self.sys.add(mk_eq(self.read_table(entries, fresh),
                               mk_ite(at_tgt, bv(0, w), via_null)))

    def read_table(self, table: tuple[BvExpr, ...], idx: BvExpr) -> BvExpr:
        """Read a distance table, shadowing the read down the bridge chain:
        at indices that already existed in the base heap the derived read
        equals the base read."""
        out = mk_read(table, idx)
        cur = table
        read_here = out
        while True:
            nxt = self.table_base.get(id(cur))
            if nxt is None:
                break
            base_entries, base_nnodes = nxt
            key = (id(base_entries), id(idx))
            base_read = mk_read(base_entries, idx)
            if key not in self.read_bridged:
                self.read_bridged.add(key)
                self.sys.add(mk_implies(mk_ult(idx, base_nnodes),
                                        mk_eq(read_here, base_read)))
            cur = base_entries
            read_here = base_read
        return out

    def enc_path_length(self, hname: str, x: str, y: str) -> BvExpr:
        sh = self.heap_of(hname)
        table = self.dist_table(hname, y)
        return self.read_table(table, sh.ptr[self.pidx[x]])

    def enc_circular(self, hname: str, x: str) -> BoolExpr:
        sh = self.heap_of(hname)
        start = sh.ptr[self.pidx[x]]
        chain = self.walk(hname, start)
        hits = [mk_eq(c, start) for c in chain[1:]]
        return mk_and(mk_not(mk_eq(start, bv(0, sh.node_width))),
                      mk_or(*hits))

    # -- terms and atoms ---------------------------------------------------

    def enc_term(self, t: F.NumTerm) -> BvExpr:
        w = self.width
        ones = bv(self.cfg.sentinel, w)
        if isinstance(t, F.NumConst):
            return bv(t.value, w)
        if isinstance(t, F.InfConst):
            return ones
        if isinstance(t, F.NumVar):
            v = self.numerics.get(t.name)
            if v is None:
                v = self.sys.new_var(f"num.{t.name}")
                self.numerics[t.name] = v
            return v
        if isinstance(t, F.PathLen):
            return self.enc_path_length(t.heap, t.src, t.dst)
        assert isinstance(t, F.NumBinOp)
        a = self.enc_term(t.lhs)
        b = self.enc_term(t.rhs)
        if t.op == "+":
            return mk_addsat(a, b)
        if t.op == "-":
            return mk_ite(mk_eq(a, ones), ones, mk_sub(a, b))
        if t.op == "*":
            return mk_mul(a, b)
        if t.op == "/":
            return mk_udiv(a, b)
        assert t.op == "%"
        return mk_urem(a, b)

    def enc_atom(self, a: F.Atom) -> BoolExpr:
        cached = self.atom_cache.get(a)
        if cached is not None:
            return cached
        out = self._enc_atom(a)
        self.atom_cache[a] = out
        return out

    def _enc_atom(self, a: F.Atom) -> BoolExpr:
        w = self.width
        if isinstance(a, F.Alias):
            sh = self.heap_of(a.heap)
            return mk_eq(sh.ptr[self.pidx[a.x]], sh.ptr[self.pidx[a.y]])
        if isinstance(a, F.IsNull):
            sh = self.heap_of(a.heap)
            return mk_eq(sh.ptr[self.pidx[a.x]], bv(0, sh.node_width))
        if isinstance(a, F.IsPath):
            if (a.heap, a.y) in self.has_dist:
                d = self.enc_path_length(a.heap, a.x, a.y)
                return mk_not(mk_eq(d, bv(self.cfg.sentinel, w)))
            return self.enc_reach(a.heap, a.x, a.y)
        if isinstance(a, F.Circular):
            return self.enc_circular(a.heap, a.x)
        if isinstance(a, F.Transform):
            self.heap_of(a.out)  # forces the definition and violation bit
            return mk_not(self.violations[a])
        assert isinstance(a, F.Cmp)
        x = self.enc_term(a.lhs)
        y = self.enc_term(a.rhs)
        if a.op == "=":
            return mk_eq(x, y)
        if a.op == "!=":
            return mk_not(mk_eq(x, y))
        lt = "slt" if a.signed else "ult"
        le = "sle" if a.signed else "ule"
        if a.op == "<":
            return BoolCmp(lt, x, y) if not _both_const(x, y) else _const_cmp(a, x, y)
        if a.op == "<=":
            return BoolCmp(le, x, y) if not _both_const(x, y) else _const_cmp(a, x, y)
        if a.op == ">":
            return BoolCmp(lt, y, x) if not _both_const(x, y) else _const_cmp(a, x, y)
        assert a.op == ">="
        return BoolCmp(le, y, x) if not _both_const(x, y) else _const_cmp(a, x, y)

    def enc_node(self, n: F.Node) -> BoolExpr:
        if isinstance(n, F.AtomNode):
            return self.enc_atom(n.atom)
        if isinstance(n, F.BoolLit):
            return TRUE if n.value else FALSE
        if isinstance(n, F.Not):
            return mk_not(self.enc_node(n.arg))
        if isinstance(n, F.And):
            return mk_and(self.enc_node(n.lhs), self.enc_node(n.rhs))
        if isinstance(n, F.Or):
            return mk_or(self.enc_node(n.lhs), self.enc_node(n.rhs))
        if isinstance(n, F.Implies):
            return mk_or(mk_not(self.enc_node(n.lhs)), self.enc_node(n.rhs))
        assert isinstance(n, F.Iff)
        a = self.enc_node(n.lhs)
        b = self.enc_node(n.rhs)
        return mk_and(mk_or(mk_not(a), b), mk_or(a, mk_not(b)))

    def run(self) -> tuple[BvConstraintSystem, DecodeMap]:
        self.classify()
        for d in self.f.decls:
            if d.sort is F.Sort.HEAP:
                self.heap_of(d.name)
            elif d.sort is F.Sort.NUM and d.name not in self.numerics:
                self.numerics[d.name] = self.sys.new_var(f"num.{d.name}")
        goal = mk_not(self.enc_node(self.f.root))
        self.sys.add(goal)
        dm = DecodeMap(self.width, self.names, dict(self.heaps),
                       dict(self.numerics), dict(self.violations))
        return self.sys, dm


def _mk_iff(a: BoolExpr, b: BoolExpr) -> BoolExpr:
    return mk_and(mk_or(mk_not(a), b), mk_or(a, mk_not(b)))


def _pathlen_terms(a: F.Cmp) -> list[F.PathLen]:
    out: list[F.PathLen] = []
    stack: list[F.NumTerm] = [a.lhs, a.rhs]
    while stack:
        t = stack.pop()
        if isinstance(t, F.PathLen):
            out.append(t)
        elif isinstance(t, F.NumBinOp):
            stack.append(t.lhs)
            stack.append(t.rhs)
    return out


def _both_const(a: BvExpr, b: BvExpr) -> bool:
    return isinstance(a, BvConst) and isinstance(b, BvConst)


def _const_cmp(a: F.Cmp, x: BvExpr, y: BvExpr) -> BoolExpr:
    assert isinstance(x, BvConst) and isinstance(y, BvConst)
    u, v = x.value, y.value
    if a.signed:
        half = 1 << (x.width - 1)
        u = u - (1 << x.width) if u >= half else u
        v = v - (1 << x.width) if v >= half else v
    return BoolConst({"<": u < v, "<=": u <= v, ">": u > v, ">=": u >= v}[a.op])


def symmetry_constraints(sh: SymbolicHeap, npointers: int) -> list[BoolExpr]:
    """Admit exactly one representative per isomorphism class of reachable
    heaps: walking the pointers in index order, every newly met node must
    carry the next unused number, and every allocated node must be met."""
    w = sh.node_width
    one = bv(1, w)
    out: list[BoolExpr] = []
    maxd: BvExpr = bv(0, w)
    targets = sh.targets()
    for i in range(1, npointers):
        cur = sh.ptr[i]
        frontier = mk_add(maxd, one)
        out.append(mk_ule(cur, frontier))
        fresh = mk_eq(cur, frontier)
        maxd = mk_ite(fresh, frontier, maxd)
        active = fresh
        for _ in range(1, sh.size):
            nxt = mk_read(targets, cur)
            frontier = mk_add(maxd, one)
            out.append(mk_implies(active, mk_ule(nxt, frontier)))
            fresh = mk_and(active, mk_eq(nxt, frontier))
            maxd = mk_ite(fresh, frontier, maxd)
            cur = nxt
            active = fresh
    out.append(mk_eq(mk_add(maxd, one), sh.nnodes))
    return out


def encode_validity(f: F.SlhFormula,
                    cfg: Optional[EncodeConfig] = None
                    ) -> tuple[BvConstraintSystem, DecodeMap]:
    """Build constraints satisfiable iff ¬f has a model with every heap of
    at most plan_bound(f) nodes."""
    return _Encoder(f, cfg or EncodeConfig()).run()


# ---------------------------------------------------------------------------
# Expression evaluation (shared by the decoder and the blaster tests)
# ---------------------------------------------------------------------------

def eval_bv(e: BvExpr, env: dict[str, int],
            memo: Optional[dict[int, int]] = None) -> int:
    if memo is None:
        memo = {}
    key = id(e)
    got = memo.get(key)
    if got is not None:
        return got
    mask = (1 << e.width) - 1
    if isinstance(e, BvConst):
        v = e.value
    elif isinstance(e, BvVar):
        v = env.get(e.name, 0) & mask
    elif isinstance(e, BvOp):
        a = eval_bv(e.a, env, memo)
        b = eval_bv(e.b, env, memo)
        if e.op == "add":
            v = (a + b) & mask
        elif e.op == "sub":
            v = (a - b) & mask
        elif e.op == "mul":
            v = (a * b) & mask
        elif e.op == "udiv":
            v = mask if b == 0 else a // b
        else:
            v = mask if b == 0 else a % b
    elif isinstance(e, BvIte):
        v = eval_bv(e.a if eval_bool(e.cond, env, memo) else e.b, env, memo)
    elif isinstance(e, BvZext):
        v = eval_bv(e.arg, env, memo)
    else:
        assert isinstance(e, BvRead)
        i = eval_bv(e.index, env, memo)
        elem = e.elems[i] if i < len(e.elems) else e.elems[0]
        v = eval_bv(elem, env, memo)
    memo[key] = v
    return v


def eval_bool(e: BoolExpr, env: dict[str, int],
              memo: Optional[dict[int, int]] = None) -> bool:
    if memo is None:
        memo = {}
    key = id(e)
    got = memo.get(key)
    if got is not None:
        return bool(got)
    if isinstance(e, BoolConst):
        v = e.value
    elif isinstance(e, BoolNot):
        v = not eval_bool(e.arg, env, memo)
    elif isinstance(e, BoolAnd):
        v = all(eval_bool(a, env, memo) for a in e.args)
    elif isinstance(e, BoolOr):
        v = any(eval_bool(a, env, memo) for a in e.args)
    else:
        assert isinstance(e, BoolCmp)
        a = eval_bv(e.a, env, memo)
        b = eval_bv(e.b, env, memo)
        if e.op == "eq":
            v = a == b
        elif e.op == "ult":
            v = a < b
        elif e.op == "ule":
            v = a <= b
        else:
            half = 1 << (e.a.width - 1)
            full = 1 << e.a.width
            sa = a - full if a >= half else a
            sb = b - full if b >= half else b
            v = sa < sb if e.op == "slt" else sa <= sb
    memo[key] = int(v)
    return v


# ---------------------------------------------------------------------------
# Bit-blasting
# ---------------------------------------------------------------------------

Bit = Union[bool, int]  # constant or DIMACS-style literal


class _Blaster:
    def __init__(self) -> None:
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.bv_memo: dict[int, list[Bit]] = {}
        self.bool_memo: dict[int, Bit] = {}
        self.var_bits: dict[str, list[Bit]] = {}
        self.div_memo: dict[tuple[int, int], tuple[list[Bit], list[Bit]]] = {}
        self.trivially_false = False

    # -- CNF plumbing ---------------------------------------------------

    def new_lit(self) -> int:
        self.nvars += 1
        return self.nvars

    def add(self, clause: list[Bit]) -> None:
        out: list[int] = []
        for lit in clause:
            if lit is True:
                return
            if lit is False:
                continue
            out.append(lit)
        if not out:
            self.trivially_false = True
            return
        self.clauses.append(out)

    # -- gates ------------------------------------------------------------

    def _not(self, a: Bit) -> Bit:
        return (not a) if isinstance(a, bool) else -a

    def _and2(self, a: Bit, b: Bit) -> Bit:
        if a is False or b is False:
            return False
        if a is True:
            return b
        if b is True:
            return a
        if a == b:
            return a
        if a == -b:
            return False
        t = self.new_lit()
        self.add([-t, a])
        self.add([-t, b])
        self.add([t, self._not(a), self._not(b)])
        return t

    def _or2(self, a: Bit, b: Bit) -> Bit:
        return self._not(self._and2(self._not(a), self._not(b)))

    def _xor2(self, a: Bit, b: Bit) -> Bit:
        if isinstance(a, bool):
            return self._not(b) if a else b
        if isinstance(b, bool):
            return self._not(a) if b else a
        if a == b:
            return False
        if a == -b:
            return True
        t = self.new_lit()
        self.add([-t, a, b])
        self.add([-t, -a, -b])
        self.add([t, -a, b])
        self.add([t, a, -b])
        return t

    def _mux(self, c: Bit, a: Bit, b: Bit) -> Bit:
        """c ? a : b"""
        if isinstance(c, bool):
            return a if c else b
        if a == b:
            return a
        if isinstance(a, bool) and isinstance(b, bool):
            return c if a else self._not(c)
        t = self.new_lit()
        self.add([-c, self._not(a), t])
        self.add([-c, a, -t])
        self.add([c, self._not(b), t])
        self.add([c, b, -t])
        return t

    def big_and(self, bits: list[Bit]) -> Bit:
        parts: list[int] = []
        for b in bits:
            if b is False:
                return False
            if b is True:
                continue
            parts.append(b)
        if not parts:
            return True
        if len(parts) == 1:
            return parts[0]
        t = self.new_lit()
        for p in parts:
            self.add([-t, p])
        self.add([t] + [-p for p in parts])
        return t

    def big_or(self, bits: list[Bit]) -> Bit:
        return self._not(self.big_and([self._not(b) for b in bits]))

    def _full_adder(self, a: Bit, b: Bit, c: Bit) -> tuple[Bit, Bit]:
        consts = [x for x in (a, b, c) if isinstance(x, bool)]
        if len(consts) >= 2:
            lits = [x for x in (a, b, c) if not isinstance(x, bool)]
            ones = sum(1 for x in consts if x)
            if not lits:
                return ones % 2 == 1, ones >= 2
            lit = lits[0]
            if ones == 0:
                return lit, False
            if ones == 1:
                return self._not(lit), lit
            return lit, True
        s = self._xor2(self._xor2(a, b), c)
        carry = self._or2(self._and2(a, b),
                          self._or2(self._and2(a, c), self._and2(b, c)))
        return s, carry

    def _add_bits(self, a: list[Bit], b: list[Bit],
                  cin: Bit = False) -> tuple[list[Bit], Bit]:
        out: list[Bit] = []
        c = cin
        for x, y in zip(a, b):
            s, c = self._full_adder(x, y, c)
            out.append(s)
        return out, c

    def _sub_bits(self, a: list[Bit], b: list[Bit]) -> list[Bit]:
        nb = [self._not(x) for x in b]
        out, _ = self._add_bits(a, nb, True)
        return out

    def _mul_bits(self, a: list[Bit], b: list[Bit]) -> list[Bit]:
        w = len(a)
        acc: list[Bit] = [False] * w
        for i in range(w):
            if a[i] is False:
                continue
            row: list[Bit] = [False] * i
            row += [self._and2(a[i], b[j]) for j in range(w - i)]
            acc, _ = self._add_bits(acc, row)
        return acc

    def _ult_bits(self, a: list[Bit], b: list[Bit]) -> Bit:
        lt: Bit = False
        for x, y in zip(a, b):
            eq = self._not(self._xor2(x, y))
            lt = self._or2(self._and2(self._not(x), y), self._and2(eq, lt))
        return lt

    def _eq_bits(self, a: list[Bit], b: list[Bit]) -> Bit:
        return self.big_and([self._not(self._xor2(x, y))
                             for x, y in zip(a, b)])

    # -- expressions --------------------------------------------------------

    def const_bits(self, value: int, width: int) -> list[Bit]:
        return [bool((value >> i) & 1) for i in range(width)]

    def var_bits_for(self, name: str, width: int) -> list[Bit]:
        bits = self.var_bits.get(name)
        if bits is None:
            bits = [self.new_lit() for _ in range(width)]
            self.var_bits[name] = bits
        return bits

    def blast_bv(self, e: BvExpr) -> list[Bit]:
        key = id(e)
        got = self.bv_memo.get(key)
        if got is not None:
            return got
        if isinstance(e, BvConst):
            bits = self.const_bits(e.value, e.width)
        elif isinstance(e, BvVar):
            bits = self.var_bits_for(e.name, e.width)
        elif isinstance(e, BvZext):
            inner = self.blast_bv(e.arg)
            bits = inner + [False] * (e.width - e.arg.width)
        elif isinstance(e, BvIte):
            c = self.blast_bool(e.cond)
            a = self.blast_bv(e.a)
            b = self.blast_bv(e.b)
            bits = [self._mux(c, x, y) for x, y in zip(a, b)]
        elif isinstance(e, BvRead):
            bits = self._blast_read(e)
        else:
            assert isinstance(e, BvOp)
            a = self.blast_bv(e.a)
            b = self.blast_bv(e.b)
            if e.op == "add":
                bits, _ = self._add_bits(a, b)
            elif e.op == "sub":
                bits = self._sub_bits(a, b)
            elif e.op == "mul":
                bits = self._mul_bits(a, b)
            else:
                q, r = self._divmod(e.a, e.b)
                bits = q if e.op == "udiv" else r
        self.bv_memo[key] = bits
        return bits

    def _divmod(self, ae: BvExpr, be: BvExpr) -> tuple[list[Bit], list[Bit]]:
        """Quotient/remainder as definitionally constrained fresh vectors:
        b = 0 forces the all-ones convention, otherwise q*b + r = a with
        r < b pins the Euclidean pair (checked at double width, where the
        product cannot wrap)."""
        key = (id(ae), id(be))
        got = self.div_memo.get(key)
        if got is not None:
            return got
        a = self.blast_bv(ae)
        b = self.blast_bv(be)
        w = len(a)
        q = [self.new_lit() for _ in range(w)]
        r = [self.new_lit() for _ in range(w)]
        bnz = self.big_or(list(b))
        ext = [False] * w
        prod = self._mul_bits(q + ext, b + ext)
        total, _ = self._add_bits(prod, r + ext)
        eq_a = self._eq_bits(total, a + ext)
        r_lt_b = self._ult_bits(r, b)
        self.add([self._not(bnz), eq_a])
        self.add([self._not(bnz), r_lt_b])
        for bit in q + r:
            self.add([bnz, bit])
        self.div_memo[key] = (q, r)
        return q, r

    def _blast_read(self, e: BvRead) -> list[Bit]:
        idx = self.blast_bv(e.index)
        width = e.width
        out = [self.new_lit() for _ in range(width)]
        iw = len(idx)
        for j, elem in enumerate(e.elems):
            if j >= (1 << iw):
                break
            sel_mismatch: list[Bit] = []
            skip = False
            for i in range(iw):
                want = bool((j >> i) & 1)
                bit = idx[i]
                if isinstance(bit, bool):
                    if bit != want:
                        skip = True
                        break
                else:
                    sel_mismatch.append(-bit if want else bit)
            if skip:
                continue
            ebits = self.blast_bv(elem)
            for i in range(width):
                eb = ebits[i]
                if eb is True:
                    self.add(sel_mismatch + [out[i]])
                elif eb is False:
                    self.add(sel_mismatch + [-out[i]])
                else:
                    self.add(sel_mismatch + [-out[i], eb])
                    self.add(sel_mismatch + [out[i], -eb])
        return out

    def blast_bool(self, e: BoolExpr) -> Bit:
        key = id(e)
        got = self.bool_memo.get(key)
        if got is not None:
            return got
        if isinstance(e, BoolConst):
            bit: Bit = e.value
        elif isinstance(e, BoolNot):
            bit = self._not(self.blast_bool(e.arg))
        elif isinstance(e, BoolAnd):
            bit = self.big_and([self.blast_bool(a) for a in e.args])
        elif isinstance(e, BoolOr):
            bit = self.big_or([self.blast_bool(a) for a in e.args])
        else:
            assert isinstance(e, BoolCmp)
            a = self.blast_bv(e.a)
            b = self.blast_bv(e.b)
            if e.op in ("slt", "sle"):
                a = a[:-1] + [self._not(a[-1])]
                b = b[:-1] + [self._not(b[-1])]
            if e.op == "eq":
                bit = self._eq_bits(a, b)
            elif e.op in ("ult", "slt"):
                bit = self._ult_bits(a, b)
            else:
                bit = self._not(self._ult_bits(b, a))
        self.bool_memo[key] = bit
        return bit

    def assert_true(self, e: BoolExpr) -> None:
        if isinstance(e, BoolConst):
            if not e.value:
                self.trivially_false = True
            return
        if isinstance(e, BoolAnd):
            for a in e.args:
                self.assert_true(a)
            return
        if isinstance(e, BoolOr):
            self.add([self.blast_bool(a) for a in e.args])
            return
        self.add([self.blast_bool(e)])


@dataclass
class BitMap:
    """Recovers bit-vector values from a boolean assignment."""

    bits: dict[str, list[Bit]]

    def value(self, name: str, assignment: dict[int, bool]) -> int:
        out = 0
        for i, b in enumerate(self.bits.get(name, [])):
            if b is True or (not isinstance(b, bool)
                             and assignment.get(abs(b), False) == (b > 0)):
                out |= 1 << i
        return out

    def env(self, assignment: dict[int, bool]) -> dict[str, int]:
        return {name: self.value(name, assignment) for name in self.bits}


def bitblast(sys: BvConstraintSystem,
             width: Optional[int] = None) -> tuple[CnfFormula, BitMap]:
    """Equisatisfiable CNF via structural translation with fresh definition
    variables; BitMap maps every bit-vector variable back to its literals."""
    bl = _Blaster()
    for name, w in sys.variables.items():
        bl.var_bits_for(name, w)
    for a in sys.assertions:
        bl.assert_true(a)
    if bl.trivially_false:
        v = bl.new_lit()
        bl.clauses.append([v])
        bl.clauses.append([-v])
    if bl.nvars == 0:
        bl.new_lit()
        bl.clauses.append([1, -1])
    return CnfFormula(bl.nvars, bl.clauses), BitMap(dict(bl.var_bits))


# ---------------------------------------------------------------------------
# Model decoding
# ---------------------------------------------------------------------------

class DecodeError(Exception):
    """A satisfying assignment decoded to garbage: an encoder bug."""


def decode_model(assignment: dict[int, bool], dm: DecodeMap,
                 bm: BitMap) -> H.Interpretation:
    env = bm.env(assignment)
    memo: dict[int, int] = {}
    heaps: dict[str, H.HeapModel] = {}
    for name, sh in dm.heaps.items():
        nnodes = eval_bv(sh.nnodes, env, memo)
        if not 1 <= nnodes <= sh.size:
            raise DecodeError(f"heap '{name}' has node count {nnodes}")
        succ: dict[int, tuple[int, int]] = {}
        for j in range(1, nnodes):
            t = eval_bv(sh.succ[j][0], env, memo)
            w = eval_bv(sh.succ[j][1], env, memo)
            if t >= nnodes or w < 1:
                raise DecodeError(f"heap '{name}' slot {j} decodes to "
                                  f"({t}, {w}) with {nnodes} nodes")
            succ[j] = (t, w)
        labels: dict[str, int] = {}
        for i, p in enumerate(dm.pointer_names):
            v = eval_bv(sh.ptr[i], env, memo)
            if v >= nnodes:
                raise DecodeError(f"pointer '{p}' decodes outside heap '{name}'")
            labels[p] = v
        heaps[name] = H.HeapModel(range(nnodes), succ, labels)
    numerics = {name: eval_bv(e, env, memo) for name, e in dm.numerics.items()}
    return H.Interpretation(heaps=heaps, numerics=numerics)
