"""Syntax of formulas over singly-linked heaps with length.

A formula is a boolean combination of heap atoms (alias, isPath, isNull,
circular, the four heap transformers) and comparisons between bit-vector
terms, together with a declaration block giving every variable a sort.
The pointer name ``null`` is implicitly declared and always denotes the
null vertex.  Validity queries treat the declared variables as
universally quantified.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional


class FormulaError(ValueError):
    """Base class for formula construction and parsing failures."""


class ParseError(FormulaError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class SortError(FormulaError):
    """A term or atom mixes sorts, or an atom is ill-formed."""


class UndeclaredVariableError(FormulaError):
    def __init__(self, name: str, line: int = 0, col: int = 0):
        loc = f"{line}:{col}: " if line else ""
        super().__init__(f"{loc}undeclared variable '{name}'")
        self.name = name


class Sort(enum.Enum):
    HEAP = "heap"
    PTR = "ptr"
    NUM = "bv"


@dataclass(frozen=True)
class VarId:
    name: str
    sort: Sort

    def __repr__(self) -> str:
        return f"{self.sort.value} {self.name}"


NULL = "null"


# ---------------------------------------------------------------------------
# Numeric terms
# ---------------------------------------------------------------------------

class NumTerm:
    """Base class for bit-vector terms."""

    __slots__ = ()


@dataclass(frozen=True)
class NumConst(NumTerm):
    value: int


@dataclass(frozen=True)
class InfConst(NumTerm):
    """The all-ones sentinel; prints as INF and compares greatest."""


@dataclass(frozen=True)
class NumVar(NumTerm):
    name: str


@dataclass(frozen=True)
class NumBinOp(NumTerm):
    op: str  # one of + - * / %
    lhs: NumTerm
    rhs: NumTerm


@dataclass(frozen=True)
class PathLen(NumTerm):
    heap: str
    src: str
    dst: str


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------

class Atom:
    __slots__ = ()


@dataclass(frozen=True)
class Alias(Atom):
    heap: str
    x: str
    y: str


@dataclass(frozen=True)
class IsPath(Atom):
    heap: str
    x: str
    y: str


@dataclass(frozen=True)
class IsNull(Atom):
    heap: str
    x: str


@dataclass(frozen=True)
class Circular(Atom):
    heap: str
    x: str


TRANSFORMER_KINDS = ("new", "assign", "lookup", "update")


@dataclass(frozen=True)
class Transform(Atom):
    """``out = kind(heap, *args)`` where ``out`` and ``heap`` are heap vars."""

    kind: str
    out: str
    heap: str
    args: tuple[str, ...]


CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Cmp(Atom):
    op: str
    lhs: NumTerm
    rhs: NumTerm
    signed: bool = False


# ---------------------------------------------------------------------------
# Boolean skeleton
# ---------------------------------------------------------------------------

class Node:
    __slots__ = ()

    def __and__(self, other: "Node") -> "Node":
        return And(self, other)

    def __or__(self, other: "Node") -> "Node":
        return Or(self, other)

    def __invert__(self) -> "Node":
        return Not(self)


@dataclass(frozen=True)
class AtomNode(Node):
    atom: Atom


@dataclass(frozen=True)
class Not(Node):
    arg: Node


@dataclass(frozen=True)
class And(Node):
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class Or(Node):
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class Implies(Node):
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class Iff(Node):
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class BoolLit(Node):
    """Internal constant; the surface grammar has no boolean literals."""

    value: bool


def conjoin(parts: list[Node]) -> Node:
    """Left fold of ∧ over ``parts``; BoolLit(True) for the empty list."""
    if not parts:
        return BoolLit(True)
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


# ---------------------------------------------------------------------------
# Formula container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlhFormula:
    decls: tuple[VarId, ...]
    root: Node

    def sort_of(self, name: str) -> Optional[Sort]:
        for v in self.decls:
            if v.name == name:
                return v.sort
        return None


def atoms(node: Node) -> Iterator[Atom]:
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, AtomNode):
            yield n.atom
        elif isinstance(n, Not):
            stack.append(n.arg)
        elif isinstance(n, (And, Or, Implies, Iff)):
            stack.append(n.lhs)
            stack.append(n.rhs)


def _term_vars(t: NumTerm, out: dict[str, Sort]) -> None:
    if isinstance(t, NumVar):
        out[t.name] = Sort.NUM
    elif isinstance(t, NumBinOp):
        _term_vars(t.lhs, out)
        _term_vars(t.rhs, out)
    elif isinstance(t, PathLen):
        out[t.heap] = Sort.HEAP
        out[t.src] = Sort.PTR
        out[t.dst] = Sort.PTR


def occurring_vars(node: Node) -> dict[str, Sort]:
    """Variables occurring in the tree, mapped to the sort their slot forces."""
    out: dict[str, Sort] = {}
    for a in atoms(node):
        if isinstance(a, (Alias, IsPath)):
            out[a.heap] = Sort.HEAP
            out[a.x] = Sort.PTR
            out[a.y] = Sort.PTR
        elif isinstance(a, (IsNull, Circular)):
            out[a.heap] = Sort.HEAP
            out[a.x] = Sort.PTR
        elif isinstance(a, Transform):
            out[a.out] = Sort.HEAP
            out[a.heap] = Sort.HEAP
            for p in a.args:
                out[p] = Sort.PTR
        elif isinstance(a, Cmp):
            _term_vars(a.lhs, out)
            _term_vars(a.rhs, out)
    return out


def make_formula(decls: list[VarId] | tuple[VarId, ...], root: Node) -> SlhFormula:
    """Attach declarations to a tree, inserting ``null`` and validating sorts.

    ``null`` is placed right before the first pointer declaration, or at the
    end when there is none, so parser output and programmatic construction
    agree on declaration order.
    """
    ordered: list[VarId] = []
    seen: dict[str, Sort] = {}
    have_null = any(d.name == NULL for d in decls)
    for d in decls:
        if d.name in seen:
            raise SortError(f"variable '{d.name}' declared twice")
        if d.name == NULL and d.sort is not Sort.PTR:
            raise SortError("'null' must have pointer sort")
        if not have_null and d.sort is Sort.PTR:
            ordered.append(VarId(NULL, Sort.PTR))
            seen[NULL] = Sort.PTR
            have_null = True
        ordered.append(d)
        seen[d.name] = d.sort
    if NULL not in seen:
        ordered.append(VarId(NULL, Sort.PTR))
        seen[NULL] = Sort.PTR

    for name, want in occurring_vars(root).items():
        have = seen.get(name)
        if have is None:
            raise UndeclaredVariableError(name)
        if have is not want:
            raise SortError(
                f"variable '{name}' has sort {have.value} but is used as {want.value}")

    for a in atoms(root):
        if isinstance(a, Transform):
            if a.out == a.heap:
                raise SortError(
                    f"transformer '{a.kind}' must relate distinct heap variables")
            # new/assign/lookup reassign their first pointer argument; that
            # must never move null.  update dereferences it instead, which
            # the null-check guard handles.
            if a.kind in ("new", "lookup") and a.args[0] == NULL:
                raise SortError(f"'{a.kind}' may not retarget null")
            if a.kind == "assign" and a.args[0] == NULL and a.args[1] != NULL:
                raise SortError("'assign' may not retarget null")
    return SlhFormula(tuple(ordered), root)


def free_vars(f: SlhFormula) -> list[VarId]:
    """All declared variables in declaration order (``null`` included)."""
    return list(f.decls)


def _subst_node(node: Node, frm: str, to: str) -> Node:
    def st(t: NumTerm) -> NumTerm:
        if isinstance(t, NumBinOp):
            return NumBinOp(t.op, st(t.lhs), st(t.rhs))
        if isinstance(t, PathLen) and t.heap == frm:
            return PathLen(to, t.src, t.dst)
        return t

    def sa(a: Atom) -> Atom:
        if isinstance(a, Alias) and a.heap == frm:
            return Alias(to, a.x, a.y)
        if isinstance(a, IsPath) and a.heap == frm:
            return IsPath(to, a.x, a.y)
        if isinstance(a, IsNull) and a.heap == frm:
            return IsNull(to, a.x)
        if isinstance(a, Circular) and a.heap == frm:
            return Circular(to, a.x)
        if isinstance(a, Transform):
            out = to if a.out == frm else a.out
            heap = to if a.heap == frm else a.heap
            if out != a.out or heap != a.heap:
                return Transform(a.kind, out, heap, a.args)
            return a
        if isinstance(a, Cmp):
            lhs, rhs = st(a.lhs), st(a.rhs)
            if lhs is not a.lhs or rhs is not a.rhs:
                return Cmp(a.op, lhs, rhs, a.signed)
            return a
        return a

    def walk(n: Node) -> Node:
        if isinstance(n, AtomNode):
            a = sa(n.atom)
            return AtomNode(a) if a is not n.atom else n
        if isinstance(n, Not):
            return Not(walk(n.arg))
        if isinstance(n, And):
            return And(walk(n.lhs), walk(n.rhs))
        if isinstance(n, Or):
            return Or(walk(n.lhs), walk(n.rhs))
        if isinstance(n, Implies):
            return Implies(walk(n.lhs), walk(n.rhs))
        if isinstance(n, Iff):
            return Iff(walk(n.lhs), walk(n.rhs))
        return n

    return walk(node)


def substitute_heap(f: SlhFormula, frm: VarId, to: VarId) -> SlhFormula:
    """Replace every occurrence of heap variable ``frm`` by ``to``."""
    if frm.sort is not Sort.HEAP or to.sort is not Sort.HEAP:
        raise SortError("substitute_heap requires heap-sorted variables")
    if frm == to:
        return f
    decls: list[VarId] = []
    have_to = any(d == to for d in f.decls)
    for d in f.decls:
        if d == frm:
            if not have_to:
                decls.append(to)
                have_to = True
        else:
            decls.append(d)
    if not have_to:
        decls.append(to)
    return SlhFormula(tuple(decls), _subst_node(f.root, frm.name, to.name))


def rename_heap_node(node: Node, frm: str, to: str) -> Node:
    """Tree-level heap renaming for callers that assemble formulas late."""
    return _subst_node(node, frm, to)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<num>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op><=>|=>|\|\||&&|!=|<=|>=|[()=!<>,;+\-*/%])
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "heap", "ptr", "bv", "alias", "isPath", "isNull", "circular",
    "new", "assign", "lookup", "update", "pathLength", "INF",
}


@dataclass
class Token:
    kind: str  # num | ident | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        lexeme = m.group(0)
        if m.lastgroup != "ws":
            toks.append(Token(m.lastgroup, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser (recursive descent over the surface grammar)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text:
            got = t.text or "end of input"
            raise ParseError(f"expected '{text}', found '{got}'", t.line, t.col)
        return self.next()

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.col)

    # -- declarations ------------------------------------------------------

    def parse_decls(self) -> list[VarId]:
        decls: list[VarId] = []
        seen: set[str] = set()
        while self.peek().text in ("heap", "ptr", "bv"):
            sort = Sort(self.next().text)
            while True:
                t = self.peek()
                if t.kind != "ident" or t.text in KEYWORDS:
                    raise self.error("expected identifier in declaration")
                name = self.next().text
                if name == NULL:
                    if sort is not Sort.PTR:
                        raise SortError("'null' must have pointer sort")
                elif name in seen:
                    raise SortError(f"variable '{name}' declared twice")
                else:
                    decls.append(VarId(name, sort))
                seen.add(name)
                if self.peek().text == ",":
                    self.next()
                    continue
                break
            self.expect(";")
        return decls

    # -- formulas ----------------------------------------------------------

    def parse_iff(self) -> Node:
        node = self.parse_impl()
        while self.peek().text == "<=>":
            self.next()
            node = Iff(node, self.parse_impl())
        return node

    def parse_impl(self) -> Node:
        parts = [self.parse_or()]
        while self.peek().text == "=>":
            self.next()
            parts.append(self.parse_or())
        node = parts[-1]
        for p in reversed(parts[:-1]):
            node = Implies(p, node)
        return node

    def parse_or(self) -> Node:
        node = self.parse_and()
        while self.peek().text == "||":
            self.next()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> Node:
        node = self.parse_not()
        while self.peek().text == "&&":
            self.next()
            node = And(node, self.parse_not())
        return node

    def parse_not(self) -> Node:
        t = self.peek()
        if t.text == "!":
            self.next()
            return Not(self.parse_not())
        if t.text == "(":
            self.next()
            node = self.parse_iff()
            self.expect(")")
            return node
        return AtomNode(self.parse_atom())

    def _ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error("expected identifier")
        return self.next()

    def parse_atom(self) -> Atom:
        t = self.peek()
        if t.text in ("alias", "isPath"):
            kind = self.next().text
            self.expect("(")
            h = self._ident().text
            self.expect(",")
            x = self._ident().text
            self.expect(",")
            y = self._ident().text
            self.expect(")")
            return Alias(h, x, y) if kind == "alias" else IsPath(h, x, y)
        if t.text in ("isNull", "circular"):
            kind = self.next().text
            self.expect("(")
            h = self._ident().text
            self.expect(",")
            x = self._ident().text
            self.expect(")")
            return IsNull(h, x) if kind == "isNull" else Circular(h, x)
        # transformer atom: ident '=' kind '(' ... ')'
        if (t.kind == "ident" and t.text not in KEYWORDS
                and self.peek(1).text == "="
                and self.peek(2).text in TRANSFORMER_KINDS
                and self.peek(3).text == "("):
            out = self.next().text
            self.next()  # '='
            kind = self.next().text
            self.expect("(")
            h = self._ident().text
            self.expect(",")
            a1 = self._ident().text
            args = [a1]
            if kind != "new":
                self.expect(",")
                args.append(self._ident().text)
            self.expect(")")
            return Transform(kind, out, h, tuple(args))
        lhs = self.parse_term()
        op = self.peek()
        if op.text not in CMP_OPS:
            raise self.error("expected relational operator")
        self.next()
        rhs = self.parse_term()
        return Cmp(op.text, lhs, rhs)

    def parse_term(self) -> NumTerm:
        node = self.parse_mul()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            node = NumBinOp(op, node, self.parse_mul())
        return node

    def parse_mul(self) -> NumTerm:
        node = self.parse_primary()
        while self.peek().text in ("*", "/", "%"):
            op = self.next().text
            node = NumBinOp(op, node, self.parse_primary())
        return node

    def parse_primary(self) -> NumTerm:
        t = self.peek()
        if t.kind == "num":
            return NumConst(int(self.next().text))
        if t.text == "INF":
            self.next()
            return InfConst()
        if t.text == "pathLength":
            self.next()
            self.expect("(")
            h = self._ident().text
            self.expect(",")
            x = self._ident().text
            self.expect(",")
            y = self._ident().text
            self.expect(")")
            return PathLen(h, x, y)
        if t.text == "(":
            self.next()
            node = self.parse_term()
            self.expect(")")
            return node
        if t.kind == "ident" and t.text not in KEYWORDS:
            return NumVar(self.next().text)
        raise self.error("expected term")


def parse_formula(text: str) -> SlhFormula:
    """Parse declarations followed by one formula."""
    p = _Parser(tokenize(text))
    decls = p.parse_decls()
    root = p.parse_iff()
    t = p.peek()
    if t.kind != "eof":
        raise ParseError(f"unexpected trailing input '{t.text}'", t.line, t.col)
    return make_formula(decls, root)


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_BOOL_LEVEL = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5}


def _print_term(t: NumTerm, level: int = 0) -> str:
    # levels: 0 additive, 1 multiplicative, 2 primary
    if isinstance(t, NumConst):
        return str(t.value)
    if isinstance(t, InfConst):
        return "INF"
    if isinstance(t, NumVar):
        return t.name
    if isinstance(t, PathLen):
        return f"pathLength({t.heap}, {t.src}, {t.dst})"
    assert isinstance(t, NumBinOp)
    mine = 0 if t.op in "+-" else 1
    lhs = _print_term(t.lhs, mine)
    rhs = _print_term(t.rhs, mine + 1)
    s = f"{lhs} {t.op} {rhs}"
    return f"({s})" if mine < level else s


def _print_atom(a: Atom) -> str:
    if isinstance(a, Alias):
        return f"alias({a.heap}, {a.x}, {a.y})"
    if isinstance(a, IsPath):
        return f"isPath({a.heap}, {a.x}, {a.y})"
    if isinstance(a, IsNull):
        return f"isNull({a.heap}, {a.x})"
    if isinstance(a, Circular):
        return f"circular({a.heap}, {a.x})"
    if isinstance(a, Transform):
        return f"{a.out} = {a.kind}({a.heap}, {', '.join(a.args)})"
    assert isinstance(a, Cmp)
    return f"{_print_term(a.lhs)} {a.op} {_print_term(a.rhs)}"


def _print_node(n: Node, level: int) -> str:
    if isinstance(n, AtomNode):
        return _print_atom(n.atom)
    if isinstance(n, BoolLit):
        return "0 = 0" if n.value else "0 = 1"
    if isinstance(n, Not):
        arg = n.arg
        if isinstance(arg, (AtomNode, Not)):
            return "!" + _print_node(arg, 5)
        return "!(" + _print_node(arg, 0) + ")"
    mine = _BOOL_LEVEL[type(n)]
    if isinstance(n, Implies):
        # right associative
        lhs = _print_node(n.lhs, mine + 1)
        rhs = _print_node(n.rhs, mine)
    else:
        lhs = _print_node(n.lhs, mine)  # type: ignore[union-attr]
        rhs = _print_node(n.rhs, mine + 1)  # type: ignore[union-attr]
    op = {Iff: "<=>", Implies: "=>", Or: "||", And: "&&"}[type(n)]
    s = f"{lhs} {op} {rhs}"
    return f"({s})" if mine < level else s


def pretty_print(f: SlhFormula) -> str:
    """Render a formula so that re-parsing reproduces it structurally."""
    lines: list[str] = []
    run_sort: Optional[Sort] = None
    run: list[str] = []

    def flush() -> None:
        if run:
            lines.append(f"{run_sort.value} {', '.join(run)};")

    for d in f.decls:
        if d.name == NULL:
            continue
        if d.sort is not run_sort:
            flush()
            run_sort, run = d.sort, [d.name]
        else:
            run.append(d.name)
    flush()
    lines.append(_print_node(f.root, 0))
    return "\n".join(lines)
