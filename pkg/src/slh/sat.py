"""Propositional satisfiability backend.

An embedded conflict-driven clause-learning solver (two-literal watching,
first-UIP learning, activity-based branching, Luby restarts, phase saving)
plus DIMACS interchange and an escape hatch for running an external
DIMACS solver as a subprocess.
"""

from __future__ import annotations

import heapq
import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence


class SatError(Exception):
    pass


class ResourceLimitError(SatError):
    """The configured conflict budget was exhausted."""


class ExternalSolverError(SatError):
    pass


@dataclass
class CnfFormula:
    nvars: int
    clauses: list[list[int]]

    def __post_init__(self) -> None:
        for c in self.clauses:
            if not c:
                raise ValueError("empty clause; represent UNSAT with a "
                                 "contradictory unit pair instead")
            for lit in c:
                if lit == 0 or abs(lit) > self.nvars:
                    raise ValueError(f"literal {lit} out of range")


@dataclass
class SatResult:
    satisfiable: bool
    assignment: Optional[dict[int, bool]] = None

    def __bool__(self) -> bool:
        return self.satisfiable


UNSAT = SatResult(False)


def check_model(cnf: CnfFormula, assignment: dict[int, bool]) -> bool:
    for clause in cnf.clauses:
        if not any(assignment.get(abs(l), False) == (l > 0) for l in clause):
            return False
    return True


def _luby(i: int) -> int:
    """1-indexed Luby sequence: 1,1,2,1,1,2,4,1,1,2,1,1,2,4,8,..."""
    while True:
        k = i.bit_length()
        if i + 1 == (1 << k):
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1


class CdclSolver:
    def __init__(self, cnf: CnfFormula, max_conflicts: Optional[int] = None,
                 seed: int = 0):
        self.nvars = cnf.nvars
        self.max_conflicts = max_conflicts
        self.seed = seed
        nv = cnf.nvars
        self.assign = [0] * (nv + 1)          # 0 unknown, 1 true, -1 false
        self.level = [0] * (nv + 1)
        self.reason: list[Optional[list[int]]] = [None] * (nv + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        # watches indexed by literal code lit + nvars; binary clauses get
        # their own direct-implication lists
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * nv + 1)]
        self.bins: list[list[tuple[int, list[int]]]] = [[] for _ in range(2 * nv + 1)]
        self.activity = [0.0] * (nv + 1)
        self.var_inc = 1.0
        self.order: list[tuple[float, int]] = []
        self.in_heap = bytearray(nv + 1)
        self.heap_act = [0.0] * (nv + 1)  # priority each var was queued with
        self.phase = [False] * (nv + 1)
        self.learnts: list[list[int]] = []
        self.clause_act: dict[int, float] = {}
        self.cla_inc = 1.0
        self.conflicts = 0
        self.propagations = 0
        self.ok = True

        for clause in cnf.clauses:
            lits = sorted(set(clause), key=abs)
            if any(-l in lits for l in lits):
                continue  # tautology
            if len(lits) == 1:
                if not self._enqueue(lits[0], None):
                    self.ok = False
                    return
            else:
                self._attach(lits)
        for v in range(1, nv + 1):
            self.activity[v] = seed and ((v * 1103515245 + seed) % 997) / 997.0
            self.in_heap[v] = 1
            self.heap_act[v] = self.activity[v]
            heapq.heappush(self.order, (-self.activity[v], v))

    # -- basic operations --------------------------------------------------

    def _attach(self, clause: list[int]) -> None:
        nv = self.nvars
        if len(clause) == 2:
            self.bins[-clause[0] + nv].append((clause[1], clause))
            self.bins[-clause[1] + nv].append((clause[0], clause))
            return
        self.watches[clause[0] + nv].append(clause)
        self.watches[clause[1] + nv].append(clause)

    def _value(self, lit: int) -> int:
        v = self.assign[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def _enqueue(self, lit: int, reason: Optional[list[int]]) -> bool:
        var = lit if lit > 0 else -lit
        cur = self.assign[var]
        want = 1 if lit > 0 else -1
        if cur != 0:
            return cur == want
        self.assign[var] = want
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.trail.append(lit)
        return True

    def _propagate(self) -> Optional[list[int]]:
        assign = self.assign
        level = self.level
        reason = self.reason
        watches = self.watches
        bins = self.bins
        trail = self.trail
        nv = self.nvars
        dlevel = len(self.trail_lim)
        qhead = self.qhead
        nprops = 0
        try:
            while qhead < len(trail):
                lit = trail[qhead]
                qhead += 1
                nprops += 1
                false_lit = -lit
                for other, bclause in bins[lit + nv]:
                    ov = assign[other] if other > 0 else -assign[-other]
                    if ov == 1:
                        continue
                    if ov == -1:
                        qhead = len(trail)
                        return bclause
                    if other > 0:
                        assign[other] = 1
                        level[other] = dlevel
                        reason[other] = bclause
                    else:
                        assign[-other] = -1
                        level[-other] = dlevel
                        reason[-other] = bclause
                    trail.append(other)
                ws = watches[false_lit + nv]
                if not ws:
                    continue
                i = 0
                j = 0
                n = len(ws)
                while i < n:
                    clause = ws[i]
                    i += 1
                    if clause[0] == false_lit:
                        clause[0] = clause[1]
                        clause[1] = false_lit
                    first = clause[0]
                    fv = assign[first] if first > 0 else -assign[-first]
                    if fv == 1:
                        ws[j] = clause
                        j += 1
                        continue
                    moved = False
                    for k in range(2, len(clause)):
                        lk = clause[k]
                        if (assign[lk] if lk > 0 else -assign[-lk]) != -1:
                            clause[1] = lk
                            clause[k] = false_lit
                            watches[lk + nv].append(clause)
                            moved = True
                            break
                    if moved:
                        continue
                    ws[j] = clause
                    j += 1
                    if fv == -1:
                        del ws[j:i]
                        qhead = len(trail)
                        return clause
                    # propagate first (inlined enqueue of an unassigned lit)
                    if first > 0:
                        assign[first] = 1
                        level[first] = dlevel
                        reason[first] = clause
                    else:
                        assign[-first] = -1
                        level[-first] = dlevel
                        reason[-first] = clause
                    trail.append(first)
                del ws[j:]
            return None
        finally:
            self.qhead = qhead
            self.propagations += nprops

    # -- conflict analysis ---------------------------------------------------

    def _bump_var(self, var: int) -> None:
        # bumped variables are always on the trail; they re-enter the order
        # heap with fresh activity when backtracking unassigns them
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            for v in range(1, self.nvars + 1):
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100
            order = []
            self.in_heap = bytearray(self.nvars + 1)
            for v in range(1, self.nvars + 1):
                if self.assign[v] == 0:
                    self.in_heap[v] = 1
                    self.heap_act[v] = self.activity[v]
                    order.append((-self.activity[v], v))
            heapq.heapify(order)
            self.order = order

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        nv = self.nvars
        level = self.level
        seen = bytearray(nv + 1)
        learnt: list[int] = [0]
        counter = 0
        resolve_lit = 0  # propagated literal whose reason is being expanded
        idx = len(self.trail) - 1
        clause = conflict
        cur_level = len(self.trail_lim)
        while True:
            if id(clause) in self.clause_act:
                self._bump_clause(clause)
            for q in clause:
                if q == resolve_lit:
                    continue
                var = q if q > 0 else -q
                if not seen[var] and level[var] > 0:
                    seen[var] = 1
                    self._bump_var(var)
                    if level[var] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                lit = self.trail[idx]
                var = lit if lit > 0 else -lit
                if seen[var]:
                    break
                idx -= 1
            resolve_lit = self.trail[idx]
            idx -= 1
            seen[var] = 0
            counter -= 1
            if counter == 0:
                break
            clause = self.reason[var]  # type: ignore[assignment]
        learnt[0] = -resolve_lit

        # cheap minimization: drop literals whose whole reason is subsumed
        out = [learnt[0]]
        for q in learnt[1:]:
            var = q if q > 0 else -q
            r = self.reason[var]
            if r is not None:
                redundant = True
                for x in r:
                    if x == -q:
                        continue
                    xv = x if x > 0 else -x
                    if not seen[xv] and level[xv] != 0:
                        redundant = False
                        break
                if redundant:
                    continue
            out.append(q)
        learnt = out

        if len(learnt) == 1:
            return learnt, 0
        levels = [self.level[abs(q)] for q in learnt[1:]]
        back = max(levels)
        hi = learnt[1:][levels.index(back)]
        learnt.remove(hi)
        learnt.insert(1, hi)
        return learnt, back

    def _bump_clause(self, clause: list[int]) -> None:
        k = id(clause)
        self.clause_act[k] = self.clause_act.get(k, 0.0) + self.cla_inc
        if self.clause_act[k] > 1e20:
            for kk in self.clause_act:
                self.clause_act[kk] *= 1e-20
            self.cla_inc *= 1e-20

    def _backtrack(self, to_level: int) -> None:
        if len(self.trail_lim) <= to_level:
            return
        bound = self.trail_lim[to_level]
        assign = self.assign
        phase = self.phase
        reason = self.reason
        in_heap = self.in_heap
        heap_act = self.heap_act
        order = self.order
        activity = self.activity
        push = heapq.heappush
        for lit in reversed(self.trail[bound:]):
            var = lit if lit > 0 else -lit
            phase[var] = lit > 0
            assign[var] = 0
            reason[var] = None
            act = activity[var]
            if not in_heap[var] or heap_act[var] != act:
                in_heap[var] = 1
                heap_act[var] = act
                push(order, (-act, var))
        del self.trail[bound:]
        del self.trail_lim[to_level:]
        self.qhead = len(self.trail)

    def _decide(self) -> int:
        order = self.order
        in_heap = self.in_heap
        heap_act = self.heap_act
        while order:
            act, var = heapq.heappop(order)
            # only the entry matching the recorded priority is live;
            # older duplicates are skipped
            if not in_heap[var] or heap_act[var] != -act:
                continue
            in_heap[var] = 0
            if self.assign[var] == 0:
                return var if self.phase[var] else -var
        for var in range(1, self.nvars + 1):
            if self.assign[var] == 0:
                return var if self.phase[var] else -var
        return 0

    def _reduce_db(self) -> None:
        keep: list[list[int]] = []
        scored = sorted(
            self.learnts,
            key=lambda c: (len(c) <= 2, self.clause_act.get(id(c), 0.0)),
            reverse=True)
        locked = {id(r) for r in self.reason if r is not None}
        limit = len(scored) // 2
        for i, c in enumerate(scored):
            if i < limit or len(c) <= 2 or id(c) in locked:
                keep.append(c)
            else:
                for w in (c[0], c[1]):
                    lst = self.watches[w + self.nvars]
                    for k, cc in enumerate(lst):
                        if cc is c:
                            del lst[k]
                            break
                self.clause_act.pop(id(c), None)
        self.learnts = keep

    def solve(self) -> SatResult:
        if not self.ok:
            return UNSAT
        if self._propagate() is not None:
            return UNSAT
        restart_idx = 1
        conflicts_to_restart = 100 * _luby(restart_idx)
        max_learnts = max(1000, len(self.clause_act) * 2)
        since_restart = 0
        while True:
            conflict = self._propagate()
            if conflict is not None:
                self.conflicts += 1
                since_restart += 1
                if self.max_conflicts is not None \
                        and self.conflicts > self.max_conflicts:
                    raise ResourceLimitError(
                        f"conflict budget {self.max_conflicts} exceeded")
                if not self.trail_lim:
                    return UNSAT
                learnt, back = self._analyze(conflict)
                self._backtrack(back)
                if len(learnt) == 1:
                    if not self._enqueue(learnt[0], None):
                        return UNSAT
                else:
                    self._attach(learnt)
                    self.learnts.append(learnt)
                    self.clause_act[id(learnt)] = 0.0
                    self._bump_clause(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= 0.95
                self.cla_inc /= 0.999
                if len(self.learnts) > max_learnts:
                    self._reduce_db()
                    max_learnts = int(max_learnts * 1.3)
                continue
            if since_restart >= conflicts_to_restart:
                restart_idx += 1
                conflicts_to_restart = 100 * _luby(restart_idx)
                since_restart = 0
                self._backtrack(0)
                continue
            lit = self._decide()
            if lit == 0:
                model = {v: self.assign[v] == 1 for v in range(1, self.nvars + 1)}
                return SatResult(True, model)
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


def solve(cnf: CnfFormula, max_conflicts: Optional[int] = None,
          seed: int = 0) -> SatResult:
    """Decide a CNF with the embedded solver; Sat results are self-checked."""
    result = CdclSolver(cnf, max_conflicts=max_conflicts, seed=seed).solve()
    if result.satisfiable:
        assert result.assignment is not None
        if not check_model(cnf, result.assignment):
            raise SatError("internal error: model fails self-check")
    return result


# ---------------------------------------------------------------------------
# DIMACS interchange
# ---------------------------------------------------------------------------

def write_dimacs(cnf: CnfFormula) -> str:
    lines = [f"p cnf {cnf.nvars} {len(cnf.clauses)}"]
    for c in cnf.clauses:
        lines.append(" ".join(str(l) for l in c) + " 0")
    return "\n".join(lines) + "\n"


def read_dimacs(text: str) -> CnfFormula:
    nvars = None
    nclauses = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise SatError(f"line {lineno}: malformed problem line {line!r}")
            nvars, nclauses = int(parts[2]), int(parts[3])
            continue
        if nvars is None:
            raise SatError(f"line {lineno}: clause before problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError as exc:
                raise SatError(f"line {lineno}: bad literal {tok!r}") from exc
            if lit == 0:
                if current:
                    clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    if nvars is None:
        raise SatError("missing problem line")
    if nclauses is not None and nclauses != len(clauses):
        raise SatError(f"header announces {nclauses} clauses, found {len(clauses)}")
    return CnfFormula(nvars, clauses)


# ---------------------------------------------------------------------------
# External solver bridge
# ---------------------------------------------------------------------------

def run_external(cmd: str | Sequence[str], cnf: CnfFormula,
                 timeout: Optional[float] = None) -> SatResult:
    """Run a SAT-competition style solver on a temporary DIMACS file.

    ``cmd`` is a command template; a ``{file}`` placeholder is replaced by
    the DIMACS path, otherwise the path is appended.  The solver must print
    an ``s SATISFIABLE``/``s UNSATISFIABLE`` line and ``v`` model lines.
    Sat assignments are re-verified against the formula.
    """
    argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
    fd, path = tempfile.mkstemp(suffix=".cnf", prefix="slh_")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(write_dimacs(cnf))
        if any("{file}" in a for a in argv):
            argv = [a.replace("{file}", path) for a in argv]
        else:
            argv = argv + [path]
        proc = subprocess.run(argv, capture_output=True, text=True,
                              timeout=timeout)
    finally:
        os.unlink(path)
    out = proc.stdout
    status: Optional[bool] = None
    lits: list[int] = []
    for line in out.splitlines():
        line = line.strip()
        if line.startswith("s "):
            verdict = line[2:].strip()
            if verdict == "SATISFIABLE":
                status = True
            elif verdict == "UNSATISFIABLE":
                status = False
        elif line.startswith("v "):
            lits.extend(int(t) for t in line[2:].split())
    if status is None:
        raise ExternalSolverError(
            f"no status line from {argv[0]} (exit {proc.returncode}): "
            f"{out[:200]!r}")
    if not status:
        return UNSAT
    assignment = {v: False for v in range(1, cnf.nvars + 1)}
    for lit in lits:
        if lit != 0 and abs(lit) <= cnf.nvars:
            assignment[abs(lit)] = lit > 0
    if not check_model(cnf, assignment):
        raise ExternalSolverError(f"{argv[0]} returned a non-model")
    return SatResult(True, assignment)
