"""Singly-linked heaps with length: decision procedure and verifier."""

from .formula import (
    FormulaError, ParseError, SortError, UndeclaredVariableError,
    Sort, VarId, SlhFormula,
    parse_formula, pretty_print, free_vars, substitute_heap,
)
from .heap import (
    HeapModel, Interpretation, NullDereferenceError, INFINITE,
    well_formed, path_length, circular, alias, is_path, is_null,
    apply_new, apply_assign, apply_lookup, apply_update,
    subdivide, smooth, kernel, shell, canonicalize, homeomorphic,
    eval_formula, to_dot,
)
from .encode import (
    EncodeConfig, EncodeError, BoundOverflowError,
    plan_bound, encode_validity, bitblast, decode_model,
)
from .sat import (
    CnfFormula, SatResult, ResourceLimitError,
    solve, write_dimacs, read_dimacs, run_external,
)

__version__ = "0.1.0"
