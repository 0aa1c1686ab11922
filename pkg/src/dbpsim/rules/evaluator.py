"""Expression evaluation and rule matching.

Backend selection happens once at import: the compiled VM is used when its
extension module built, otherwise the pure-Python VM. Setting
DBPSIM_PURE_PYTHON=1 forces the fallback (useful for benchmarking and for
verifying the two backends agree).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .ast import Expr, Rule, RuleKind, RuleSet, Value
from .compile import Program, compile_expr
from .errors import EvalError
from . import _vm as _pure_vm

if os.environ.get("DBPSIM_PURE_PYTHON"):
    _vm = _pure_vm
else:
    try:
        from . import _vmext as _vm  # type: ignore[no-redef]
    except ImportError:
        _vm = _pure_vm

BACKEND = _vm.BACKEND_NAME


@dataclass(frozen=True)
class TraceView:
    """Read-only view of the current instance trace for condition evaluation."""

    counts: Mapping[str, int] = field(default_factory=dict)
    last_executed: str = ""


_EMPTY_TRACE = TraceView()

# Keyed by id() with the expression kept alive in the value, so the key can
# never be recycled while the entry exists. Sessions share expression objects
# through scenario templates, which keeps this cache small and hot.
_program_cache: dict[int, tuple[Expr, Program]] = {}
_PROGRAM_CACHE_MAX = 4096


def program_for(expr: Expr) -> Program:
    key = id(expr)
    hit = _program_cache.get(key)
    if hit is not None and hit[0] is expr:
        return hit[1]
    prog = compile_expr(expr)
    if len(_program_cache) >= _PROGRAM_CACHE_MAX:
        _program_cache.clear()
    _program_cache[key] = (expr, prog)
    return prog


def eval_expr(expr: Expr, snapshot, trace: TraceView | None = None) -> Value:
    """Evaluate a type-checked expression against a context snapshot.

    Pure: no side effects on the snapshot or the trace. Unbound variables and
    division by zero raise EvalError.
    """
    trace = trace or _EMPTY_TRACE
    return _vm.run_program(
        program_for(expr),
        snapshot.bindings,
        trace.counts,
        float(snapshot.at),
        trace.last_executed,
    )


def eval_program(program: Program, snapshot, trace: TraceView) -> Value:
    return _vm.run_program(
        program, snapshot.bindings, trace.counts, float(snapshot.at), trace.last_executed
    )


def rule_sort_key(rule: Rule) -> tuple[int, str]:
    return (-rule.priority, rule.id)


def applicable_rules(
    rules,
    kind: RuleKind,
    snapshot,
    trace: TraceView | None = None,
    on_error: Callable[[Rule, EvalError], None] | None = None,
) -> list[Rule]:
    """Enabled rules of the given kind whose condition holds in snapshot.

    Ordered by descending priority, ties by ascending rule id. A rule whose
    condition fails to evaluate is excluded and reported through on_error;
    it never aborts matching.
    """
    trace = trace or _EMPTY_TRACE
    if isinstance(rules, RuleSet):
        ordered = rules.ordered_of_kind(kind)
    else:
        ordered = sorted((r for r in rules if r.kind is kind), key=rule_sort_key)
    out: list[Rule] = []
    for rule in ordered:
        if not rule.enabled:
            continue
        try:
            if eval_expr(rule.condition, snapshot, trace):
                out.append(rule)
        except EvalError as exc:
            if on_error is not None:
                on_error(rule, exc)
    return out
