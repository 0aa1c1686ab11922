"""Internal and external context: resource/state variables, environment
variables, scheduled external events, and policy (context) rules.

Environment variables change only through external events and context rules;
activity execution writes state variables and resources only. Snapshots are
immutable values safe to hand to any reader.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .canon import digest_flat
from .rules.ast import Rule, Value
from .rules.errors import EvalError
from .rules.evaluator import TraceView, eval_expr, rule_sort_key

DEFAULT_MAX_ITERATIONS = 100


class SchemaMismatch(Exception):
    pass


class NonConvergence(Exception):
    """Context rules failed to reach a fixpoint within the iteration bound."""

    def __init__(self, iterations: int, oscillating: list[str]):
        names = ", ".join(oscillating)
        super().__init__(
            f"context rules did not converge after {iterations} passes; "
            f"oscillating variables: {names}"
        )
        self.iterations = iterations
        self.oscillating = oscillating


@dataclass
class InternalContext:
    """Current state of system resources plus process state variables."""

    resources: dict[str, float] = field(default_factory=dict)
    state_vars: dict[str, Value] = field(default_factory=dict)


@dataclass
class ExternalEvent:
    at: int
    assignments: list[tuple[str, Value]]
    label: str = ""
    seq: int = 0  # declaration order; ties at equal times apply in this order
    applied: bool = False


@dataclass
class ExternalContext:
    env_vars: dict[str, Value] = field(default_factory=dict)
    event_schedule: list[ExternalEvent] = field(default_factory=list)

    def add_event(self, event: ExternalEvent) -> None:
        event.seq = len(self.event_schedule)
        self.event_schedule.append(event)


class ContextSnapshot:
    """Immutable union of environment, resource, and state bindings at a sim
    instant. Equal bindings yield equal content hashes.

    bindings is a private copy taken at construction; readers must treat it
    as frozen (views hand out copies)."""

    __slots__ = ("bindings", "at", "content_hash")

    def __init__(self, bindings: dict[str, Value], at: int):
        object.__setattr__(self, "bindings", dict(bindings))
        object.__setattr__(self, "at", at)
        object.__setattr__(self, "content_hash", digest_flat(self.bindings))

    def __setattr__(self, name, value):
        raise AttributeError("ContextSnapshot is immutable")

    def __repr__(self) -> str:
        return f"ContextSnapshot(at={self.at}, hash={self.content_hash[:12]})"


def merged_bindings(ic: InternalContext, ec: ExternalContext) -> dict[str, Value]:
    out: dict[str, Value] = dict(ec.env_vars)
    out.update(ic.resources)
    out.update(ic.state_vars)
    return out


def apply_due_events(ec: ExternalContext, now: int) -> list[ExternalEvent]:
    """Apply every not-yet-applied event with at <= now, in (time, declaration
    order). Each event applies exactly once per session. Returns the applied
    events for logging."""
    due = sorted(
        (e for e in ec.event_schedule if not e.applied and e.at <= now),
        key=lambda e: (e.at, e.seq),
    )
    for event in due:
        for name, value in event.assignments:
            ec.env_vars[name] = value
        event.applied = True
    return due


class _MutableView:
    """Snapshot-shaped adapter over live bindings for rule evaluation."""

    __slots__ = ("bindings", "at")

    def __init__(self, bindings: dict[str, Value], at: int):
        self.bindings = bindings
        self.at = at


def run_context_rules(
    rules: list[Rule],
    ic: InternalContext,
    ec: ExternalContext,
    now: int,
    trace: TraceView | None = None,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    on_error: Callable[[Rule, EvalError], None] | None = None,
) -> int:
    """Run context rules to a fixpoint over the environment variables.

    Each pass evaluates every rule in (-priority, id) order against the
    current bindings and immediately applies the assignments of those whose
    condition holds. Passes repeat until one changes nothing; the return
    value counts all passes including the confirming one. Exceeding
    max_iterations raises NonConvergence naming the variables that were
    still changing.
    """
    ordered = sorted((r for r in rules if r.enabled), key=rule_sort_key)
    bindings = merged_bindings(ic, ec)
    view = _MutableView(bindings, now)
    iterations = 0
    last_changed: set[str] = set()
    while True:
        iterations += 1
        if iterations > max_iterations:
            raise NonConvergence(max_iterations, sorted(last_changed))
        changed: set[str] = set()
        for rule in ordered:
            try:
                if not eval_expr(rule.condition, view, trace):
                    continue
                for name, expr in rule.assignments:
                    value = eval_expr(expr, view, trace)
                    if bindings.get(name) != value or type(bindings.get(name)) is not type(value):
                        changed.add(name)
                    bindings[name] = value
                    ec.env_vars[name] = value
            except EvalError as exc:
                if on_error is not None:
                    on_error(rule, exc)
        if not changed:
            return iterations
        last_changed = changed


def snapshot(ic: InternalContext, ec: ExternalContext, now: int) -> ContextSnapshot:
    """Freeze the merged bindings at a sim instant.

    Callers run apply_due_events and run_context_rules for this instant
    first; the snapshot itself never mutates anything.
    """
    return ContextSnapshot(merged_bindings(ic, ec), now)


def diff(
    a: ContextSnapshot, b: ContextSnapshot
) -> list[tuple[str, Value, Value]]:
    """Exactly the bindings that differ between two snapshots of the same
    scenario schema, sorted by variable name."""
    if set(a.bindings.keys()) != set(b.bindings.keys()):
        missing = set(a.bindings.keys()) ^ set(b.bindings.keys())
        raise SchemaMismatch(f"snapshots disagree on variables: {sorted(missing)}")
    out = []
    for name in sorted(a.bindings.keys()):
        old, new = a.bindings[name], b.bindings[name]
        if old != new or type(old) is not type(new):
            out.append((name, old, new))
    return out
