"""Expression and rule AST.

Node positions are carried for diagnostics but excluded from equality so
that parse(print(rule)) compares structurally equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

Value = Union[float, bool, str]

# Built-in functions: name -> (arg count, result type). executedCount takes a
# bare activity identifier, not an expression.
BUILTINS = {
    "executedCount": (1, "num"),
    "elapsed": (0, "num"),
    "lastExecuted": (0, "str"),
}


@dataclass(frozen=True)
class Lit:
    value: Value
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "not" | "-"
    operand: "Expr"
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / < <= > >= == != and or
    left: "Expr"
    right: "Expr"
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple[str, ...]  # executedCount carries the activity id
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


Expr = Union[Lit, Var, Unary, Binary, Call]


class RuleKind(Enum):
    SELECTION = "selection"
    CONTEXT = "context"
    VETO = "veto"
    GOAL = "goal"


@dataclass
class Rule:
    id: str
    kind: RuleKind
    condition: Expr
    priority: int = 0
    # Selection / Veto: the governed activity id.
    target: str | None = None
    # Context: ordered (variable, expression) assignments.
    assignments: tuple[tuple[str, Expr], ...] = ()
    # Goal: optional numeric progress expression and its direction.
    progress: Expr | None = None
    direction: str | None = None  # "maximize" | "minimize"
    enabled: bool = True

    def structurally_equal(self, other: "Rule") -> bool:
        return (
            self.id == other.id
            and self.kind == other.kind
            and self.priority == other.priority
            and self.condition == other.condition
            and self.target == other.target
            and self.assignments == other.assignments
            and self.progress == other.progress
            and self.direction == other.direction
        )


class RuleSetError(Exception):
    pass


class RuleSet:
    """Ordered rule collection with a revision counter.

    Ids are unique; every add/replace/delete bumps the revision. At most one
    enabled goal rule may exist at any instant.
    """

    def __init__(self, rules: list[Rule] | None = None):
        self._rules: list[Rule] = []
        self._by_id: dict[str, Rule] = {}
        self.revision = 0
        self._ordered_cache: tuple[int, dict[RuleKind, list[Rule]]] = (-1, {})
        for r in rules or []:
            self.add(r)

    def __iter__(self):
        return iter(self._rules)

    def __len__(self) -> int:
        return len(self._rules)

    @property
    def rules(self) -> list[Rule]:
        return list(self._rules)

    def get(self, rule_id: str) -> Rule | None:
        return self._by_id.get(rule_id)

    def _check_single_goal(self, incoming: Rule, replacing: str | None) -> None:
        if incoming.kind is not RuleKind.GOAL or not incoming.enabled:
            return
        for r in self._rules:
            if r.id == replacing:
                continue
            if r.kind is RuleKind.GOAL and r.enabled:
                raise RuleSetError(
                    f"rule {incoming.id!r}: an enabled goal rule ({r.id!r}) already exists"
                )

    def add(self, rule: Rule) -> None:
        if rule.id in self._by_id:
            raise RuleSetError(f"duplicate rule id {rule.id!r}")
        self._check_single_goal(rule, replacing=None)
        self._rules.append(rule)
        self._by_id[rule.id] = rule
        self.revision += 1

    def replace(self, rule_id: str, rule: Rule) -> None:
        if rule_id not in self._by_id:
            raise RuleSetError(f"unknown rule id {rule_id!r}")
        if rule.id != rule_id and rule.id in self._by_id:
            raise RuleSetError(f"duplicate rule id {rule.id!r}")
        self._check_single_goal(rule, replacing=rule_id)
        idx = next(i for i, r in enumerate(self._rules) if r.id == rule_id)
        self._rules[idx] = rule
        del self._by_id[rule_id]
        self._by_id[rule.id] = rule
        self.revision += 1

    def delete(self, rule_id: str) -> None:
        if rule_id not in self._by_id:
            raise RuleSetError(f"unknown rule id {rule_id!r}")
        self._rules = [r for r in self._rules if r.id != rule_id]
        del self._by_id[rule_id]
        self.revision += 1

    def of_kind(self, kind: RuleKind) -> list[Rule]:
        return [r for r in self._rules if r.kind is kind]

    def ordered_of_kind(self, kind: RuleKind) -> list[Rule]:
        """Rules of one kind in (-priority, id) order; cached per revision.

        The cache assumes rules are replaced through this class, not mutated
        in place (the enabled flag is re-read at match time, so toggling it
        does not stale the ordering)."""
        cached_rev, by_kind = self._ordered_cache
        if cached_rev != self.revision:
            by_kind = {}
            for k in RuleKind:
                by_kind[k] = sorted(
                    (r for r in self._rules if r.kind is k),
                    key=lambda r: (-r.priority, r.id),
                )
            self._ordered_cache = (self.revision, by_kind)
        return by_kind[kind]

    def goal_rule(self) -> Rule | None:
        for r in self._rules:
            if r.kind is RuleKind.GOAL and r.enabled:
                return r
        return None
