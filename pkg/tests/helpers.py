"""Shared test utilities: an independent tree-walk oracle for expression
evaluation, typed random generators for expressions/rules/snapshots, and a
random scenario family for determinism checks.

The oracle deliberately never touches the compiled programs or either VM:
it re-implements the semantics straight off the AST so VM bugs cannot hide.
"""

from __future__ import annotations

import random

from dbpsim.context import ContextSnapshot
from dbpsim.rules.ast import Binary, Call, Expr, Lit, Rule, RuleKind, Unary, Var
from dbpsim.rules.errors import EvalError
from dbpsim.rules.evaluator import TraceView


class OracleError(Exception):
    pass


def oracle_eval(expr: Expr, bindings: dict, counts: dict, clock: float, last: str):
    """Reference evaluator: recursive, AST-direct, no compilation."""
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in bindings:
            raise OracleError(f"unbound {expr.name}")
        return bindings[expr.name]
    if isinstance(expr, Unary):
        v = oracle_eval(expr.operand, bindings, counts, clock, last)
        return (not v) if expr.op == "not" else -v
    if isinstance(expr, Call):
        if expr.func == "executedCount":
            return float(counts.get(expr.args[0], 0))
        if expr.func == "elapsed":
            return clock
        return last
    assert isinstance(expr, Binary)
    op = expr.op
    if op == "and":
        left = oracle_eval(expr.left, bindings, counts, clock, last)
        return oracle_eval(expr.right, bindings, counts, clock, last) if left else left
    if op == "or":
        left = oracle_eval(expr.left, bindings, counts, clock, last)
        return left if left else oracle_eval(expr.right, bindings, counts, clock, last)
    a = oracle_eval(expr.left, bindings, counts, clock, last)
    b = oracle_eval(expr.right, bindings, counts, clock, last)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise OracleError("division by zero")
        return a / b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    return a != b


def oracle_eval_snapshot(expr: Expr, snapshot, trace: TraceView | None = None):
    trace = trace or TraceView()
    return oracle_eval(
        expr, dict(snapshot.bindings), dict(trace.counts), float(snapshot.at),
        trace.last_executed,
    )


# Typed random expression generation. Var pools are per-type so every
# generated tree type-checks by construction.

NUM_VARS = ["stock", "orderQty", "money", "price"]
BOOL_VARS = ["orderOpen", "ready", "flagA", "flagB"]
STR_VARS = ["stage", "owner"]
ACTIVITIES = ["Alpha", "Beta", "Gamma", "Delta"]
STR_POOL = ["", "Alpha", "Beta", "x"]

_CMP = ["<", "<=", ">", ">=", "==", "!="]


def gen_num(rng: random.Random, depth: int) -> Expr:
    if depth <= 0:
        choice = rng.randrange(3)
        if choice == 0:
            return Lit(float(rng.randint(0, 12)))
        if choice == 1:
            return Var(rng.choice(NUM_VARS))
        return Call("executedCount", (rng.choice(ACTIVITIES),))
    choice = rng.randrange(6)
    if choice == 0:
        return Unary("-", gen_num(rng, depth - 1))
    if choice == 1:
        return Call("elapsed", ())
    op = rng.choice(["+", "-", "*", "/"])
    return Binary(op, gen_num(rng, depth - 1), gen_num(rng, depth - 1))


def gen_str(rng: random.Random, depth: int) -> Expr:
    choice = rng.randrange(3)
    if choice == 0:
        return Lit(rng.choice(STR_POOL))
    if choice == 1:
        return Var(rng.choice(STR_VARS))
    return Call("lastExecuted", ())


def gen_bool(rng: random.Random, depth: int) -> Expr:
    if depth <= 0:
        if rng.randrange(2):
            return Lit(rng.random() < 0.5)
        return Var(rng.choice(BOOL_VARS))
    choice = rng.randrange(7)
    if choice == 0:
        return Unary("not", gen_bool(rng, depth - 1))
    if choice in (1, 2):
        op = rng.choice(["and", "or"])
        return Binary(op, gen_bool(rng, depth - 1), gen_bool(rng, depth - 1))
    if choice in (3, 4):
        op = rng.choice(_CMP[:4])
        return Binary(op, gen_num(rng, depth - 1), gen_num(rng, depth - 1))
    op = rng.choice(["==", "!="])
    kind = rng.randrange(3)
    if kind == 0:
        return Binary(op, gen_num(rng, depth - 1), gen_num(rng, depth - 1))
    if kind == 1:
        return Binary(op, gen_bool(rng, depth - 1), gen_bool(rng, depth - 1))
    return Binary(op, gen_str(rng, depth), gen_str(rng, depth))


def gen_rule(rng: random.Random, rule_id: str) -> Rule:
    cond = gen_bool(rng, rng.randint(1, 3))
    priority = rng.randint(-10, 10)
    kind = rng.choice(list(RuleKind))
    if kind is RuleKind.SELECTION or kind is RuleKind.VETO:
        return Rule(rule_id, kind, cond, priority, target=rng.choice(ACTIVITIES))
    if kind is RuleKind.CONTEXT:
        n = rng.randint(1, 3)
        assignments = []
        for _ in range(n):
            if rng.randrange(2):
                assignments.append((rng.choice(BOOL_VARS), gen_bool(rng, 1)))
            else:
                assignments.append((rng.choice(NUM_VARS), gen_num(rng, 1)))
        return Rule(rule_id, kind, cond, priority, assignments=tuple(assignments))
    if rng.randrange(2):
        direction = rng.choice(["maximize", "minimize"])
        return Rule(rule_id, kind, cond, priority, progress=gen_num(rng, 2),
                    direction=direction)
    return Rule(rule_id, kind, cond, priority)


def gen_snapshot(rng: random.Random, at: int | None = None) -> ContextSnapshot:
    bindings: dict = {}
    for name in NUM_VARS:
        bindings[name] = float(rng.randint(0, 15))
    for name in BOOL_VARS:
        bindings[name] = rng.random() < 0.5
    for name in STR_VARS:
        bindings[name] = rng.choice(STR_POOL)
    return ContextSnapshot(bindings, at if at is not None else rng.randint(0, 30))


def gen_trace_view(rng: random.Random) -> TraceView:
    counts = {a: rng.randint(0, 4) for a in ACTIVITIES if rng.randrange(2)}
    last = rng.choice([""] + ACTIVITIES)
    return TraceView(counts=counts, last_executed=last)


# A small family of random-but-valid scenarios for determinism checks.

def gen_scenario(rng: random.Random) -> dict:
    n_flags = rng.randint(1, 3)
    flags = [f"flag{i}" for i in range(n_flags)]
    activities = []
    rules = []
    for i, flag in enumerate(flags):
        duration: object = rng.randint(1, 3)
        if rng.randrange(2):
            duration = {"min": 1, "max": rng.randint(2, 4)}
        activities.append(
            {
                "id": f"Act{i}",
                "duration": duration,
                "cost": rng.randint(0, 5),
                "consumes": {"fuel": str(rng.randint(0, 2))},
                "effects": [{"var": flag, "expr": "true"}],
            }
        )
        guard = " and ".join([f"not {flag}"] + [f"flag{j}" for j in range(i)])
        rules.append(
            f"rule sel{i} priority {rng.randint(0, 9)} when {guard} select Act{i}"
        )
    activities.append(
        {
            "id": "Wrap",
            "duration": 1,
            "cost": 1,
            "effects": [{"var": "wrapped", "expr": "true"}],
        }
    )
    rules.append(
        "rule wrap priority -1 when "
        + " and ".join(flags)
        + " and not wrapped select Wrap"
    )
    rules.append("rule g goal when wrapped progress score maximize")
    if rng.randrange(2):
        rules.append("rule ctx1 when extPressure > 5 set boost := true")
    events = []
    for t in sorted(rng.sample(range(0, 12), rng.randint(0, 2))):
        events.append({"at": t, "label": "nudge", "set": {"extPressure": rng.randint(0, 9)}})
    return {
        "schemaVersion": 1,
        "name": f"random-{rng.randint(0, 10**6)}",
        "rng": "splitmix64",
        "envVars": [
            {"name": "extPressure", "value": rng.randint(0, 9)},
            {"name": "boost", "value": False},
        ],
        "resources": [{"name": "fuel", "quantity": rng.randint(3, 12)}],
        "stateVars": [{"name": f, "value": False} for f in flags]
        + [{"name": "wrapped", "value": False}, {"name": "score", "value": 0}],
        "activities": activities,
        "rules": rules,
        "events": events,
        "goal": {"stagnationWindow": 5},
        "defaults": {"seed": rng.randint(0, 999)},
    }


def gen_script(rng: random.Random, scenario: dict) -> list[dict]:
    """A command script valid for scenarios from gen_scenario."""
    entries: list[dict] = []
    step = rng.randint(0, 3)
    entries.append({"beforeStep": step, "command": {"type": "pause"}})
    kind = rng.randrange(3)
    if kind == 0:
        entries.append(
            {
                "beforeStep": step,
                "command": {
                    "type": "addRule",
                    "source": f"rule extra priority {rng.randint(0, 9)} "
                    "when not wrapped and flag0 select Wrap",
                },
            }
        )
    elif kind == 1:
        entries.append(
            {
                "beforeStep": step,
                "command": {
                    "type": "editRule",
                    "ruleId": "sel0",
                    "source": f"rule sel0 priority {rng.randint(0, 9)} "
                    "when not flag0 select Act0",
                },
            }
        )
    else:
        entries.append(
            {
                "beforeStep": step,
                "command": {
                    "type": "injectExternal",
                    "assignments": {"extPressure": rng.randint(0, 9)},
                },
            }
        )
    entries.append({"beforeStep": step, "command": {"type": "resume"}})
    return entries
