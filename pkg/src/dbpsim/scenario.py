"""Scenario files: validation, semantic hashing, and builders for sessions.

A scenario declares everything a session needs: environment variables,
resources, state variables, activities, rule sources, the external event
schedule, goal settings, and defaults. Validation is all-or-nothing at load
time; no session is created from a file with an undeclared identifier, a
namespace collision, or an unparsable rule.

The scenario hash is computed over a semantic canonical form (declarations
sorted by name, activities and rules sorted by id, rule sources replaced by
their canonical printing), so formatting and declaration order never split
the history of one process into separate populations.
"""

from __future__ import annotations

import json
import re
from dataclasses import replace

from .canon import digest
from .context import ExternalContext, ExternalEvent, InternalContext
from .rng import RNG_ALGORITHM
from .rules.ast import BUILTINS, Rule, RuleKind, RuleSet, Value
from .rules.errors import ParseError
from .rules.lexer import KEYWORDS
from .rules.parser import parse_expr, parse_rule
from .rules.printer import print_expr, print_rule
from .rules.typecheck import BOOL, NUM

SCHEMA_VERSION = 1

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ValidationError(Exception):
    def __init__(self, message: str, path: str = "/"):
        super().__init__(f"{path}: {message}")
        self.message = message
        self.path = path


def _fail(message: str, path: str):
    raise ValidationError(message, path)


def _check_name(name, path: str) -> str:
    if not isinstance(name, str) or not _NAME_RE.match(name):
        _fail(f"invalid identifier {name!r}", path)
    if name in KEYWORDS or name in BUILTINS:
        _fail(f"{name!r} is a reserved word", path)
    return name


def _value_type(value, path: str) -> str:
    if isinstance(value, bool):
        return BOOL
    if isinstance(value, (int, float)):
        return NUM
    if isinstance(value, str):
        return "str"
    _fail(f"values must be numbers, booleans, or strings, got {type(value).__name__}", path)


def _to_value(value) -> Value:
    if isinstance(value, bool) or isinstance(value, str):
        return value
    return float(value)


def _parse_expr_at(source, var_types, activity_ids, expected, path: str):
    if not isinstance(source, str):
        _fail("expected an expression string", path)
    try:
        return parse_expr(source, var_types, activity_ids, expected)
    except ParseError as exc:
        _fail(f"bad expression: {exc}", path)


def validate_activity_json(
    data: dict,
    var_types: dict[str, str],
    declared_activities: set[str],
    env_vars: set[str],
    path: str = "/activity",
) -> None:
    """Schema-level validation of one activity spec. declared_activities is
    the id universe executedCount() may reference (including this one)."""
    if not isinstance(data, dict):
        _fail("activity must be an object", path)
    aid = _check_name(data.get("id"), f"{path}/id")
    ids = declared_activities | {aid}
    duration = data.get("duration", 1)
    if isinstance(duration, bool) or (
        not isinstance(duration, int)
        and not (isinstance(duration, float) and duration.is_integer())
    ):
        if isinstance(duration, dict):
            lo, hi = duration.get("min"), duration.get("max")
            if not isinstance(lo, int) or not isinstance(hi, int) or isinstance(lo, bool) or isinstance(hi, bool):
                _fail("duration range needs integer min and max", f"{path}/duration")
            if lo < 0 or hi < lo:
                _fail(f"bad duration range [{lo}, {hi}]", f"{path}/duration")
        else:
            _fail("duration must be an integer or a {min, max} range", f"{path}/duration")
    elif duration < 0:
        _fail("duration must be >= 0", f"{path}/duration")
    cost = data.get("cost", 0)
    if isinstance(cost, bool) or not isinstance(cost, (int, float)):
        _fail("cost must be a number", f"{path}/cost")
    for section in ("consumes", "produces"):
        for resource, expr in (data.get(section) or {}).items():
            if resource not in var_types:
                _fail(f"undeclared resource {resource!r}", f"{path}/{section}")
            _parse_expr_at(expr, var_types, ids, NUM, f"{path}/{section}/{resource}")
    for i, effect in enumerate(data.get("effects") or []):
        epath = f"{path}/effects/{i}"
        if not isinstance(effect, dict) or "var" not in effect or "expr" not in effect:
            _fail("effect needs var and expr", epath)
        var = effect["var"]
        if var not in var_types:
            _fail(f"undeclared variable {var!r}", f"{epath}/var")
        if var in env_vars:
            _fail(
                f"activities may not write environment variable {var!r}",
                f"{epath}/var",
            )
        _parse_expr_at(effect["expr"], var_types, ids, var_types[var], f"{epath}/expr")
    if data.get("precondition") is not None:
        _parse_expr_at(
            data["precondition"], var_types, ids, BOOL, f"{path}/precondition"
        )


def activity_from_json(data: dict, var_types: dict[str, str], activity_ids: set[str]):
    from .activities import Activity

    duration = data.get("duration", 1)
    if isinstance(duration, dict):
        dur: int | tuple[int, int] = (int(duration["min"]), int(duration["max"]))
    else:
        dur = int(duration)
    return Activity(
        id=data["id"],
        name=data.get("name", data["id"]),
        duration=dur,
        cost=float(data.get("cost", 0)),
        consumes={
            res: parse_expr(expr, var_types, activity_ids, NUM)
            for res, expr in (data.get("consumes") or {}).items()
        },
        produces={
            res: parse_expr(expr, var_types, activity_ids, NUM)
            for res, expr in (data.get("produces") or {}).items()
        },
        effects=[
            (e["var"], parse_expr(e["expr"], var_types, activity_ids, var_types[e["var"]]))
            for e in (data.get("effects") or [])
        ],
        precondition=(
            parse_expr(data["precondition"], var_types, activity_ids, BOOL)
            if data.get("precondition") is not None
            else None
        ),
    )


class Scenario:
    """A fully validated scenario definition."""

    def __init__(self, data: dict):
        self.raw = data
        self.name: str = data.get("name", "unnamed")
        self.env_values: dict[str, Value] = {}
        self.resource_values: dict[str, float] = {}
        self.state_values: dict[str, Value] = {}
        self.var_types: dict[str, str] = {}
        self.activity_specs: list[dict] = []
        self.rule_sources: list[str] = []
        self.rules: list[Rule] = []
        self.event_specs: list[dict] = []
        self.stagnation_window: int | None = None
        self.default_seed: int = 0
        self._validate(data)
        self.scenario_hash = digest(self.canonical_form())

    @property
    def env_var_names(self) -> set[str]:
        return set(self.env_values)

    @property
    def activity_ids(self) -> set[str]:
        return {a["id"] for a in self.activity_specs}

    # Validation

    def _validate(self, data: dict) -> None:
        if not isinstance(data, dict):
            _fail("scenario must be a JSON object", "/")
        version = data.get("schemaVersion")
        if version != SCHEMA_VERSION:
            _fail(f"unsupported schemaVersion {version!r} (expected {SCHEMA_VERSION})", "/schemaVersion")
        rng = data.get("rng", RNG_ALGORITHM)
        if rng != RNG_ALGORITHM:
            _fail(f"unsupported rng {rng!r} (expected {RNG_ALGORITHM!r})", "/rng")

        for section, target in (
            ("envVars", self.env_values),
            ("stateVars", self.state_values),
        ):
            for i, entry in enumerate(data.get(section) or []):
                path = f"/{section}/{i}"
                if not isinstance(entry, dict):
                    _fail("expected {name, value}", path)
                name = _check_name(entry.get("name"), f"{path}/name")
                if name in self.var_types:
                    _fail(f"duplicate variable {name!r}", f"{path}/name")
                vtype = _value_type(entry.get("value"), f"{path}/value")
                target[name] = _to_value(entry.get("value"))
                self.var_types[name] = vtype
        for i, entry in enumerate(data.get("resources") or []):
            path = f"/resources/{i}"
            if not isinstance(entry, dict):
                _fail("expected {name, quantity}", path)
            name = _check_name(entry.get("name"), f"{path}/name")
            if name in self.var_types:
                _fail(f"duplicate variable {name!r}", f"{path}/name")
            qty = entry.get("quantity")
            if isinstance(qty, bool) or not isinstance(qty, (int, float)):
                _fail("quantity must be a number", f"{path}/quantity")
            if qty < 0:
                _fail("initial quantity must be >= 0", f"{path}/quantity")
            self.resource_values[name] = float(qty)
            self.var_types[name] = NUM

        activities = data.get("activities") or []
        seen_ids: set[str] = set()
        for i, spec in enumerate(activities):
            path = f"/activities/{i}"
            if not isinstance(spec, dict):
                _fail("activity must be an object", path)
            aid = spec.get("id")
            if aid in seen_ids:
                _fail(f"duplicate activity id {aid!r}", f"{path}/id")
            if isinstance(aid, str):
                seen_ids.add(aid)
            self.activity_specs.append(spec)
        for i, spec in enumerate(activities):
            validate_activity_json(
                spec, self.var_types, seen_ids, self.env_var_names, f"/activities/{i}"
            )

        rule_ids: set[str] = set()
        goal_count = 0
        for i, source in enumerate(data.get("rules") or []):
            path = f"/rules/{i}"
            if not isinstance(source, str):
                _fail("rule must be a source string", path)
            try:
                rule = parse_rule(
                    source,
                    var_types=self.var_types,
                    activity_ids=seen_ids,
                    env_vars=self.env_var_names,
                )
            except ParseError as exc:
                _fail(f"bad rule: {exc}", path)
            if rule.id in rule_ids:
                _fail(f"duplicate rule id {rule.id!r}", path)
            rule_ids.add(rule.id)
            if rule.kind is RuleKind.GOAL:
                goal_count += 1
                if goal_count > 1:
                    _fail("at most one goal rule may be enabled", path)
            self.rule_sources.append(source)
            self.rules.append(rule)

        for i, event in enumerate(data.get("events") or []):
            path = f"/events/{i}"
            if not isinstance(event, dict):
                _fail("event must be an object", path)
            at = event.get("at")
            if isinstance(at, bool) or not isinstance(at, int) or at < 0:
                _fail("event time must be a non-negative integer", f"{path}/at")
            assignments = event.get("set") or {}
            if not assignments:
                _fail("event needs at least one assignment", f"{path}/set")
            for name, value in assignments.items():
                if name not in self.env_values:
                    _fail(
                        f"events may only set declared environment variables, "
                        f"{name!r} is not one",
                        f"{path}/set/{name}",
                    )
                vtype = _value_type(value, f"{path}/set/{name}")
                if vtype != self.var_types[name]:
                    _fail(
                        f"{name!r} expects a {self.var_types[name]} value",
                        f"{path}/set/{name}",
                    )
            self.event_specs.append(event)

        goal = data.get("goal") or {}
        window = goal.get("stagnationWindow")
        if window is not None:
            if isinstance(window, bool) or not isinstance(window, int) or window < 1:
                _fail("stagnationWindow must be a positive integer", "/goal/stagnationWindow")
            self.stagnation_window = window
        defaults = data.get("defaults") or {}
        seed = defaults.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            _fail("seed must be an integer", "/defaults/seed")
        self.default_seed = seed

    # Canonical semantic form

    def canonical_form(self) -> dict:
        def decl(name: str, value) -> dict:
            return {"name": name, "value": value}

        acts = []
        for spec in sorted(self.activity_specs, key=lambda s: s["id"]):
            ids = self.activity_ids
            entry: dict = {"id": spec["id"], "name": spec.get("name", spec["id"])}
            duration = spec.get("duration", 1)
            entry["duration"] = (
                {"min": duration["min"], "max": duration["max"]}
                if isinstance(duration, dict)
                else int(duration)
            )
            entry["cost"] = float(spec.get("cost", 0))
            for section in ("consumes", "produces"):
                entry[section] = {
                    res: print_expr(parse_expr(e, self.var_types, ids))
                    for res, e in sorted((spec.get(section) or {}).items())
                }
            entry["effects"] = [
                {
                    "var": e["var"],
                    "expr": print_expr(parse_expr(e["expr"], self.var_types, ids)),
                }
                for e in (spec.get("effects") or [])
            ]
            entry["precondition"] = (
                print_expr(parse_expr(spec["precondition"], self.var_types, ids))
                if spec.get("precondition") is not None
                else None
            )
            acts.append(entry)

        return {
            "schemaVersion": SCHEMA_VERSION,
            "rng": RNG_ALGORITHM,
            "name": self.name,
            "envVars": [decl(n, self.env_values[n]) for n in sorted(self.env_values)],
            "resources": [
                {"name": n, "quantity": self.resource_values[n]}
                for n in sorted(self.resource_values)
            ],
            "stateVars": [decl(n, self.state_values[n]) for n in sorted(self.state_values)],
            "activities": acts,
            "rules": sorted(print_rule(r) for r in self.rules),
            "events": [
                {
                    "at": e["at"],
                    "label": e.get("label", ""),
                    "set": dict(sorted((e.get("set") or {}).items())),
                }
                for e in self.event_specs
            ],
            "goal": {"stagnationWindow": self.stagnation_window},
            "defaults": {"seed": self.default_seed},
        }

    # Builders: each session gets its own rule set and context; parsed rule
    # and activity templates are built once per scenario. Activity objects
    # are shared read-only across sessions (a runtime-defined activity goes
    # into the session's own mapping, never back into the scenario).

    def build_rule_set(self) -> RuleSet:
        template = getattr(self, "_rules_template", None)
        if template is None:
            template = [
                parse_rule(
                    src,
                    var_types=self.var_types,
                    activity_ids=self.activity_ids,
                    env_vars=self.env_var_names,
                )
                for src in self.rule_sources
            ]
            self._rules_template = template
        return RuleSet([replace(r) for r in template])

    def build_activities(self) -> dict:
        template = getattr(self, "_activities_template", None)
        if template is None:
            ids = self.activity_ids
            template = {
                spec["id"]: activity_from_json(spec, self.var_types, ids)
                for spec in self.activity_specs
            }
            self._activities_template = template
        return dict(template)

    def build_internal_context(self) -> InternalContext:
        return InternalContext(
            resources=dict(self.resource_values),
            state_vars=dict(self.state_values),
        )

    def build_external_context(self) -> ExternalContext:
        ec = ExternalContext(env_vars=dict(self.env_values))
        for spec in self.event_specs:
            ec.add_event(
                ExternalEvent(
                    at=int(spec["at"]),
                    assignments=[
                        (name, _to_value(value))
                        for name, value in (spec.get("set") or {}).items()
                    ],
                    label=spec.get("label", ""),
                )
            )
        return ec


def load_scenario(source: bytes | str | dict) -> Scenario:
    """Parse and fully validate a scenario document."""
    if isinstance(source, (bytes, str)):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"not valid JSON: {exc}", "/")
    else:
        data = source
    return Scenario(data)


def scenario_hash(source: bytes | str | dict) -> str:
    """Content digest of the scenario's semantic canonical form."""
    return load_scenario(source).scenario_hash
