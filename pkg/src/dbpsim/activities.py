"""Activity definitions, candidate computation, and execution.

Candidate selection never consults a stored successor relation: the ordered
candidate list is derived from matching selection rules alone, filtered by
activity guards, veto rules, and the bad-practice check. Execution is atomic;
a failed effect leaves internal context untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .context import ContextSnapshot, InternalContext
from .rng import SplitMix64
from .rules.ast import Expr, Rule, RuleKind
from .rules.errors import EvalError
from .rules.evaluator import TraceView, applicable_rules, eval_expr


class InsufficientResources(Exception):
    pass


class EffectError(Exception):
    pass


@dataclass
class Activity:
    id: str
    name: str = ""
    # Fixed duration, or an inclusive integer range drawn from the session RNG.
    duration: int | tuple[int, int] = 1
    cost: float = 0.0
    consumes: dict[str, Expr] = field(default_factory=dict)
    produces: dict[str, Expr] = field(default_factory=dict)
    effects: list[tuple[str, Expr]] = field(default_factory=list)
    precondition: Expr | None = None

    def __post_init__(self):
        if not self.name:
            self.name = self.id

    def draw_duration(self, rng: SplitMix64) -> int:
        # Fixed durations consume no draw, so rule edits that do not change
        # the number of range draws do not shift later randomness.
        if isinstance(self.duration, tuple):
            return rng.uniform_int(self.duration[0], self.duration[1])
        return self.duration


@dataclass(frozen=True)
class ExecutionRecord:
    activity_id: str
    start_time: int
    end_time: int
    cost: float
    snapshot_before: str
    snapshot_after: str
    fired_rule_id: str

    def to_json(self) -> dict:
        return {
            "activityId": self.activity_id,
            "startTime": self.start_time,
            "endTime": self.end_time,
            "cost": self.cost,
            "snapshotBefore": self.snapshot_before,
            "snapshotAfter": self.snapshot_after,
            "firedRuleId": self.fired_rule_id,
        }

    @staticmethod
    def from_json(data: dict) -> "ExecutionRecord":
        return ExecutionRecord(
            activity_id=data["activityId"],
            start_time=int(data["startTime"]),
            end_time=int(data["endTime"]),
            cost=float(data["cost"]),
            snapshot_before=data["snapshotBefore"],
            snapshot_after=data["snapshotAfter"],
            fired_rule_id=data["firedRuleId"],
        )


@dataclass(frozen=True)
class Candidate:
    activity_id: str
    rule_id: str


@dataclass(frozen=True)
class FilteredCandidate:
    activity_id: str
    rule_id: str
    reason: str  # "precondition" | "resources" | "veto-rule" | "bad-practice"
    detail: str = ""


@dataclass(frozen=True)
class SelectionOutcome:
    kind: str  # "execute" | "finished" | "decision-required"
    activity_id: str | None = None
    fired_rule_id: str | None = None
    reason: str | None = None
    considered: tuple[Candidate, ...] = ()
    filtered: tuple[FilteredCandidate, ...] = ()

    @staticmethod
    def execute(activity_id: str, rule_id: str) -> "SelectionOutcome":
        return SelectionOutcome("execute", activity_id=activity_id, fired_rule_id=rule_id)

    @staticmethod
    def finished(reason: str) -> "SelectionOutcome":
        return SelectionOutcome("finished", reason=reason)

    @staticmethod
    def decision_required(
        considered: list[Candidate],
        filtered: list[FilteredCandidate],
        reason: str = "no candidate activity",
    ) -> "SelectionOutcome":
        return SelectionOutcome(
            "decision-required",
            reason=reason,
            considered=tuple(considered),
            filtered=tuple(filtered),
        )


def _resources_sufficient(
    activity: Activity, snap: ContextSnapshot, trace: TraceView
) -> tuple[bool, str]:
    for resource, amount_expr in activity.consumes.items():
        amount = eval_expr(amount_expr, snap, trace)
        if amount < 0:
            return False, f"negative consume amount for {resource!r}"
        available = snap.bindings.get(resource, 0.0)
        if available < amount:
            return False, f"needs {amount:g} {resource}, has {available:g}"
    return True, ""


def candidates(
    rules,
    activities: dict[str, Activity],
    snap: ContextSnapshot,
    trace: TraceView,
    veto_check: Callable[[str], object] | None = None,
    on_error: Callable[[Rule, EvalError], None] | None = None,
) -> tuple[list[Candidate], list[FilteredCandidate]]:
    """Ordered candidate activities with the rule that nominated each.

    Selection rules applicable in the snapshot are mapped to their target
    activities, then filtered by (a) activity precondition and resource
    sufficiency, (b) applicable veto rules, (c) the historical bad-practice
    check. Several rules nominating one activity collapse to the
    highest-ranked nomination. Order follows the rule ordering.
    """
    fired = applicable_rules(rules, RuleKind.SELECTION, snap, trace, on_error=on_error)
    vetoes = applicable_rules(rules, RuleKind.VETO, snap, trace, on_error=on_error)
    vetoed_activities = {v.target: v.id for v in vetoes}

    out: list[Candidate] = []
    filtered: list[FilteredCandidate] = []
    seen: set[str] = set()
    for rule in fired:
        aid = rule.target
        if aid in seen:
            continue
        seen.add(aid)
        activity = activities[aid]
        if activity.precondition is not None:
            try:
                ok = eval_expr(activity.precondition, snap, trace)
            except EvalError as exc:
                filtered.append(FilteredCandidate(aid, rule.id, "precondition", str(exc)))
                continue
            if not ok:
                filtered.append(FilteredCandidate(aid, rule.id, "precondition"))
                continue
        try:
            sufficient, detail = _resources_sufficient(activity, snap, trace)
        except EvalError as exc:
            filtered.append(FilteredCandidate(aid, rule.id, "resources", str(exc)))
            continue
        if not sufficient:
            filtered.append(FilteredCandidate(aid, rule.id, "resources", detail))
            continue
        if aid in vetoed_activities:
            filtered.append(
                FilteredCandidate(aid, rule.id, "veto-rule", vetoed_activities[aid])
            )
            continue
        if veto_check is not None:
            verdict = veto_check(aid)
            if verdict is not None and getattr(verdict, "vetoed", False):
                filtered.append(
                    FilteredCandidate(
                        aid, rule.id, "bad-practice", verdict.matched_instance or ""
                    )
                )
                continue
        out.append(Candidate(aid, rule.id))
    return out, filtered


def select(cands: list[Candidate]) -> Candidate | None:
    """Head of the ordered candidate list; None when empty. The caller turns
    None into finished or decision-required by consulting the goal."""
    return cands[0] if cands else None


def execute(
    activity: Activity,
    ic: InternalContext,
    snap: ContextSnapshot,
    clock: int,
    rng: SplitMix64,
    trace: TraceView,
    fired_rule_id: str,
) -> tuple[ExecutionRecord, ContextSnapshot]:
    """Execute one activity atomically.

    Consume amounts are checked and applied before produce amounts; effects
    are staged against a working view (each effect sees earlier ones) and
    committed only if every expression evaluates. Any failure raises with
    internal context untouched. Returns the record and the post-execution
    snapshot at the advanced clock.
    """
    staged_resources = dict(ic.resources)
    try:
        for resource, amount_expr in activity.consumes.items():
            amount = eval_expr(amount_expr, snap, trace)
            if amount < 0:
                raise EffectError(
                    f"{activity.id}: negative consume amount for {resource!r}"
                )
            remaining = staged_resources.get(resource, 0.0) - amount
            if remaining < 0:
                raise InsufficientResources(
                    f"{activity.id}: needs {amount:g} {resource}, "
                    f"has {staged_resources.get(resource, 0.0):g}"
                )
            staged_resources[resource] = remaining
        for resource, amount_expr in activity.produces.items():
            amount = eval_expr(amount_expr, snap, trace)
            if amount < 0:
                raise EffectError(
                    f"{activity.id}: negative produce amount for {resource!r}"
                )
            staged_resources[resource] = staged_resources.get(resource, 0.0) + amount

        staged_state = dict(ic.state_vars)
        working = dict(snap.bindings)
        working.update(staged_resources)
        view = _WorkingView(working, snap.at)
        for name, expr in activity.effects:
            value = eval_expr(expr, view, trace)
            staged_state[name] = value
            working[name] = value
    except EvalError as exc:
        raise EffectError(f"{activity.id}: {exc}") from exc

    ic.resources.clear()
    ic.resources.update(staged_resources)
    ic.state_vars.clear()
    ic.state_vars.update(staged_state)

    duration = activity.draw_duration(rng)
    end_time = clock + duration
    after_bindings = dict(snap.bindings)
    after_bindings.update(staged_resources)
    after_bindings.update(staged_state)
    after = ContextSnapshot(after_bindings, end_time)
    record = ExecutionRecord(
        activity_id=activity.id,
        start_time=clock,
        end_time=end_time,
        cost=activity.cost,
        snapshot_before=snap.content_hash,
        snapshot_after=after.content_hash,
        fired_rule_id=fired_rule_id,
    )
    return record, after


class _WorkingView:
    __slots__ = ("bindings", "at")

    def __init__(self, bindings: dict, at: int):
        self.bindings = bindings
        self.at = at
