"""Session orchestration: the per-instance simulation loop, command handling,
mid-instance rule edits, goal evaluation, watch points, and the log.

One logical executor owns each session; control commands queue up from any
producer and drain at step boundaries, so activity execution is never
concurrent with an edit. The instance id is fixed at session creation and
survives every edit: changes made while paused affect the SAME instance from
the next step onward.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from . import context as ctx
from .canon import digest
from .activities import (
    Activity,
    Candidate,
    EffectError,
    ExecutionRecord,
    InsufficientResources,
    SelectionOutcome,
    candidates,
    execute,
    select,
)
from .history import (
    CompletionStatus,
    DuplicateInstance,
    HistoricalInstance,
    HistoryStore,
    Label,
)
from .rng import SplitMix64
from .rules.ast import Rule, RuleKind, RuleSet, RuleSetError
from .rules.errors import EvalError, ParseError
from .rules.evaluator import TraceView, eval_expr
from .rules.parser import parse_expr, parse_rule
from .scenario import (
    Scenario,
    ValidationError,
    activity_from_json,
    validate_activity_json,
)

DEFAULT_STAGNATION_WINDOW = 5


class Status(Enum):
    CREATED = "Created"
    RUNNING = "Running"
    PAUSED = "Paused"
    DECISION_REQUIRED = "DecisionRequired"
    COMPLETED = "Completed"
    STUCK = "Stuck"
    FAULTED = "Faulted"
    ABORTED = "Aborted"


TERMINAL = {Status.COMPLETED, Status.STUCK, Status.FAULTED, Status.ABORTED}

VALID_TRANSITIONS: set[tuple[Status, Status]] = {
    (Status.CREATED, Status.RUNNING),
    (Status.CREATED, Status.ABORTED),
    (Status.RUNNING, Status.PAUSED),
    (Status.RUNNING, Status.DECISION_REQUIRED),
    (Status.RUNNING, Status.COMPLETED),
    (Status.RUNNING, Status.STUCK),
    (Status.RUNNING, Status.FAULTED),
    (Status.RUNNING, Status.ABORTED),
    (Status.PAUSED, Status.RUNNING),
    (Status.PAUSED, Status.ABORTED),
    (Status.DECISION_REQUIRED, Status.RUNNING),
    (Status.DECISION_REQUIRED, Status.ABORTED),
}

# Commands that change rules, context, or activities land only while the
# session is paused or waiting on a decision; they take effect from the next
# step of the same instance.
EDIT_COMMANDS = {"editRule", "addRule", "deleteRule", "injectExternal", "defineActivity"}

COMMAND_TYPES = {
    "start", "pause", "resume", "step", "stop",
    "editRule", "addRule", "deleteRule",
    "injectExternal", "defineActivity", "setWatch", "replay",
}


class SessionFault(Exception):
    """Raised when a step leaves the session Faulted."""


class DivergenceError(SessionFault):
    def __init__(self, step: int, expected: str, got: str):
        super().__init__(
            f"replay diverged at step {step}: expected {expected!r}, got {got!r}"
        )
        self.step = step
        self.expected = expected
        self.got = got


@dataclass(frozen=True)
class Command:
    type: str
    rule_id: str | None = None
    source: str | None = None
    n: int = 1
    assignments: dict[str, Any] | None = None
    activity: dict | None = None
    expr: str | None = None
    instance_id: str | None = None

    @staticmethod
    def from_json(data: dict) -> "Command":
        ctype = data.get("type")
        if ctype not in COMMAND_TYPES:
            raise ValueError(f"unknown command type {ctype!r}")
        return Command(
            type=ctype,
            rule_id=data.get("ruleId"),
            source=data.get("source"),
            n=int(data.get("n", 1)),
            assignments=data.get("assignments"),
            activity=data.get("activity"),
            expr=data.get("expr"),
            instance_id=data.get("instanceId"),
        )

    def to_json(self) -> dict:
        out: dict[str, Any] = {"type": self.type}
        if self.rule_id is not None:
            out["ruleId"] = self.rule_id
        if self.source is not None:
            out["source"] = self.source
        if self.type == "step":
            out["n"] = self.n
        if self.assignments is not None:
            out["assignments"] = self.assignments
        if self.activity is not None:
            out["activity"] = self.activity
        if self.expr is not None:
            out["expr"] = self.expr
        if self.instance_id is not None:
            out["instanceId"] = self.instance_id
        return out


@dataclass(frozen=True)
class CommandResult:
    ok: bool
    message: str = ""
    diagnostics: dict | None = None
    # "ok" | "wrong-state" | "invalid" | "not-found"; drives HTTP status mapping.
    code: str = "ok"

    @staticmethod
    def wrong_state(message: str) -> "CommandResult":
        return CommandResult(False, message, code="wrong-state")

    @staticmethod
    def invalid(message: str, diagnostics: dict | None = None) -> "CommandResult":
        return CommandResult(False, message, diagnostics, code="invalid")

    @staticmethod
    def not_found(message: str) -> "CommandResult":
        return CommandResult(False, message, code="not-found")


@dataclass(frozen=True)
class LogEntry:
    step: int
    clock: int
    category: str
    message: str

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "clock": self.clock,
            "category": self.category,
            "message": self.message,
        }


@dataclass
class WatchPoint:
    id: str
    source: str
    expr: Any
    last_value: Any = None
    history: list[tuple[int, Any]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "expr": self.source,
            "lastValue": self.last_value,
            "history": [[step, value] for step, value in self.history],
        }


class Session:
    """One live simulation instance."""

    def __init__(
        self,
        scenario: Scenario,
        seed: int | None = None,
        session_id: str = "local",
        instance_id: str | None = None,
        mode: str = "batch",
        history: HistoryStore | None = None,
    ):
        if mode not in ("batch", "interactive"):
            raise ValueError(f"unknown mode {mode!r}")
        self.scenario = scenario
        self.scenario_hash = scenario.scenario_hash
        self.seed = scenario.default_seed if seed is None else seed
        self.session_id = session_id
        # The instance identity is fixed at creation from (scenario, seed)
        # and survives every mid-run edit: pausing, changing rules, and
        # resuming all happen within this one instance.
        self.instance_id = (
            instance_id or "i-" + digest([self.scenario_hash, self.seed])[:16]
        )
        self.mode = mode
        self.history = history

        self.rule_set: RuleSet = scenario.build_rule_set()
        self.activities: dict[str, Activity] = scenario.build_activities()
        self.internal: ctx.InternalContext = scenario.build_internal_context()
        self.external: ctx.ExternalContext = scenario.build_external_context()
        self.var_types: dict[str, str] = dict(scenario.var_types)
        self.env_var_names: set[str] = set(scenario.env_var_names)

        self.clock = 0
        self.rng = SplitMix64(self.seed)
        self.status = Status.CREATED
        self.step_index = 0
        self.trace: list[ExecutionRecord] = []
        self.log: list[LogEntry] = []
        self.watch_points: list[WatchPoint] = []
        self.progress_history: list[float] = []
        self.total_cost = 0.0
        self.pending_decision: SelectionOutcome | None = None
        self.fault_reason: str | None = None
        self.command_inbox: list[Command] = []
        self.applied_events: list[ctx.ExternalEvent] = []
        self.stagnation_window = scenario.stagnation_window or DEFAULT_STAGNATION_WINDOW

        self._counts: dict[str, int] = {}
        self._last_executed = ""
        self._watch_seq = 0
        self._last_step_end = ctx.snapshot(self.internal, self.external, 0)
        self._prev_step_end = self._last_step_end
        self._in_replay = False

    # Bookkeeping

    @property
    def total_time(self) -> int:
        if not self.trace:
            return 0
        return self.trace[-1].end_time - self.trace[0].start_time

    @property
    def last_diff(self) -> list[tuple[str, Any, Any]]:
        """What the most recent step changed, external events and context
        rules included; computed on demand for display."""
        if self._prev_step_end is self._last_step_end:
            return []
        return ctx.diff(self._prev_step_end, self._last_step_end)

    def _trace_view(self) -> TraceView:
        return TraceView(counts=self._counts, last_executed=self._last_executed)

    def _log(self, category: str, message: str) -> None:
        self.log.append(LogEntry(self.step_index, self.clock, category, message))

    def _transition(self, to: Status) -> None:
        if (self.status, to) not in VALID_TRANSITIONS:
            raise SessionFault(f"illegal transition {self.status.value} -> {to.value}")
        self.status = to

    def _rule_eval_error(self, rule: Rule, exc: EvalError) -> None:
        self._log("warning", f"rule {rule.id} skipped: {exc}")

    def _fault(self, reason: str) -> SessionFault:
        self.fault_reason = reason
        self._log("fault", reason)
        self._transition(Status.FAULTED)
        return SessionFault(reason)

    # The step loop

    def goal_progress_check(self, progress_value: float, direction: str) -> str:
        """Append the step's progress value; report NotApproaching when the
        last stagnationWindow values show no strict move in the goal's
        direction."""
        self.progress_history.append(progress_value)
        w = self.stagnation_window
        if len(self.progress_history) < w:
            return "OnTrack"
        window = self.progress_history[-w:]
        for prev, cur in zip(window, window[1:]):
            if direction == "maximize" and cur > prev:
                return "OnTrack"
            if direction == "minimize" and cur < prev:
                return "OnTrack"
        return "NotApproaching"

    def step(self, expected_activity: str | None = None) -> SelectionOutcome:
        """Advance the instance by one selection step.

        In order: apply due external events, run context rules to fixpoint,
        snapshot; evaluate the goal; check goal progress; compute candidates
        (vetoes included); execute the head candidate or report why nothing
        ran. During replay, expected_activity pins the selection.
        """
        if self.status is not Status.RUNNING:
            raise SessionFault(f"step requires a Running session, not {self.status.value}")

        applied = ctx.apply_due_events(self.external, self.clock)
        for event in applied:
            self.applied_events.append(event)
            self._log("event", f"external event applied: {event.label or 'unnamed'} (t={event.at})")

        trace_view = self._trace_view()
        try:
            iterations = ctx.run_context_rules(
                self.rule_set.of_kind(RuleKind.CONTEXT),
                self.internal,
                self.external,
                self.clock,
                trace_view,
                on_error=self._rule_eval_error,
            )
        except ctx.NonConvergence as exc:
            raise self._fault(str(exc))
        if iterations > 1:
            self._log("context", f"context rules converged in {iterations} passes")

        snap = ctx.snapshot(self.internal, self.external, self.clock)

        goal = self.rule_set.goal_rule()
        if goal is not None:
            try:
                achieved = eval_expr(goal.condition, snap, trace_view)
            except EvalError as exc:
                raise self._fault(f"goal condition failed to evaluate: {exc}")
            if achieved:
                if expected_activity is not None:
                    raise self._replay_divergence(expected_activity, "Finished")
                self._log("goal", f"goal {goal.id} achieved")
                self._transition(Status.COMPLETED)
                self.step_index += 1
                return SelectionOutcome.finished("GoalAchieved")

        pause_after = False
        if goal is not None and goal.progress is not None and not self._in_replay:
            try:
                value = eval_expr(goal.progress, snap, trace_view)
            except EvalError as exc:
                raise self._fault(f"goal progress failed to evaluate: {exc}")
            verdict = self.goal_progress_check(float(value), goal.direction or "maximize")
            if verdict == "NotApproaching":
                self._log(
                    "goal",
                    f"goal progress stagnant over last {self.stagnation_window} steps",
                )
                if self.mode == "batch":
                    self._transition(Status.STUCK)
                    self.step_index += 1
                    return SelectionOutcome.decision_required(
                        [], [], reason="goal progress stagnant"
                    )
                pause_after = True

        veto = None
        if self.history is not None:
            sequence = [r.activity_id for r in self.trace]
            veto = lambda aid: self.history.veto_check(sequence, aid, self.scenario_hash)
        cands, filtered = candidates(
            self.rule_set,
            self.activities,
            snap,
            trace_view,
            veto_check=veto,
            on_error=self._rule_eval_error,
        )
        for f in filtered:
            self._log("filter", f"{f.activity_id} excluded ({f.reason}) {f.detail}".rstrip())

        head = select(cands)
        if head is None:
            if expected_activity is not None:
                raise self._replay_divergence(expected_activity, "nothing")
            outcome = SelectionOutcome.decision_required(cands, filtered)
            self.pending_decision = outcome
            if self.mode == "batch":
                self._log("select", "no candidate activity; terminating (batch)")
                self._transition(Status.STUCK)
            else:
                self._log("select", "no candidate activity; waiting for a decision")
                self._transition(Status.DECISION_REQUIRED)
            self.step_index += 1
            return outcome

        if expected_activity is not None and head.activity_id != expected_activity:
            raise self._replay_divergence(expected_activity, head.activity_id)

        activity = self.activities[head.activity_id]
        try:
            record, after = execute(
                activity, self.internal, snap, self.clock, self.rng,
                trace_view, head.rule_id,
            )
        except (InsufficientResources, EffectError) as exc:
            raise self._fault(str(exc))

        self.trace.append(record)
        self._counts[record.activity_id] = self._counts.get(record.activity_id, 0) + 1
        self._last_executed = record.activity_id
        self.clock = record.end_time
        self.total_cost += record.cost
        self._log(
            "execute",
            f"{record.activity_id} via {record.fired_rule_id} "
            f"(t={record.start_time}->{record.end_time}, cost={record.cost:g})",
        )

        post_view = TraceView(counts=self._counts, last_executed=self._last_executed)
        for wp in self.watch_points:
            try:
                value = eval_expr(wp.expr, after, post_view)
            except EvalError as exc:
                self._log("warning", f"watch {wp.id} failed: {exc}")
                value = None
            wp.last_value = value
            wp.history.append((self.step_index, value))

        self._prev_step_end = self._last_step_end
        self._last_step_end = after
        self.step_index += 1

        if pause_after:
            self._log("goal", "auto-paused: goal progress stagnant")
            self._transition(Status.PAUSED)

        return SelectionOutcome.execute(record.activity_id, record.fired_rule_id)

    def _replay_divergence(self, expected: str, got: str) -> DivergenceError:
        err = DivergenceError(self.step_index, expected, got)
        self.fault_reason = str(err)
        self._log("fault", str(err))
        self._transition(Status.FAULTED)
        return err

    # Command handling

    def queue_command(self, command: Command) -> None:
        self.command_inbox.append(command)

    def drain_commands(self) -> list[tuple[Command, CommandResult]]:
        results = []
        while self.command_inbox:
            cmd = self.command_inbox.pop(0)
            results.append((cmd, self.apply_command(cmd)))
        return results

    def apply_command(self, cmd: Command) -> CommandResult:
        """Apply one control command at a step boundary.

        Edits parse and type-check against the scenario declarations before
        anything changes; a failed edit leaves the rule set untouched and the
        session resumable.
        """
        if cmd.type in EDIT_COMMANDS and self.status not in (
            Status.PAUSED,
            Status.DECISION_REQUIRED,
        ):
            return CommandResult.wrong_state(
                f"{cmd.type} requires a paused session (status {self.status.value})"
            )
        handler = getattr(self, f"_cmd_{cmd.type.lower()}", None)
        if handler is None:
            return CommandResult.invalid(f"unknown command {cmd.type!r}")
        return handler(cmd)

    def _cmd_start(self, cmd: Command) -> CommandResult:
        if self.status is not Status.CREATED:
            return CommandResult.wrong_state(f"start requires Created, not {self.status.value}")
        self._transition(Status.RUNNING)
        self._log("control", "started")
        return CommandResult(True, "started")

    def _cmd_pause(self, cmd: Command) -> CommandResult:
        if self.status is not Status.RUNNING:
            return CommandResult.wrong_state(f"pause requires Running, not {self.status.value}")
        self._transition(Status.PAUSED)
        self._log("control", "paused")
        return CommandResult(True, "paused")

    def _cmd_resume(self, cmd: Command) -> CommandResult:
        if self.status not in (Status.PAUSED, Status.DECISION_REQUIRED):
            return CommandResult.wrong_state(f"resume requires Paused, not {self.status.value}")
        self.pending_decision = None
        self._transition(Status.RUNNING)
        self._log("control", "resumed")
        return CommandResult(True, "resumed")

    def _cmd_stop(self, cmd: Command) -> CommandResult:
        if self.status in TERMINAL:
            return CommandResult.wrong_state(f"stop: session already {self.status.value}")
        self._transition(Status.ABORTED)
        self._log("control", "stopped")
        return CommandResult(True, "stopped")

    def _cmd_step(self, cmd: Command) -> CommandResult:
        if self.status not in (Status.CREATED, Status.PAUSED, Status.DECISION_REQUIRED):
            return CommandResult.wrong_state(
                f"step requires a pausable session, not {self.status.value}"
            )
        self._transition(Status.RUNNING)
        executed = 0
        try:
            for _ in range(max(0, cmd.n)):
                if self.status is not Status.RUNNING:
                    break
                self.step()
                executed += 1
        except SessionFault:
            pass
        if self.status is Status.RUNNING:
            self._transition(Status.PAUSED)
        return CommandResult(True, f"stepped {executed}")

    def _cmd_editrule(self, cmd: Command) -> CommandResult:
        if cmd.rule_id is None or cmd.source is None:
            return CommandResult.invalid("editRule needs ruleId and source")
        if self.rule_set.get(cmd.rule_id) is None:
            return CommandResult.not_found(f"unknown rule {cmd.rule_id!r}")
        try:
            rule = self._parse_rule(cmd.source)
            self.rule_set.replace(cmd.rule_id, rule)
        except ParseError as exc:
            return CommandResult.invalid(
                f"edit rejected: {exc}",
                diagnostics={"line": exc.line, "col": exc.col, "message": exc.message},
            )
        except RuleSetError as exc:
            return CommandResult.invalid(f"edit rejected: {exc}")
        self._log("edit", f"rule {cmd.rule_id} replaced (revision {self.rule_set.revision})")
        return CommandResult(True, f"rule {cmd.rule_id} updated")

    def _cmd_addrule(self, cmd: Command) -> CommandResult:
        if cmd.source is None:
            return CommandResult.invalid("addRule needs source")
        try:
            rule = self._parse_rule(cmd.source)
            self.rule_set.add(rule)
        except ParseError as exc:
            return CommandResult.invalid(
                f"add rejected: {exc}",
                diagnostics={"line": exc.line, "col": exc.col, "message": exc.message},
            )
        except RuleSetError as exc:
            return CommandResult.invalid(f"add rejected: {exc}")
        self._log("edit", f"rule {rule.id} added (revision {self.rule_set.revision})")
        return CommandResult(True, f"rule {rule.id} added")

    def _cmd_deleterule(self, cmd: Command) -> CommandResult:
        if cmd.rule_id is None:
            return CommandResult.invalid("deleteRule needs ruleId")
        try:
            self.rule_set.delete(cmd.rule_id)
        except RuleSetError as exc:
            return CommandResult.not_found(str(exc))
        self._log("edit", f"rule {cmd.rule_id} deleted (revision {self.rule_set.revision})")
        return CommandResult(True, f"rule {cmd.rule_id} deleted")

    def _parse_rule(self, source: str) -> Rule:
        return parse_rule(
            source,
            var_types=self.var_types,
            activity_ids=set(self.activities),
            env_vars=self.env_var_names,
        )

    def _cmd_injectexternal(self, cmd: Command) -> CommandResult:
        if not cmd.assignments:
            return CommandResult.invalid("injectExternal needs assignments")
        pairs: list[tuple[str, Any]] = []
        for name, raw in cmd.assignments.items():
            if name not in self.env_var_names:
                return CommandResult.invalid(
                    f"{name!r} is not an environment variable"
                )
            value = float(raw) if isinstance(raw, (int, float)) and not isinstance(raw, bool) else raw
            expected = self.var_types[name]
            actual = "bool" if isinstance(value, bool) else "num" if isinstance(value, float) else "str"
            if actual != expected:
                return CommandResult.invalid(
                    f"{name!r} expects a {expected} value, got {actual}"
                )
            pairs.append((name, value))
        event = ctx.ExternalEvent(at=self.clock, assignments=pairs, label="injected")
        self.external.add_event(event)
        self._log("edit", f"external change injected: {', '.join(n for n, _ in pairs)}")
        return CommandResult(True, "external change queued")

    def _cmd_defineactivity(self, cmd: Command) -> CommandResult:
        if not cmd.activity:
            return CommandResult.invalid("defineActivity needs an activity spec")
        try:
            validate_activity_json(
                cmd.activity, self.var_types, set(self.activities), self.env_var_names
            )
            activity = activity_from_json(
                cmd.activity, self.var_types, set(self.activities) | {cmd.activity["id"]}
            )
        except (ParseError, ValidationError, ValueError, KeyError) as exc:
            return CommandResult.invalid(f"activity rejected: {exc}")
        if activity.id in self.activities:
            return CommandResult.invalid(f"activity {activity.id!r} already exists")
        self.activities[activity.id] = activity
        self._log("edit", f"activity {activity.id} defined")
        return CommandResult(True, f"activity {activity.id} defined")

    def _cmd_setwatch(self, cmd: Command) -> CommandResult:
        if self.status in TERMINAL:
            return CommandResult.wrong_state(f"setWatch: session already {self.status.value}")
        if not cmd.expr:
            return CommandResult.invalid("setWatch needs an expression")
        try:
            expr = parse_expr(
                cmd.expr, var_types=self.var_types, activity_ids=set(self.activities)
            )
        except ParseError as exc:
            return CommandResult.invalid(
                f"watch rejected: {exc}",
                diagnostics={"line": exc.line, "col": exc.col, "message": exc.message},
            )
        self._watch_seq += 1
        wp = WatchPoint(id=f"w{self._watch_seq}", source=cmd.expr, expr=expr)
        self.watch_points.append(wp)
        self._log("watch", f"watch point {wp.id} set: {cmd.expr}")
        return CommandResult(True, wp.id)

    def _cmd_replay(self, cmd: Command) -> CommandResult:
        if self.status is not Status.CREATED:
            return CommandResult.wrong_state(f"replay requires Created, not {self.status.value}")
        if self.history is None:
            return CommandResult.invalid("no history store attached")
        if cmd.instance_id is None:
            return CommandResult.invalid("replay needs instanceId")
        inst = self.history.get(cmd.instance_id)
        if inst is None:
            return CommandResult.not_found(f"unknown instance {cmd.instance_id!r}")
        try:
            self.replay(inst)
        except DivergenceError as exc:
            return CommandResult.invalid(str(exc))
        except ValueError as exc:
            return CommandResult.invalid(str(exc))
        return CommandResult(True, f"replay finished: {self.status.value}")

    # Whole-run drivers

    def run(
        self,
        max_steps: int | None = None,
        script: list[tuple[int, Command]] | None = None,
        record: bool = True,
    ) -> Status:
        """Drive the step loop until a terminal status, the step bound, or a
        script that leaves the session non-running.

        Scripted commands apply at their step boundary: every (beforeStep,
        command) pair with beforeStep equal to the number of completed steps
        runs, in order, before the next step. Terminal sessions are recorded
        into the history store.
        """
        if self.status not in (Status.CREATED, Status.PAUSED):
            raise SessionFault(
                f"run requires a Created or Paused session, not {self.status.value}"
            )
        if max_steps is not None and max_steps <= 0:
            return self.status

        script = script or []
        pending = sorted(enumerate(script), key=lambda item: (item[1][0], item[0]))
        queue = [(before, command) for _, (before, command) in pending]
        script_json = [
            {"beforeStep": before, "command": command.to_json()}
            for before, command in script
        ]
        self._transition(Status.RUNNING)
        steps_this_call = 0
        while True:
            while queue and queue[0][0] <= self.step_index:
                _, command = queue.pop(0)
                result = self.apply_command(command)
                if not result.ok:
                    self._log("warning", f"command {command.type} rejected: {result.message}")
            self.drain_commands()
            if self.status is not Status.RUNNING:
                break
            if max_steps is not None and steps_this_call >= max_steps:
                self._transition(Status.PAUSED)
                self._log("control", f"step bound {max_steps} reached")
                break
            try:
                self.step()
            except SessionFault:
                break
            steps_this_call += 1

        if self.status in TERMINAL and record:
            self.record_instance(command_script=script_json)
        return self.status

    def replay(self, inst: HistoricalInstance, record: bool = True) -> Status:
        """Re-execute a good-practice instance, asserting at every selection
        that the engine still chooses the recorded activity."""
        if self.status is not Status.CREATED:
            raise ValueError(f"replay requires a Created session, not {self.status.value}")
        if inst.scenario_hash != self.scenario_hash:
            raise ValueError(
                "replay rejected: instance belongs to a different scenario "
                f"({inst.scenario_hash[:12]} != {self.scenario_hash[:12]})"
            )
        if inst.label is not Label.GOOD_PRACTICE:
            raise ValueError("replay rejected: instance is not labeled GoodPractice")
        self._transition(Status.RUNNING)
        self._log("control", f"replaying instance {inst.instance_id}")
        self._in_replay = True
        try:
            for expected in inst.activity_sequence:
                self.step(expected_activity=expected)
        finally:
            self._in_replay = False
        if self.status is Status.RUNNING:
            self._transition(Status.COMPLETED)
            self._log("control", "replay completed; sequence reproduced")
        if self.status in TERMINAL and record:
            self.record_instance()
        return self.status

    def record_instance(self, command_script: list[dict] | None = None) -> str | None:
        if self.history is None or self.status not in TERMINAL:
            return None
        status_map = {
            Status.COMPLETED: CompletionStatus.GOAL_ACHIEVED,
            Status.STUCK: CompletionStatus.STUCK,
            Status.FAULTED: CompletionStatus.ABORTED,
            Status.ABORTED: CompletionStatus.ABORTED,
        }
        inst = HistoricalInstance(
            instance_id=self.instance_id,
            scenario_hash=self.scenario_hash,
            seed=self.seed,
            activity_sequence=[r.activity_id for r in self.trace],
            records=list(self.trace),
            total_time=self.total_time,
            total_cost=self.total_cost,
            completion_status=status_map[self.status],
            command_script=command_script or [],
        )
        existing = self.history.get(self.instance_id)
        if existing is not None:
            # Re-running the same (scenario, seed, script) is idempotent;
            # clashing content for one id is a real error.
            fresh = inst.to_json()
            prior = dict(existing.to_json())
            prior["label"] = Label.UNLABELED.value
            prior["labelAudit"] = []
            if fresh == prior:
                return self.instance_id
            raise DuplicateInstance(
                f"instance {self.instance_id!r} already recorded with different content"
            )
        return self.history.record(inst)
