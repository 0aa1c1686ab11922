"""Historical instance storage, good/bad-practice labeling, the bad-practice
veto, replay selection, and per-scenario metrics.

The store is append-only and shared across sessions: reads are lock-free,
record/label serialize through one lock. Labels are the only mutable field
and every change is audited.
"""

from __future__ import annotations

import datetime as _dt
import threading
from dataclasses import dataclass, field
from enum import Enum

from .activities import ExecutionRecord


class Label(Enum):
    UNLABELED = "Unlabeled"
    GOOD_PRACTICE = "GoodPractice"
    BAD_PRACTICE = "BadPractice"


class CompletionStatus(Enum):
    GOAL_ACHIEVED = "GoalAchieved"
    STUCK = "Stuck"
    ABORTED = "Aborted"


class HistoryError(Exception):
    pass


class DuplicateInstance(HistoryError):
    pass


@dataclass(frozen=True)
class VetoResult:
    vetoed: bool
    matched_instance: str | None = None

    def __bool__(self) -> bool:
        return self.vetoed


ALLOWED = VetoResult(False)


@dataclass
class HistoricalInstance:
    instance_id: str
    scenario_hash: str
    activity_sequence: list[str]
    records: list[ExecutionRecord]
    total_time: int
    total_cost: float
    completion_status: CompletionStatus
    seed: int = 0
    label: Label = Label.UNLABELED
    label_audit: list[dict] = field(default_factory=list)
    command_script: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "instanceId": self.instance_id,
            "scenarioHash": self.scenario_hash,
            "seed": self.seed,
            "activitySequence": list(self.activity_sequence),
            "records": [r.to_json() for r in self.records],
            "totalTime": self.total_time,
            "totalCost": self.total_cost,
            "completionStatus": self.completion_status.value,
            "label": self.label.value,
            "labelAudit": list(self.label_audit),
            "commandScript": list(self.command_script),
        }

    @staticmethod
    def from_json(data: dict) -> "HistoricalInstance":
        return HistoricalInstance(
            instance_id=data["instanceId"],
            scenario_hash=data["scenarioHash"],
            seed=int(data.get("seed", 0)),
            activity_sequence=list(data["activitySequence"]),
            records=[ExecutionRecord.from_json(r) for r in data["records"]],
            total_time=int(data["totalTime"]),
            total_cost=float(data["totalCost"]),
            completion_status=CompletionStatus(data["completionStatus"]),
            label=Label(data["label"]),
            label_audit=list(data.get("labelAudit", [])),
            command_script=list(data.get("commandScript", [])),
        )


def _is_prefix(p: list[str], seq: list[str]) -> bool:
    return len(p) <= len(seq) and seq[: len(p)] == p


class HistoryStore:
    def __init__(self):
        self._instances: dict[str, HistoricalInstance] = {}
        self._order: list[str] = []
        self._by_scenario: dict[str, list[str]] = {}
        # Ids currently labeled bad, per scenario; keeps the common
        # no-bad-labels veto check O(1) however large the store grows.
        self._bad_by_scenario: dict[str, set[str]] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._instances)

    def record(self, instance: HistoricalInstance) -> str:
        """Persist a completed instance. Ids are write-once."""
        with self._lock:
            if instance.instance_id in self._instances:
                raise DuplicateInstance(
                    f"instance {instance.instance_id!r} already recorded"
                )
            self._instances[instance.instance_id] = instance
            self._order.append(instance.instance_id)
            self._by_scenario.setdefault(instance.scenario_hash, []).append(
                instance.instance_id
            )
            if instance.label is Label.BAD_PRACTICE:
                self._bad_by_scenario.setdefault(instance.scenario_hash, set()).add(
                    instance.instance_id
                )
        return instance.instance_id

    def get(self, instance_id: str) -> HistoricalInstance | None:
        return self._instances.get(instance_id)

    def instances(self, scenario_hash: str | None = None) -> list[HistoricalInstance]:
        if scenario_hash is not None:
            ids = self._by_scenario.get(scenario_hash, [])
            return [self._instances[iid] for iid in ids]
        return [self._instances[iid] for iid in self._order]

    def label(
        self,
        instance_id: str,
        label: Label,
        who: str = "analyst",
        at: str | None = None,
    ) -> None:
        with self._lock:
            instance = self._instances.get(instance_id)
            if instance is None:
                raise HistoryError(f"unknown instance {instance_id!r}")
            instance.label = label
            instance.label_audit.append(
                {
                    "label": label.value,
                    "who": who,
                    "at": at or _dt.datetime.now(_dt.timezone.utc).isoformat(),
                }
            )
            bad = self._bad_by_scenario.setdefault(instance.scenario_hash, set())
            if label is Label.BAD_PRACTICE:
                bad.add(instance_id)
            else:
                bad.discard(instance_id)

    def veto_check(
        self, current_seq: list[str], candidate: str, scenario_hash: str
    ) -> VetoResult:
        """Would executing candidate commit the run to a known-bad trace?

        With p = current_seq + [candidate]: vetoed when p equals a
        bad-practice sequence outright, or when p is a proper prefix of a
        bad-practice sequence and no good or unlabeled sequence of the same
        scenario shares that prefix.
        """
        bad_ids = self._bad_by_scenario.get(scenario_hash)
        if not bad_ids:
            return ALLOWED
        p = list(current_seq) + [candidate]
        proper_prefix_of: str | None = None
        for iid in sorted(bad_ids):
            inst = self._instances[iid]
            if inst.activity_sequence == p:
                return VetoResult(True, inst.instance_id)
            if proper_prefix_of is None and _is_prefix(p, inst.activity_sequence):
                proper_prefix_of = inst.instance_id
        if proper_prefix_of is None:
            return ALLOWED
        for inst in self.instances(scenario_hash):
            if inst.label is Label.BAD_PRACTICE:
                continue
            if _is_prefix(p, inst.activity_sequence):
                return ALLOWED
        return VetoResult(True, proper_prefix_of)

    def pick_good_practice(
        self, scenario_hash: str, criterion: str
    ) -> HistoricalInstance | None:
        """Cheapest (MinCost) or fastest (MinTime) good-practice instance of
        the scenario; ties go to the earliest-recorded instance."""
        if criterion not in ("MinCost", "MinTime"):
            raise ValueError(f"unknown criterion {criterion!r}")
        best: HistoricalInstance | None = None
        for inst in self.instances(scenario_hash):
            if inst.label is not Label.GOOD_PRACTICE:
                continue
            value = inst.total_cost if criterion == "MinCost" else inst.total_time
            if best is None:
                best, best_value = inst, value
            elif value < best_value:
                best, best_value = inst, value
        return best

    def metrics(self, scenario_hash: str) -> dict:
        """Count and mean/min/max of total time and cost, per label."""
        out: dict = {"scenarioHash": scenario_hash, "count": 0, "byLabel": {}}
        for label in Label:
            matching = [
                i
                for i in self.instances(scenario_hash)
                if i.label is label
            ]
            entry: dict = {"count": len(matching)}
            if matching:
                times = [i.total_time for i in matching]
                costs = [i.total_cost for i in matching]
                entry["totalTime"] = {
                    "mean": sum(times) / len(times),
                    "min": min(times),
                    "max": max(times),
                }
                entry["totalCost"] = {
                    "mean": sum(costs) / len(costs),
                    "min": min(costs),
                    "max": max(costs),
                }
            out["byLabel"][label.value] = entry
            out["count"] += len(matching)
        return out
