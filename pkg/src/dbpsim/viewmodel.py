"""Read-side views served to clients: per-session state and the instance
graph with its three-way node classification (just executed / executed this
instance / previous instances only)."""

from __future__ import annotations

from .engine import Session
from .history import HistoryStore

JUST_EXECUTED = "JustExecuted"
EXECUTED_THIS_INSTANCE = "ExecutedThisInstance"
PREVIOUS_INSTANCES_ONLY = "PreviousInstancesOnly"


def build_process_graph(
    session: Session, history: HistoryStore | None
) -> dict:
    """Nodes are the activities seen in any recorded instance of this
    scenario plus the current instance; edges are the consecutive activity
    pairs across those traces."""
    current_seq = [r.activity_id for r in session.trace]
    sequences: list[list[str]] = [current_seq]
    if history is not None:
        for inst in history.instances(session.scenario_hash):
            if inst.instance_id != session.instance_id:
                sequences.append(list(inst.activity_sequence))

    node_ids: set[str] = set()
    edges: set[tuple[str, str]] = set()
    for seq in sequences:
        node_ids.update(seq)
        edges.update(zip(seq, seq[1:]))

    current_set = set(current_seq)
    last = current_seq[-1] if current_seq else None
    nodes = []
    for aid in sorted(node_ids):
        if aid == last:
            status = JUST_EXECUTED
        elif aid in current_set:
            status = EXECUTED_THIS_INSTANCE
        else:
            status = PREVIOUS_INSTANCES_ONLY
        nodes.append({"id": aid, "status": status})
    return {
        "nodes": nodes,
        "edges": sorted([list(e) for e in edges]),
    }


def state_view(session: Session, history: HistoryStore | None = None) -> dict:
    """Full state view, versioned by (rule revision, step index)."""
    pending = None
    if session.pending_decision is not None:
        outcome = session.pending_decision
        pending = {
            "reason": outcome.reason,
            "considered": [
                {"activityId": c.activity_id, "ruleId": c.rule_id}
                for c in outcome.considered
            ],
            "filtered": [
                {
                    "activityId": f.activity_id,
                    "ruleId": f.rule_id,
                    "reason": f.reason,
                    "detail": f.detail,
                }
                for f in outcome.filtered
            ],
        }
    return {
        "sessionId": session.session_id,
        "instanceId": session.instance_id,
        "scenarioHash": session.scenario_hash,
        "status": session.status.value,
        "mode": session.mode,
        "clock": session.clock,
        "stepIndex": session.step_index,
        "version": {"revision": session.rule_set.revision, "stepIndex": session.step_index},
        "rules": {
            "revision": session.rule_set.revision,
            "items": [
                {
                    "id": r.id,
                    "kind": r.kind.value,
                    "priority": r.priority,
                    "enabled": r.enabled,
                    "source": _rule_source(r),
                }
                for r in session.rule_set
            ],
        },
        "context": {
            "bindings": dict(session._last_step_end.bindings),
            "lastDiff": [[name, old, new] for name, old, new in session.last_diff],
        },
        "events": [
            {"at": e.at, "label": e.label, "applied": e.applied}
            for e in sorted(session.external.event_schedule, key=lambda e: (e.at, e.seq))
        ],
        "trace": [r.to_json() for r in session.trace],
        "processGraph": build_process_graph(session, history),
        "watchPoints": [wp.to_json() for wp in session.watch_points],
        "logTail": [entry.to_json() for entry in session.log[-50:]],
        "pendingDecision": pending,
        "totals": {"time": session.total_time, "cost": session.total_cost},
        "progressHistory": list(session.progress_history),
    }


def state_delta(view: dict, since_revision: int, since_step: int) -> dict:
    """Collapse a full view for clients that already hold (revision, step).

    Unchanged version: a marker only. Same revision but newer steps: trace
    and log restricted to entries the client has not seen."""
    version = view["version"]
    if version["revision"] == since_revision and version["stepIndex"] == since_step:
        return {"unchanged": True, "version": version}
    out = dict(view)
    out["unchanged"] = False
    if version["revision"] == since_revision and version["stepIndex"] > since_step:
        out["trace"] = view["trace"][since_step:]
        out["logTail"] = [e for e in view["logTail"] if e["step"] >= since_step]
        out["delta"] = True
    return out


def _rule_source(rule) -> str:
    from .rules.printer import print_rule

    return print_rule(rule)
