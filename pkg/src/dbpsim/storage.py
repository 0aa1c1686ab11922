"""File formats: trace exports, history stores, and command scripts.

Serialization is canonical (sorted keys, fixed number formatting, LF), so
byte equality of two files means semantic equality. History files carry a
per-instance digest; a mismatch or a truncated document fails the whole load
rather than loading partially.
"""

from __future__ import annotations

import json
from pathlib import Path

from .canon import canonical_bytes, digest
from .engine import Command, Session
from .history import HistoricalInstance, HistoryStore

HISTORY_SCHEMA_VERSION = 1
TRACE_SCHEMA_VERSION = 1
COMMANDS_SCHEMA_VERSION = 1


class StorageError(Exception):
    pass


class CorruptHistory(StorageError):
    pass


# Trace exports

def trace_export(session: Session, script_json: list[dict] | None = None) -> dict:
    final = dict(session._last_step_end.bindings)
    return {
        "schemaVersion": TRACE_SCHEMA_VERSION,
        "instance": {
            "instanceId": session.instance_id,
            "scenarioHash": session.scenario_hash,
            "scenarioName": session.scenario.name,
            "seed": session.seed,
            "mode": session.mode,
            "status": session.status.value,
            "commandScript": script_json or [],
        },
        "records": [r.to_json() for r in session.trace],
        "finalContext": final,
        "totals": {"time": session.total_time, "cost": session.total_cost},
        "progressHistory": list(session.progress_history),
        "watchPoints": [wp.to_json() for wp in session.watch_points],
        "log": [entry.to_json() for entry in session.log],
    }


def dump_trace(session: Session, script_json: list[dict] | None = None) -> bytes:
    return canonical_bytes(trace_export(session, script_json))


# Command scripts

def load_command_script(source: bytes | str | dict) -> list[tuple[int, Command]]:
    """Parse a *.commands.json document into (beforeStep, command) pairs.

    beforeStep counts completed steps: an entry with beforeStep N applies at
    the boundary before the (N+1)-th step.
    """
    if isinstance(source, (bytes, str)):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise StorageError(f"command script is not valid JSON: {exc}")
    else:
        data = source
    if not isinstance(data, dict) or data.get("schemaVersion") != COMMANDS_SCHEMA_VERSION:
        raise StorageError("command script needs schemaVersion 1")
    out: list[tuple[int, Command]] = []
    for i, entry in enumerate(data.get("commands") or []):
        if not isinstance(entry, dict) or "beforeStep" not in entry or "command" not in entry:
            raise StorageError(f"commands[{i}] needs beforeStep and command")
        before = entry["beforeStep"]
        if isinstance(before, bool) or not isinstance(before, int) or before < 0:
            raise StorageError(f"commands[{i}].beforeStep must be a non-negative integer")
        try:
            command = Command.from_json(entry["command"])
        except (ValueError, TypeError) as exc:
            raise StorageError(f"commands[{i}].command: {exc}")
        out.append((before, command))
    return out


def dump_command_script(script: list[tuple[int, Command]]) -> bytes:
    return canonical_bytes(
        {
            "schemaVersion": COMMANDS_SCHEMA_VERSION,
            "commands": [
                {"beforeStep": before, "command": command.to_json()}
                for before, command in script
            ],
        }
    )


# History stores

def _instance_with_digest(inst: HistoricalInstance) -> dict:
    body = inst.to_json()
    body["digest"] = digest(body)
    return body


def save_history(store: HistoryStore) -> bytes:
    return canonical_bytes(
        {
            "schemaVersion": HISTORY_SCHEMA_VERSION,
            "instances": [_instance_with_digest(i) for i in store.instances()],
        }
    )


def load_history(source: bytes | str) -> HistoryStore:
    """Lossless inverse of save_history, labels and audit entries included."""
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CorruptHistory(f"history file is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise CorruptHistory("history file must be a JSON object")
    version = data.get("schemaVersion")
    if version != HISTORY_SCHEMA_VERSION:
        raise StorageError(
            f"history schemaVersion {version!r} not supported (expected {HISTORY_SCHEMA_VERSION})"
        )
    store = HistoryStore()
    for i, body in enumerate(data.get("instances") or []):
        if not isinstance(body, dict) or "digest" not in body:
            raise CorruptHistory(f"instances[{i}] has no digest")
        body = dict(body)
        expected = body.pop("digest")
        if digest(body) != expected:
            raise CorruptHistory(f"instances[{i}] digest mismatch")
        try:
            store.record(HistoricalInstance.from_json(body))
        except (KeyError, ValueError) as exc:
            raise CorruptHistory(f"instances[{i}] malformed: {exc}")
    return store


def read_history_file(path: str | Path) -> HistoryStore:
    p = Path(path)
    if not p.exists():
        return HistoryStore()
    return load_history(p.read_bytes())


def write_history_file(path: str | Path, store: HistoryStore) -> None:
    Path(path).write_bytes(save_history(store))
