"""Headless batch runner, scenario validator, metrics reporter, and server
launcher. Exit codes from `run` are stable API: 0 goal achieved, 2 stuck,
3 faulted, 4 aborted, 5 not terminal (script left the session paused)."""

from __future__ import annotations

import json
import socket
import sys
from pathlib import Path

import click

from .canon import canonical_bytes
from .engine import Session, Status
from .history import DuplicateInstance
from .scenario import ValidationError, load_scenario
from .storage import (
    StorageError,
    dump_trace,
    load_command_script,
    read_history_file,
    write_history_file,
)

_RUN_EXIT = {
    Status.COMPLETED: 0,
    Status.STUCK: 2,
    Status.FAULTED: 3,
    Status.ABORTED: 4,
}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"bad config file: {exc}")


@click.group()
def main():
    """Rule- and context-driven dynamic process simulation."""


@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="RNG seed (default: scenario's)")
@click.option("--script", "script_path", type=click.Path(exists=True, dir_okay=False),
              help="Command script applied at step boundaries")
@click.option("--max-steps", type=int, default=10000, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Write the canonical trace export here")
@click.option("--history", "history_path", type=click.Path(dir_okay=False),
              envvar="DBPSIM_HISTORY", help="History store to append to")
@click.option("--instance-id", default=None, help="Override the derived instance id")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON config providing flag defaults")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable summary on stdout")
def run(scenario, seed, script_path, max_steps, out_path, history_path,
        instance_id, config_path, as_json):
    """Run one scenario to a terminal status, headless.

    Interactive decision points terminate the run as Stuck in this mode;
    live decision handling needs the server and UI.
    """
    config = _load_config(config_path)
    seed = seed if seed is not None else config.get("seed")
    script_path = script_path or config.get("script")
    out_path = out_path or config.get("out")
    history_path = history_path or config.get("history")

    try:
        sc = load_scenario(Path(scenario).read_bytes())
    except ValidationError as exc:
        raise click.ClickException(f"invalid scenario: {exc}")
    script = []
    script_json: list[dict] = []
    if script_path:
        try:
            script = load_command_script(Path(script_path).read_bytes())
        except StorageError as exc:
            raise click.ClickException(str(exc))
        script_json = [
            {"beforeStep": before, "command": cmd.to_json()} for before, cmd in script
        ]

    store = read_history_file(history_path) if history_path else None
    session = Session(
        sc, seed=seed, session_id="cli", instance_id=instance_id,
        mode="batch", history=store,
    )
    status = session.run(max_steps=max_steps, script=script, record=False)

    recorded = None
    if store is not None and status in _RUN_EXIT:
        try:
            recorded = session.record_instance(command_script=script_json)
        except DuplicateInstance as exc:
            raise click.ClickException(
                f"{exc}; pass --instance-id to record this run separately"
            )
        write_history_file(history_path, store)

    if out_path:
        Path(out_path).write_bytes(dump_trace(session, script_json))

    summary = {
        "status": status.value,
        "instanceId": session.instance_id,
        "scenarioHash": session.scenario_hash,
        "seed": session.seed,
        "steps": session.step_index,
        "activities": [r.activity_id for r in session.trace],
        "totals": {"time": session.total_time, "cost": session.total_cost},
        "recorded": recorded,
    }
    if as_json:
        click.echo(json.dumps(summary, sort_keys=True))
    else:
        click.echo(
            f"{status.value}: {len(session.trace)} activities, "
            f"time={session.total_time}, cost={session.total_cost:g}, "
            f"instance={session.instance_id}"
        )
        if session.fault_reason:
            click.echo(f"fault: {session.fault_reason}", err=True)
    sys.exit(_RUN_EXIT.get(status, 5))


@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def validate(scenario, as_json):
    """Validate a scenario file; nonzero exit and a diagnostic on failure."""
    try:
        sc = load_scenario(Path(scenario).read_bytes())
    except ValidationError as exc:
        if as_json:
            click.echo(json.dumps({"valid": False, "path": exc.path, "message": exc.message}))
        else:
            click.echo(f"invalid: {exc}", err=True)
        sys.exit(1)
    info = {
        "valid": True,
        "name": sc.name,
        "scenarioHash": sc.scenario_hash,
        "activities": len(sc.activity_specs),
        "rules": len(sc.rules),
    }
    if as_json:
        click.echo(json.dumps(info, sort_keys=True))
    else:
        click.echo(
            f"ok: {sc.name} ({info['activities']} activities, {info['rules']} rules, "
            f"hash {sc.scenario_hash[:16]})"
        )


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--history", "history_path", type=click.Path(dir_okay=False),
              envvar="DBPSIM_HISTORY", help="History store file (loaded and flushed)")
@click.option("--step-delay", type=float, default=0.05, show_default=True,
              help="Pause between auto-run steps, seconds")
def serve(port, host, history_path, step_delay):
    """Host the HTTP interface for interactive sessions."""
    import uvicorn

    from .api import create_app

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        probe.close()
        raise click.ClickException(f"cannot bind {host}:{port}: {exc}")
    probe.close()

    store = read_history_file(history_path) if history_path else None
    app = create_app(history=store, history_path=history_path, step_delay=step_delay)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--history", "history_path", required=True,
              type=click.Path(dir_okay=False), envvar="DBPSIM_HISTORY")
@click.option("--scenario-hash", "scenario_hash", default=None,
              help="Restrict to one scenario population")
@click.option("--json", "as_json", is_flag=True)
def report(history_path, scenario_hash, as_json):
    """Aggregate time/cost metrics over recorded instances, per label."""
    store = read_history_file(history_path)
    hashes = (
        [scenario_hash]
        if scenario_hash
        else sorted({i.scenario_hash for i in store.instances()})
    )
    tables = [store.metrics(h) for h in hashes]
    if as_json:
        sys.stdout.buffer.write(canonical_bytes(tables))
        return
    if not tables or all(t["count"] == 0 for t in tables):
        if scenario_hash and (not tables or tables[0]["count"] == 0):
            click.echo(f"warning: no instances for scenario {scenario_hash}", err=True)
        click.echo("no instances")
        return
    for table in tables:
        click.echo(f"scenario {table['scenarioHash'][:16]}  ({table['count']} instances)")
        for label, entry in table["byLabel"].items():
            if entry["count"] == 0:
                click.echo(f"  {label:<14} 0")
                continue
            t, c = entry["totalTime"], entry["totalCost"]
            click.echo(
                f"  {label:<14} {entry['count']:>3}  "
                f"time mean/min/max {t['mean']:g}/{t['min']:g}/{t['max']:g}  "
                f"cost mean/min/max {c['mean']:g}/{c['min']:g}/{c['max']:g}"
            )


if __name__ == "__main__":
    main()
