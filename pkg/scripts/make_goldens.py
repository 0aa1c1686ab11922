"""Regenerate the committed golden files under fixtures/goldens/.

Run from the repo root after any intentional engine change:

    python scripts/make_goldens.py

The acceptance suite asserts byte equality against these files AND checks
the hand-derived facts (sequence, totals) independently, so regenerating
does not silently bless a behavior change that breaks the derived values.
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from dbpsim import Command, HistoryStore, Label, Session, load_scenario  # noqa: E402
from dbpsim.canon import canonical_bytes  # noqa: E402
from dbpsim.storage import (  # noqa: E402
    dump_trace,
    load_command_script,
    save_history,
)
from dbpsim.viewmodel import state_view  # noqa: E402

FIXTURES = ROOT / "fixtures"
GOLDENS = FIXTURES / "goldens"

AUDIT_AT = "2026-01-01T00:00:00+00:00"


def main() -> None:
    GOLDENS.mkdir(exist_ok=True)
    scenario = load_scenario((FIXTURES / "ordering.scenario.json").read_bytes())
    script = load_command_script((FIXTURES / "ordering_edit.commands.json").read_bytes())
    script_json = [
        {"beforeStep": before, "command": cmd.to_json()} for before, cmd in script
    ]

    store = HistoryStore()

    # Golden A: uninterrupted run, seed 42. The derived instance id depends
    # only on (scenario, seed), so the edited run below shares it: the edit
    # happens within the same instance.
    a = Session(scenario, seed=42, session_id="golden", history=store)
    a.run(max_steps=100)
    (GOLDENS / "golden_a.trace.json").write_bytes(dump_trace(a))
    print("golden_a:", a.status.value, [r.activity_id for r in a.trace])

    # Golden B: same scenario and seed, rules edited while paused before the
    # fourth step.
    b = Session(scenario, seed=42, session_id="golden")
    b.run(max_steps=100, script=script)
    assert b.instance_id == a.instance_id
    (GOLDENS / "golden_b.trace.json").write_bytes(dump_trace(b, script_json))
    print("golden_b:", b.status.value, [r.activity_id for r in b.trace])

    # The history artifact needs both shapes side by side, so the edited
    # variant goes in under an explicit distinct id.
    b_stored = Session(
        scenario, seed=42, session_id="golden", instance_id="i-golden-edited",
        history=store,
    )
    b_stored.run(max_steps=100, script=script)
    store.label(a.instance_id, Label.GOOD_PRACTICE, who="analyst", at=AUDIT_AT)
    (GOLDENS / "golden.history.json").write_bytes(save_history(store))

    # Step-3 interactive state view against the history above: ShipOrder has
    # just executed, ReceiveOrder/CheckStock ran earlier this instance, and
    # RejectOrder appears only in the recorded edited instance.
    s = Session(
        scenario, seed=42, session_id="view", instance_id="i-view",
        mode="interactive", history=store,
    )
    s.apply_command(Command(type="step", n=3))
    view = state_view(s, store)
    (GOLDENS / "stateview_step3.json").write_bytes(canonical_bytes(view))
    print("stateview_step3:", [n for n in view["processGraph"]["nodes"]])


if __name__ == "__main__":
    main()
