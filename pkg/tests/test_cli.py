"""Command-line surface: exit codes, determinism of written files, and the
report output."""

import json
from pathlib import Path

from click.testing import CliRunner

from dbpsim.cli import main


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


class TestValidate:
    def test_valid_fixture(self, fixtures_dir):
        result = invoke("validate", fixtures_dir / "ordering.scenario.json")
        assert result.exit_code == 0, result.output
        assert "ok:" in result.output

    def test_invalid_scenario_nonzero_with_path(self, tmp_path, fixtures_dir):
        doc = json.loads((fixtures_dir / "ordering.scenario.json").read_bytes())
        doc["rules"].append("rule rX when stok > 1 select ShipOrder")
        bad = tmp_path / "bad.scenario.json"
        bad.write_text(json.dumps(doc))
        result = invoke("validate", bad)
        assert result.exit_code == 1
        assert "/rules/" in result.output

    def test_duplicate_rule_id_nonzero(self, tmp_path, fixtures_dir):
        doc = json.loads((fixtures_dir / "ordering.scenario.json").read_bytes())
        doc["rules"].append(doc["rules"][0])
        bad = tmp_path / "dup.scenario.json"
        bad.write_text(json.dumps(doc))
        assert invoke("validate", bad).exit_code == 1

    def test_json_output(self, fixtures_dir):
        result = invoke("validate", fixtures_dir / "ordering.scenario.json", "--json")
        info = json.loads(result.output)
        assert info["valid"] is True and info["rules"] == 6


class TestRun:
    def test_completed_run_exit_zero_and_golden_bytes(self, tmp_path, fixtures_dir, goldens_dir):
        out = tmp_path / "a.trace.json"
        result = invoke(
            "run", fixtures_dir / "ordering.scenario.json", "--seed", 42, "--out", out
        )
        assert result.exit_code == 0, result.output
        assert out.read_bytes() == (goldens_dir / "golden_a.trace.json").read_bytes()

    def test_same_invocation_twice_byte_identical(self, tmp_path, fixtures_dir):
        outs = []
        for name in ("x.json", "y.json"):
            out = tmp_path / name
            history = tmp_path / f"h-{name}"
            result = invoke(
                "run", fixtures_dir / "ordering.scenario.json",
                "--seed", 42, "--out", out, "--history", history,
            )
            assert result.exit_code == 0
            outs.append((out.read_bytes(), history.read_bytes()))
        assert outs[0] == outs[1]

    def test_edited_script_matches_golden_b(self, tmp_path, fixtures_dir, goldens_dir):
        out = tmp_path / "b.trace.json"
        result = invoke(
            "run", fixtures_dir / "ordering.scenario.json",
            "--seed", 42,
            "--script", fixtures_dir / "ordering_edit.commands.json",
            "--out", out,
        )
        assert result.exit_code == 2  # stagnation leaves the edited run stuck
        assert out.read_bytes() == (goldens_dir / "golden_b.trace.json").read_bytes()

    def test_faulted_run_exit_three(self, fixtures_dir):
        result = invoke("run", fixtures_dir / "oscillator.scenario.json")
        assert result.exit_code == 3

    def test_stuck_run_exit_two(self, fixtures_dir):
        result = invoke("run", fixtures_dir / "flatgoal.scenario.json")
        assert result.exit_code == 2

    def test_history_appends_and_rerun_is_idempotent(self, tmp_path, fixtures_dir):
        history = tmp_path / "store.json"
        for _ in range(2):
            result = invoke(
                "run", fixtures_dir / "ordering.scenario.json",
                "--seed", 42, "--history", history,
            )
            assert result.exit_code == 0
        doc = json.loads(history.read_bytes())
        assert len(doc["instances"]) == 1

    def test_json_summary(self, fixtures_dir):
        result = invoke(
            "run", fixtures_dir / "ordering.scenario.json", "--seed", 42, "--json"
        )
        summary = json.loads(result.output)
        assert summary["status"] == "Completed"
        assert summary["totals"] == {"time": 9, "cost": 9.0}

    def test_config_file_provides_defaults(self, tmp_path, fixtures_dir):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"seed": 42, "out": str(tmp_path / "t.json")}))
        result = invoke(
            "run", fixtures_dir / "ordering.scenario.json", "--config", config
        )
        assert result.exit_code == 0
        assert (tmp_path / "t.json").exists()


class TestReport:
    def test_report_matches_metrics(self, tmp_path, fixtures_dir):
        history = tmp_path / "store.json"
        invoke("run", fixtures_dir / "ordering.scenario.json", "--seed", 42,
               "--history", history)
        result = invoke("report", "--history", history, "--json")
        tables = json.loads(result.output)
        assert tables[0]["count"] == 1
        unl = tables[0]["byLabel"]["Unlabeled"]
        assert unl["totalCost"] == {"mean": 9, "min": 9, "max": 9}

    def test_empty_store_exit_zero(self, tmp_path):
        history = tmp_path / "none.json"
        result = invoke("report", "--history", history)
        assert result.exit_code == 0
        assert "no instances" in result.output

    def test_unknown_hash_warns(self, tmp_path, fixtures_dir):
        history = tmp_path / "store.json"
        invoke("run", fixtures_dir / "ordering.scenario.json", "--seed", 42,
               "--history", history)
        result = invoke("report", "--history", history, "--scenario-hash", "feedbead")
        assert result.exit_code == 0
        assert "warning" in result.output


class TestServe:
    def test_port_busy_fails_cleanly(self):
        import socket

        sock = socket.socket()
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        try:
            result = invoke("serve", "--port", port)
            assert result.exit_code != 0
            assert "cannot bind" in result.output
        finally:
            sock.close()
