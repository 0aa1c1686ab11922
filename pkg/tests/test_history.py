"""History store: recording, labeling, the bad-practice veto, replay
selection, and metrics."""

import random

import pytest

from dbpsim.activities import ExecutionRecord
from dbpsim.history import (
    CompletionStatus,
    DuplicateInstance,
    HistoricalInstance,
    HistoryError,
    HistoryStore,
    Label,
)

HASH = "scenario-hash-1"


def make_instance(iid, seq, cost=0.0, time=0, scenario=HASH, label=Label.UNLABELED):
    records = []
    clock = 0
    for aid in seq:
        records.append(
            ExecutionRecord(aid, clock, clock + 1, cost / max(len(seq), 1), "h0", "h1", "r")
        )
        clock += 1
    return HistoricalInstance(
        instance_id=iid,
        scenario_hash=scenario,
        activity_sequence=list(seq),
        records=records,
        total_time=time,
        total_cost=cost,
        completion_status=CompletionStatus.GOAL_ACHIEVED,
        label=label,
    )


class TestRecord:
    def test_record_and_retrieve(self, store):
        iid = store.record(make_instance("i1", ["A", "B"], cost=3.0, time=7))
        assert iid == "i1"
        assert store.get("i1").total_cost == 3.0

    def test_zero_activity_instance(self, store):
        inst = make_instance("empty", [], time=0)
        inst.completion_status = CompletionStatus.ABORTED
        store.record(inst)
        assert store.get("empty").total_time == 0

    def test_duplicate_id_rejected(self, store):
        store.record(make_instance("i1", ["A"]))
        with pytest.raises(DuplicateInstance):
            store.record(make_instance("i1", ["A"]))


class TestLabel:
    def test_label_appends_audit(self, store):
        store.record(make_instance("i1", ["A"]))
        store.label("i1", Label.BAD_PRACTICE, who="tester", at="2026-01-01T00:00:00+00:00")
        inst = store.get("i1")
        assert inst.label is Label.BAD_PRACTICE
        assert inst.label_audit == [
            {"label": "BadPractice", "who": "tester", "at": "2026-01-01T00:00:00+00:00"}
        ]

    def test_relabel_restores_behavior(self, store):
        store.record(make_instance("bad", ["A", "B", "C"]))
        store.label("bad", Label.BAD_PRACTICE)
        assert store.veto_check(["A", "B"], "C", HASH).vetoed
        store.label("bad", Label.UNLABELED)
        assert not store.veto_check(["A", "B"], "C", HASH).vetoed

    def test_label_unknown_id(self, store):
        with pytest.raises(HistoryError):
            store.label("nope", Label.GOOD_PRACTICE)


class TestVetoCheck:
    def test_exact_bad_sequence_vetoed(self, store):
        store.record(make_instance("bad", ["A", "B", "C"], label=Label.BAD_PRACTICE))
        verdict = store.veto_check(["A", "B"], "C", HASH)
        assert verdict.vetoed and verdict.matched_instance == "bad"

    def test_proper_prefix_vetoed_without_alternative(self, store):
        store.record(make_instance("bad", ["A", "B", "C"], label=Label.BAD_PRACTICE))
        assert store.veto_check(["A"], "B", HASH).vetoed

    def test_shared_good_prefix_allowed(self, store):
        store.record(make_instance("bad", ["A", "B", "C"], label=Label.BAD_PRACTICE))
        store.record(make_instance("good", ["A", "B", "D"], label=Label.GOOD_PRACTICE))
        assert not store.veto_check(["A"], "B", HASH).vetoed
        # Committing to the full bad sequence stays vetoed.
        assert store.veto_check(["A", "B"], "C", HASH).vetoed

    def test_unlabeled_prefix_also_allows(self, store):
        store.record(make_instance("bad", ["A", "B", "C"], label=Label.BAD_PRACTICE))
        store.record(make_instance("seen", ["A", "B"], label=Label.UNLABELED))
        assert not store.veto_check(["A"], "B", HASH).vetoed

    def test_empty_history_always_allows(self, store):
        assert not store.veto_check(["A", "B"], "C", HASH).vetoed

    def test_other_scenario_history_is_invisible(self, store):
        store.record(
            make_instance("bad", ["A", "B"], scenario="other", label=Label.BAD_PRACTICE)
        )
        assert not store.veto_check(["A"], "B", HASH).vetoed

    def test_label_monotonicity(self, store):
        """Unlabeled -> bad never newly allows; bad -> unlabeled never newly
        vetoes, over randomized stores and probes."""
        rng = random.Random(23)
        alphabet = ["A", "B", "C", "D"]
        for _ in range(40):
            probe_store = HistoryStore()
            instances = []
            for i in range(rng.randint(1, 6)):
                seq = [rng.choice(alphabet) for _ in range(rng.randint(1, 4))]
                label = rng.choice([Label.UNLABELED, Label.GOOD_PRACTICE, Label.BAD_PRACTICE])
                inst = make_instance(f"i{i}", seq, label=label)
                probe_store.record(inst)
                instances.append(inst)
            probes = [
                ([rng.choice(alphabet) for _ in range(rng.randint(0, 3))], rng.choice(alphabet))
                for _ in range(20)
            ]
            before = [probe_store.veto_check(seq, cand, HASH).vetoed for seq, cand in probes]
            unlabeled = [i for i in instances if i.label is Label.UNLABELED]
            if unlabeled:
                probe_store.label(unlabeled[0].instance_id, Label.BAD_PRACTICE)
                after = [probe_store.veto_check(s, c, HASH).vetoed for s, c in probes]
                assert all(b <= a for b, a in zip(before, after))
                probe_store.label(unlabeled[0].instance_id, Label.UNLABELED)
                restored = [probe_store.veto_check(s, c, HASH).vetoed for s, c in probes]
                assert restored == before


class TestPickGoodPractice:
    def test_min_cost(self, store):
        store.record(make_instance("i1", ["A"], cost=5.0, time=2, label=Label.GOOD_PRACTICE))
        store.record(make_instance("i2", ["B"], cost=3.0, time=9, label=Label.GOOD_PRACTICE))
        assert store.pick_good_practice(HASH, "MinCost").instance_id == "i2"
        assert store.pick_good_practice(HASH, "MinTime").instance_id == "i1"

    def test_none_without_good_instances(self, store):
        store.record(make_instance("i1", ["A"], label=Label.BAD_PRACTICE))
        assert store.pick_good_practice(HASH, "MinCost") is None

    def test_tie_goes_to_earliest(self, store):
        store.record(make_instance("first", ["A"], cost=3.0, label=Label.GOOD_PRACTICE))
        store.record(make_instance("second", ["B"], cost=3.0, label=Label.GOOD_PRACTICE))
        assert store.pick_good_practice(HASH, "MinCost").instance_id == "first"

    def test_unknown_criterion(self, store):
        with pytest.raises(ValueError):
            store.pick_good_practice(HASH, "MinFuss")


class TestMetrics:
    def test_single_instance(self, store):
        store.record(make_instance("i1", ["A"], cost=3.0, time=7))
        m = store.metrics(HASH)
        assert m["count"] == 1
        entry = m["byLabel"]["Unlabeled"]
        assert entry["totalTime"] == {"mean": 7, "min": 7, "max": 7}
        assert entry["totalCost"] == {"mean": 3.0, "min": 3.0, "max": 3.0}

    def test_empty_store(self, store):
        m = store.metrics(HASH)
        assert m["count"] == 0
        for entry in m["byLabel"].values():
            assert entry["count"] == 0
            assert "totalTime" not in entry

    def test_matches_brute_force_fold(self, store):
        rng = random.Random(4)
        expected: dict = {label: [] for label in Label}
        for i in range(60):
            label = rng.choice(list(Label))
            cost = float(rng.randint(0, 20))
            time = rng.randint(0, 30)
            store.record(make_instance(f"i{i}", ["A"], cost=cost, time=time, label=label))
            expected[label].append((time, cost))
        m = store.metrics(HASH)
        assert m["count"] == 60
        for label, rows in expected.items():
            entry = m["byLabel"][label.value]
            assert entry["count"] == len(rows)
            if rows:
                times = [t for t, _ in rows]
                costs = [c for _, c in rows]
                assert entry["totalTime"]["mean"] == pytest.approx(sum(times) / len(times))
                assert entry["totalTime"]["min"] == min(times)
                assert entry["totalTime"]["max"] == max(times)
                assert entry["totalCost"]["mean"] == pytest.approx(sum(costs) / len(costs))
