"""Evaluation semantics, backend parity, and rule matching."""

import random

import pytest

from dbpsim.context import ContextSnapshot
from dbpsim.rules import (
    EvalError,
    RuleKind,
    RuleSet,
    TraceView,
    applicable_rules,
    eval_expr,
    parse_expr,
    parse_rule,
)
from dbpsim.rules import evaluator
from dbpsim.rules import ops
from dbpsim.rules import _vm as pure_vm
from dbpsim.rules.compile import compile_expr

from helpers import (
    OracleError,
    gen_bool,
    gen_num,
    gen_snapshot,
    gen_trace_view,
    oracle_eval_snapshot,
)

try:
    from dbpsim.rules import _vmext as ext_vm
except ImportError:
    ext_vm = None


def snap(**bindings):
    at = bindings.pop("_at", 0)
    return ContextSnapshot({k: _value(v) for k, v in bindings.items()}, at)


def _value(v):
    if isinstance(v, bool) or isinstance(v, str):
        return v
    return float(v)


class TestEvalExpr:
    def test_fixture_comparison(self):
        s = snap(stock=10, orderQty=3)
        assert eval_expr(parse_expr("stock >= orderQty"), s) is True

    def test_executed_count_on_empty_trace(self):
        s = snap()
        expr = parse_expr("executedCount(CheckStock) == 0")
        assert eval_expr(expr, s, TraceView()) is True

    def test_division_by_zero_is_an_error(self):
        s = snap(money=5)
        with pytest.raises(EvalError):
            eval_expr(parse_expr("money / 0 > 1"), s)

    def test_unbound_variable_is_an_error_not_a_default(self):
        s = snap(stock=1)
        with pytest.raises(EvalError):
            eval_expr(parse_expr("ghost > 0"), s)

    def test_evaluation_is_pure(self):
        s = snap(stock=10, orderQty=3)
        trace = TraceView(counts={"A": 1}, last_executed="A")
        expr = parse_expr("stock - orderQty > executedCount(A)")
        before = dict(s.bindings)
        for _ in range(3):
            assert eval_expr(expr, s, trace) == eval_expr(expr, s, trace)
        assert dict(s.bindings) == before
        assert trace.counts == {"A": 1}

    def test_short_circuit_skips_errors(self):
        s = snap(ready=False, money=1)
        assert eval_expr(parse_expr("ready and money / 0 > 1"), s) is False
        assert eval_expr(parse_expr("not ready or money / 0 > 1"), s) is True

    def test_elapsed_and_last_executed(self):
        s = snap(_at=7)
        assert eval_expr(parse_expr("elapsed()"), s) == 7.0
        view = TraceView(counts={}, last_executed="ShipOrder")
        assert eval_expr(parse_expr('lastExecuted() == "ShipOrder"'), s, view) is True


class TestOracleAgreement:
    def test_vm_matches_tree_walk_oracle(self):
        rng = random.Random(99)
        for i in range(600):
            expr = gen_bool(rng, 3) if i % 2 else gen_num(rng, 3)
            s = gen_snapshot(rng)
            view = gen_trace_view(rng)
            try:
                expected = oracle_eval_snapshot(expr, s, view)
                failed = None
            except OracleError as exc:
                expected, failed = None, exc
            if failed is None:
                got = eval_expr(expr, s, view)
                assert got == expected and type(got) is type(expected), expr
            else:
                with pytest.raises(EvalError):
                    eval_expr(expr, s, view)


@pytest.mark.skipif(ext_vm is None, reason="compiled VM not built")
class TestBackendParity:
    def test_opcode_tables_match(self):
        assert ext_vm.OPCODE_TABLE == ops.TABLE

    def test_backends_agree_on_random_programs(self):
        rng = random.Random(7)
        for i in range(400):
            expr = gen_bool(rng, 3) if i % 2 else gen_num(rng, 3)
            program = compile_expr(expr)
            s = gen_snapshot(rng)
            view = gen_trace_view(rng)
            args = (program, s.bindings, view.counts, float(s.at), view.last_executed)
            try:
                pure = pure_vm.run_program(*args)
                pure_err = None
            except EvalError as exc:
                pure, pure_err = None, str(exc)
            try:
                compiled = ext_vm.run_program(*args)
                compiled_err = None
            except EvalError as exc:
                compiled, compiled_err = None, str(exc)
            assert pure_err == compiled_err
            if pure_err is None:
                assert pure == compiled and type(pure) is type(compiled)

    def test_default_backend_is_compiled(self):
        import os

        if os.environ.get("DBPSIM_PURE_PYTHON"):
            pytest.skip("fallback forced via DBPSIM_PURE_PYTHON")
        assert evaluator.BACKEND == "compiled"


class TestApplicableRules:
    FIXTURE_RULES = [
        "rule r1 priority 5 when orderPending and not orderOpen select ReceiveOrder",
        "rule r2 priority 5 when orderOpen and not stockChecked select CheckStock",
        "rule r3 priority 8 when orderOpen and stockChecked and stock >= orderQty select ShipOrder",
        "rule r4 priority 6 when orderOpen and stockChecked and stock < orderQty and supplierAvailable select ReplenishStock",
        "rule r5 priority 4 when orderOpen and stockChecked and stock < orderQty and not supplierAvailable select RejectOrder",
    ]

    def fixture_set(self):
        return RuleSet([parse_rule(src) for src in self.FIXTURE_RULES])

    def test_fixture_snapshot_selects_r3(self):
        s = snap(
            orderPending=True, orderOpen=True, stockChecked=True,
            stock=10, orderQty=3, supplierAvailable=True,
        )
        rules = applicable_rules(self.fixture_set(), RuleKind.SELECTION, s, TraceView())
        assert [r.id for r in rules] == ["r3"]

    def test_empty_rule_set(self):
        assert applicable_rules(RuleSet(), RuleKind.SELECTION, snap(), TraceView()) == []

    def test_equal_priority_ties_break_by_id(self):
        rules = RuleSet(
            [
                parse_rule("rule b priority 5 when ready select S"),
                parse_rule("rule a priority 5 when ready select T"),
            ]
        )
        out = applicable_rules(rules, RuleKind.SELECTION, snap(ready=True), TraceView())
        assert [r.id for r in out] == ["a", "b"]

    def test_order_is_priority_then_id(self):
        rules = RuleSet(
            [
                parse_rule("rule low priority 1 when ready select S"),
                parse_rule("rule hi priority 9 when ready select T"),
                parse_rule("rule mid priority 5 when ready select U"),
            ]
        )
        out = applicable_rules(rules, RuleKind.SELECTION, snap(ready=True), TraceView())
        assert [r.id for r in out] == ["hi", "mid", "low"]

    def test_eval_error_excludes_rule_and_reports(self):
        rules = RuleSet(
            [
                parse_rule("rule ok when ready select S"),
                parse_rule("rule broken when money / 0 > 1 select T"),
            ]
        )
        seen = []
        out = applicable_rules(
            rules, RuleKind.SELECTION, snap(ready=True, money=1), TraceView(),
            on_error=lambda rule, exc: seen.append((rule.id, str(exc))),
        )
        assert [r.id for r in out] == ["ok"]
        assert seen and seen[0][0] == "broken"

    def test_disabled_rules_never_match(self):
        rs = self.fixture_set()
        for rule in rs:
            rule.enabled = False
        s = snap(
            orderPending=True, orderOpen=True, stockChecked=True,
            stock=10, orderQty=3, supplierAvailable=True,
        )
        assert applicable_rules(rs, RuleKind.SELECTION, s, TraceView()) == []

    def test_matches_brute_force_on_random_inputs(self):
        # Plain lists here: rule sets with several goal rules are invalid as
        # a RuleSet but applicable_rules accepts any iterable.
        rng = random.Random(31)
        from helpers import gen_rule
        for _ in range(150):
            rules = [gen_rule(rng, f"r{i}") for i in range(rng.randint(0, 8))]
            s = gen_snapshot(rng)
            view = gen_trace_view(rng)
            kind = rng.choice(list(RuleKind))
            expected = []
            for rule in sorted(rules, key=lambda r: (-r.priority, r.id)):
                if not rule.enabled or rule.kind is not kind:
                    continue
                try:
                    if oracle_eval_snapshot(rule.condition, s, view):
                        expected.append(rule.id)
                except OracleError:
                    pass
            got = [r.id for r in applicable_rules(rules, kind, s, view)]
            assert got == expected
