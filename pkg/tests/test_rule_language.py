"""Parser, printer, and static-check behavior of the rule language."""

import random

import pytest

from dbpsim.rules import (
    ParseError,
    Rule,
    RuleKind,
    RuleSet,
    RuleSetError,
    parse_expr,
    parse_rule,
    print_rule,
)
from dbpsim.rules.ast import Binary, Lit, Unary, Var
from dbpsim.rules.printer import print_expr

from helpers import gen_rule


class TestParseRule:
    def test_selection_rule(self):
        r = parse_rule(
            "rule r3 priority 8 when orderOpen and stockChecked and stock >= orderQty "
            "select ShipOrder"
        )
        assert r.id == "r3"
        assert r.kind is RuleKind.SELECTION
        assert r.priority == 8
        assert r.target == "ShipOrder"
        assert r.enabled

    def test_goal_rule_canonical_position(self):
        r = parse_rule(
            "rule g1 goal when ordersFulfilled >= 3 and not orderOpen "
            "progress ordersFulfilled maximize"
        )
        assert r.kind is RuleKind.GOAL
        assert r.direction == "maximize"
        assert r.progress == Var("ordersFulfilled")

    def test_goal_keyword_in_action_position(self):
        canonical = parse_rule("rule g goal when done")
        alternate = parse_rule("rule g when done goal")
        assert canonical.structurally_equal(alternate)

    def test_malformed_dangling_operator(self):
        with pytest.raises(ParseError) as err:
            parse_rule("rule bad when stock + select X")
        assert err.value.line == 1
        assert err.value.col > 0

    def test_context_rule_multiple_assignments(self):
        r = parse_rule("rule c when low set alarm := true, level := stock * 2")
        assert r.kind is RuleKind.CONTEXT
        assert [name for name, _ in r.assignments] == ["alarm", "level"]

    def test_veto_rule(self):
        r = parse_rule("rule v priority -2 when risky forbid Launch")
        assert r.kind is RuleKind.VETO
        assert r.target == "Launch"
        assert r.priority == -2

    def test_free_layout_whitespace(self):
        r = parse_rule(
            "rule   r1\n  priority 2\n when orderOpen\n   and not done\nselect  Ship"
        )
        assert r.priority == 2
        assert r.target == "Ship"

    def test_unknown_kind_keyword(self):
        with pytest.raises(ParseError):
            parse_rule("rule r when ready choose Ship")

    def test_condition_must_be_boolean(self):
        with pytest.raises(ParseError) as err:
            parse_rule("rule r when stock + 1 select Ship")
        assert "boolean" in err.value.message or "expected" in err.value.message

    def test_arithmetic_rejects_booleans(self):
        with pytest.raises(ParseError):
            parse_rule("rule r when stock + true > 1 select Ship")

    def test_equality_requires_equal_types(self):
        parse_rule('rule r when lastExecuted() == "Ship" select Ship')
        # stock is pinned numeric by the comparison, ready boolean by 'and'.
        with pytest.raises(ParseError):
            parse_rule("rule r when stock > 1 and stock == ready and ready select Ship")
        with pytest.raises(ParseError):
            parse_rule(
                "rule r when done == 1 select Ship",
                var_types={"done": "bool"},
                activity_ids={"Ship"},
            )

    def test_declared_environment_rejects_unknown_variable(self):
        types = {"stock": "num"}
        with pytest.raises(ParseError) as err:
            parse_rule("rule r when stok > 1 select Ship", var_types=types,
                       activity_ids={"Ship"})
        assert "stok" in err.value.message

    def test_declared_activities_reject_unknown_target(self):
        with pytest.raises(ParseError):
            parse_rule(
                "rule r when stock > 1 select Shop",
                var_types={"stock": "num"},
                activity_ids={"Ship"},
            )

    def test_context_rule_may_only_assign_env_vars(self):
        types = {"stock": "num", "lowStock": "bool", "internal": "bool"}
        parse_rule(
            "rule c when stock < 3 set lowStock := true",
            var_types=types,
            activity_ids=set(),
            env_vars={"lowStock"},
        )
        with pytest.raises(ParseError):
            parse_rule(
                "rule c when stock < 3 set internal := true",
                var_types=types,
                activity_ids=set(),
                env_vars={"lowStock"},
            )

    def test_executed_count_activity_checked(self):
        with pytest.raises(ParseError):
            parse_rule(
                "rule r when executedCount(Nope) > 0 select Ship",
                var_types={},
                activity_ids={"Ship"},
            )

    def test_priority_must_be_integer(self):
        with pytest.raises(ParseError):
            parse_rule("rule r priority 1.5 when ready select Ship")
        r = parse_rule("rule r priority -3 when ready select Ship")
        assert r.priority == -3


class TestPrintRule:
    def test_round_trip_example(self):
        src = (
            "rule r3 priority 8 when orderOpen and stockChecked and stock >= orderQty "
            "select ShipOrder"
        )
        r = parse_rule(src)
        again = parse_rule(print_rule(r))
        assert r.structurally_equal(again)

    def test_priority_zero_printed_explicitly(self):
        r = parse_rule("rule r when ready select Ship")
        assert "priority 0" in print_rule(r)

    def test_parenthesization_preserves_structure(self):
        cases = [
            "a and (b or c)",
            "(a or b) and c",
            "not (a and b)",
            "(x + 1) * 2 >= y - (3 - z)",
            "x - (y - z) > 0",
            "(x < y) == (y < z)",
            "-(x + 1) < 0",
        ]
        for src in cases:
            expr = parse_expr(src)
            assert parse_expr(print_expr(expr)) == expr, src

    def test_500_random_rules_round_trip(self):
        rng = random.Random(2024)
        for i in range(500):
            rule = gen_rule(rng, f"r{i}")
            printed = print_rule(rule)
            reparsed = parse_rule(printed)
            assert rule.structurally_equal(reparsed), printed

    def test_string_escapes_round_trip(self):
        expr = Binary("==", Lit('he said "hi"\n\t\\'), Var("owner"))
        assert parse_expr(print_expr(expr)) == expr


class TestRuleSet:
    def test_revision_bumps_and_unique_ids(self):
        rs = RuleSet()
        a = parse_rule("rule a when x select S")
        rs.add(a)
        assert rs.revision == 1
        with pytest.raises(RuleSetError):
            rs.add(parse_rule("rule a when y select S"))
        rs.replace("a", parse_rule("rule a when y select S"))
        assert rs.revision == 2
        rs.delete("a")
        assert rs.revision == 3
        assert rs.get("a") is None

    def test_single_enabled_goal(self):
        rs = RuleSet([parse_rule("rule g1 goal when done")])
        with pytest.raises(RuleSetError):
            rs.add(parse_rule("rule g2 goal when done"))
        g1 = rs.get("g1")
        g1.enabled = False
        rs.add(parse_rule("rule g2 goal when done"))
        assert rs.goal_rule().id == "g2"

    def test_delete_unreferenced_rule_keeps_others_valid(self):
        rs = RuleSet(
            [parse_rule("rule a when x select S"), parse_rule("rule b when y select T")]
        )
        rs.delete("a")
        assert [r.id for r in rs] == ["b"]
