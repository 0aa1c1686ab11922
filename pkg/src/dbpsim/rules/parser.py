"""Recursive-descent parser for the rule language.

Canonical grammar:

    rule    := "rule" ID ["priority" INT] ("goal" "when" expr goaltail
                                           | "when" expr action)
    action  := "select" ID
             | "set" ID ":=" expr {"," ID ":=" expr}
             | "forbid" ID
             | "goal" goaltail
    goaltail:= ["progress" expr ("maximize" | "minimize")]

Expression precedence, loosest first: or, and, not, comparison, additive,
multiplicative, unary minus. Comparisons do not chain. Layout is free-form:
any whitespace, including newlines, separates tokens.

The "goal" keyword is accepted either before "when" (the canonical position)
or in action position after the condition; both forms parse to the same rule.
"""

from __future__ import annotations

from .ast import BUILTINS, Binary, Call, Expr, Lit, Rule, RuleKind, Unary, Var
from .errors import ParseError
from .lexer import Token, tokenize
from .typecheck import BOOL, NUM, TypeChecker

_CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.cur
        raise ParseError(message, tok.line, tok.col)

    def expect_keyword(self, word: str) -> Token:
        tok = self.cur
        if tok.kind != "keyword" or tok.text != word:
            self.error(f"expected {word!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def expect_op(self, op: str) -> Token:
        tok = self.cur
        if tok.kind != "op" or tok.text != op:
            self.error(f"expected {op!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def expect_ident(self, what: str) -> Token:
        tok = self.cur
        if tok.kind != "ident":
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        return self.cur.kind == "keyword" and self.cur.text == word

    def at_op(self, *ops: str) -> bool:
        return self.cur.kind == "op" and self.cur.text in ops

    # Rule structure

    def parse_rule(self) -> Rule:
        self.expect_keyword("rule")
        rid = self.expect_ident("rule id").text
        priority = 0
        if self.at_keyword("priority"):
            self.advance()
            priority = self._integer("priority")
        if self.at_keyword("goal"):
            self.advance()
            self.expect_keyword("when")
            cond = self.parse_expr()
            rule = self._goal_tail(rid, priority, cond)
        else:
            self.expect_keyword("when")
            cond = self.parse_expr()
            rule = self._action(rid, priority, cond)
        if self.cur.kind != "eof":
            self.error(f"unexpected trailing input {self.cur.text!r}")
        return rule

    def _integer(self, what: str) -> int:
        sign = 1
        if self.at_op("-"):
            self.advance()
            sign = -1
        tok = self.cur
        if tok.kind != "number" or not float(tok.value).is_integer():
            self.error(f"expected integer {what}")
        self.advance()
        return sign * int(tok.value)

    def _action(self, rid: str, priority: int, cond: Expr) -> Rule:
        tok = self.cur
        if tok.kind != "keyword":
            self.error(
                f"expected an action (select/set/forbid/goal), found {tok.text or 'end of input'!r}"
            )
        if tok.text == "select":
            self.advance()
            target = self.expect_ident("activity id").text
            return Rule(rid, RuleKind.SELECTION, cond, priority, target=target)
        if tok.text == "forbid":
            self.advance()
            target = self.expect_ident("activity id").text
            return Rule(rid, RuleKind.VETO, cond, priority, target=target)
        if tok.text == "set":
            self.advance()
            assignments = [self._assignment()]
            while self.at_op(","):
                self.advance()
                assignments.append(self._assignment())
            return Rule(
                rid, RuleKind.CONTEXT, cond, priority, assignments=tuple(assignments)
            )
        if tok.text == "goal":
            self.advance()
            return self._goal_tail(rid, priority, cond)
        self.error(f"expected an action (select/set/forbid/goal), found {tok.text!r}")

    def _assignment(self) -> tuple[str, Expr]:
        name = self.expect_ident("assignment target").text
        self.expect_op(":=")
        return name, self.parse_expr()

    def _goal_tail(self, rid: str, priority: int, cond: Expr) -> Rule:
        progress = None
        direction = None
        if self.at_keyword("progress"):
            self.advance()
            progress = self.parse_expr()
            if self.at_keyword("maximize") or self.at_keyword("minimize"):
                direction = self.advance().text
            else:
                self.error("expected 'maximize' or 'minimize' after progress expression")
        return Rule(
            rid, RuleKind.GOAL, cond, priority, progress=progress, direction=direction
        )

    # Expressions

    def parse_expr(self) -> Expr:
        return self._or()

    def _or(self) -> Expr:
        left = self._and()
        while self.at_keyword("or"):
            tok = self.advance()
            left = Binary("or", left, self._and(), pos=(tok.line, tok.col))
        return left

    def _and(self) -> Expr:
        left = self._not()
        while self.at_keyword("and"):
            tok = self.advance()
            left = Binary("and", left, self._not(), pos=(tok.line, tok.col))
        return left

    def _not(self) -> Expr:
        if self.at_keyword("not"):
            tok = self.advance()
            return Unary("not", self._not(), pos=(tok.line, tok.col))
        return self._comparison()

    def _comparison(self) -> Expr:
        left = self._additive()
        if self.at_op(*_CMP_OPS):
            tok = self.advance()
            return Binary(tok.text, left, self._additive(), pos=(tok.line, tok.col))
        return left

    def _additive(self) -> Expr:
        left = self._multiplicative()
        while self.at_op("+", "-"):
            tok = self.advance()
            left = Binary(tok.text, left, self._multiplicative(), pos=(tok.line, tok.col))
        return left

    def _multiplicative(self) -> Expr:
        left = self._unary()
        while self.at_op("*", "/"):
            tok = self.advance()
            left = Binary(tok.text, left, self._unary(), pos=(tok.line, tok.col))
        return left

    def _unary(self) -> Expr:
        if self.at_op("-"):
            tok = self.advance()
            return Unary("-", self._unary(), pos=(tok.line, tok.col))
        return self._primary()

    def _primary(self) -> Expr:
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            return Lit(float(tok.value), pos=(tok.line, tok.col))
        if tok.kind == "string":
            self.advance()
            return Lit(tok.value, pos=(tok.line, tok.col))
        if tok.kind == "keyword" and tok.text in ("true", "false"):
            self.advance()
            return Lit(tok.text == "true", pos=(tok.line, tok.col))
        if tok.kind == "ident":
            self.advance()
            if self.at_op("("):
                return self._call(tok)
            return Var(tok.text, pos=(tok.line, tok.col))
        if self.at_op("("):
            self.advance()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        self.error(f"expected an expression, found {tok.text or 'end of input'!r}")

    def _call(self, name_tok: Token) -> Expr:
        name = name_tok.text
        if name not in BUILTINS:
            self.error(f"unknown function {name!r}", name_tok)
        argc = BUILTINS[name][0]
        self.expect_op("(")
        args: list[str] = []
        if not self.at_op(")"):
            args.append(self.expect_ident("activity id").text)
            while self.at_op(","):
                self.advance()
                args.append(self.expect_ident("activity id").text)
        self.expect_op(")")
        if len(args) != argc:
            self.error(
                f"{name} takes {argc} argument(s), got {len(args)}", name_tok
            )
        return Call(name, tuple(args), pos=(name_tok.line, name_tok.col))


def parse_expr(
    source: str,
    var_types: dict[str, str] | None = None,
    activity_ids: set[str] | None = None,
    expected: str | None = None,
) -> Expr:
    """Parse and type-check a bare expression.

    With var_types given, unknown variables are rejected; with activity_ids
    given, executedCount arguments are validated against it.
    """
    p = _Parser(source)
    expr = p.parse_expr()
    if p.cur.kind != "eof":
        p.error(f"unexpected trailing input {p.cur.text!r}")
    _check_calls(expr, activity_ids)
    checker = TypeChecker(var_types)
    checker.check(expr, expected)
    return expr


def parse_rule(
    source: str,
    var_types: dict[str, str] | None = None,
    activity_ids: set[str] | None = None,
    env_vars: set[str] | None = None,
) -> Rule:
    """Parse and type-check one rule.

    var_types: declared variable types; omit for open-world inference.
    activity_ids: declared activities; select/forbid targets and
        executedCount arguments must be members when given.
    env_vars: names context-rule assignments may target (environment
        variables change only through external events and context rules).
    """
    rule = _Parser(source).parse_rule()
    checker = TypeChecker(var_types)
    checker.check(rule.condition, BOOL, "rule condition")
    _check_calls(rule.condition, activity_ids)
    if rule.kind in (RuleKind.SELECTION, RuleKind.VETO) and activity_ids is not None:
        if rule.target not in activity_ids:
            raise ParseError(f"unknown activity {rule.target!r}", 1, 1)
    if rule.kind is RuleKind.CONTEXT:
        for name, expr in rule.assignments:
            _check_calls(expr, activity_ids)
            if var_types is not None:
                if name not in var_types:
                    raise ParseError(f"unknown variable {name!r}", 1, 1)
                if env_vars is not None and name not in env_vars:
                    raise ParseError(
                        f"context rules may only assign environment variables, "
                        f"{name!r} is not one",
                        1,
                        1,
                    )
                checker.check(expr, var_types[name], f"assignment to {name!r}")
            else:
                checker.check(expr)
    if rule.kind is RuleKind.GOAL and rule.progress is not None:
        _check_calls(rule.progress, activity_ids)
        checker.check(rule.progress, NUM, "progress expression")
    return rule


def _check_calls(expr: Expr, activity_ids: set[str] | None) -> None:
    if activity_ids is None:
        return
    if isinstance(expr, Call):
        for arg in expr.args:
            if arg not in activity_ids:
                raise ParseError(
                    f"unknown activity {arg!r} in {expr.func}()",
                    expr.pos[0],
                    expr.pos[1],
                )
    elif isinstance(expr, Unary):
        _check_calls(expr.operand, activity_ids)
    elif isinstance(expr, Binary):
        _check_calls(expr.left, activity_ids)
        _check_calls(expr.right, activity_ids)
