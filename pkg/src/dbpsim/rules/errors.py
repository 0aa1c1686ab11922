"""Diagnostics raised by the rule language."""

from __future__ import annotations


class ParseError(Exception):
    """Syntax or static-type error in rule source. Carries position info."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class EvalError(Exception):
    """Runtime evaluation failure (unbound variable, division by zero).

    Callers treat the offending rule as not applicable and log the incident;
    evaluation never silently substitutes a default.
    """
