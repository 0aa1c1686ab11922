"""Tokenizer for the rule language."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

KEYWORDS = {
    "rule", "priority", "when", "select", "set", "forbid", "goal",
    "progress", "maximize", "minimize", "and", "or", "not", "true", "false",
}

_TWO_CHAR = {"<=", ">=", "==", "!=", ":="}
_ONE_CHAR = set("+-*/<>(),")

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "keyword" | "number" | "string" | "op" | "eof"
    text: str
    value: object
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)

    def err(msg: str, l: int, c: int):
        raise ParseError(msg, l, c)

    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            if word in ("true", "false"):
                tokens.append(Token("keyword", word, word == "true", start_line, start_col))
            elif word in KEYWORDS:
                tokens.append(Token("keyword", word, word, start_line, start_col))
            else:
                tokens.append(Token("ident", word, word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            tokens.append(Token("number", text, float(text), start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            parts: list[str] = []
            while True:
                if j >= n or source[j] == "\n":
                    err("unterminated string literal", start_line, start_col)
                c = source[j]
                if c == '"':
                    j += 1
                    break
                if c == "\\":
                    if j + 1 >= n or source[j + 1] not in _ESCAPES:
                        err("invalid escape in string literal", line, col + (j - i))
                    parts.append(_ESCAPES[source[j + 1]])
                    j += 2
                    continue
                parts.append(c)
                j += 1
            tokens.append(Token("string", source[i:j], "".join(parts), start_line, start_col))
            col += j - i
            i = j
            continue
        two = source[i : i + 2]
        if two in _TWO_CHAR:
            tokens.append(Token("op", two, two, start_line, start_col))
            i += 2
            col += 2
            continue
        if ch in _ONE_CHAR:
            tokens.append(Token("op", ch, ch, start_line, start_col))
            i += 1
            col += 1
            continue
        err(f"unexpected character {ch!r}", start_line, start_col)

    tokens.append(Token("eof", "", None, line, col))
    return tokens
