"""Canonical JSON serialization and content digests.

Every file format and every content hash in the system goes through this
module so that byte-equality of serialized output means semantic equality:
keys sorted, UTF-8, LF only, compact separators, and numbers rendered in a
single canonical form (integral floats print as integers).
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Any


def _canon_value(obj: Any) -> Any:
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        # 7.0 and 7 must serialize identically; non-integral floats keep
        # Python's shortest round-trip repr via json.
        if obj.is_integer() and abs(obj) < 2**53:
            return int(obj)
        return obj
    if isinstance(obj, dict):
        return {str(k): _canon_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon_value(v) for v in obj]
    return obj


def canonical_json(obj: Any) -> str:
    """Render obj as canonical JSON text (no trailing newline)."""
    return json.dumps(
        _canon_value(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    )


def canonical_bytes(obj: Any) -> bytes:
    """Canonical JSON document bytes: UTF-8 with a single trailing LF."""
    return canonical_json(obj).encode("utf-8") + b"\n"


def digest(obj: Any) -> str:
    """SHA-256 hex digest of the canonical serialization of obj."""
    return hashlib.sha256(canonical_bytes(obj)).hexdigest()


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


_NEEDS_ESCAPE = re.compile(r'["\\\x00-\x1f]')


def _quote(s: str) -> str:
    if _NEEDS_ESCAPE.search(s) is None:
        return f'"{s}"'
    return json.dumps(s, ensure_ascii=False)


def digest_flat(bindings: dict) -> str:
    """digest() specialized for flat {str: number|bool|str} dicts.

    Snapshots hash once or twice per simulation step; this skips the
    recursive canonicalization and the json encoder while producing
    byte-identical documents (a test pins digest_flat == digest on flat
    dicts).
    """
    parts = []
    for key in sorted(bindings):
        value = bindings[key]
        if value is True:
            rendered = "true"
        elif value is False:
            rendered = "false"
        elif isinstance(value, float):
            if value.is_integer() and abs(value) < 2**53:
                rendered = str(int(value))
            else:
                rendered = repr(value)
        elif isinstance(value, int):
            rendered = str(value)
        else:
            rendered = _quote(value)
        parts.append(_quote(key) + ":" + rendered)
    doc = "{" + ",".join(parts) + "}\n"
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()
