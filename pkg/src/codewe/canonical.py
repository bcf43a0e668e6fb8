"""Canonical deterministic encoding for everything that gets signed or hashed.

The grammar (documented bit-exact in docs/canonical_encoding.md):

- values are maps with string keys, sequences, strings, booleans, and integers;
- strings are NFC-normalized UTF-8, emitted without ASCII escaping;
- map keys sort lexicographically by Unicode code point (after NFC);
- no insignificant whitespace, separators are "," and ":";
- floats, None and every other kind are rejected, so a signed payload can
  never be ambiguous across languages.
"""

from __future__ import annotations

import hashlib
import json
import unicodedata
from typing import Any

from .errors import EncodingUnsupported


def _normalize(value: Any) -> Any:
    # bool must be checked before int (bool is an int subclass)
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        return unicodedata.normalize("NFC", value)
    if isinstance(value, dict):
        out = {}
        for k, v in value.items():
            if not isinstance(k, str):
                raise EncodingUnsupported(f"map key must be str, got {type(k).__name__}")
            out[unicodedata.normalize("NFC", k)] = _normalize(v)
        return out
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    raise EncodingUnsupported(f"cannot canonically encode {type(value).__name__}")


def encode(value: Any) -> bytes:
    """Encode ``value`` to its unique canonical byte sequence."""
    normalized = _normalize(value)
    text = json.dumps(normalized, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return text.encode("utf-8")


def decode(data: bytes) -> Any:
    """Parse canonical bytes back into a structured value.

    Round trip holds: ``encode(decode(encode(v))) == encode(v)``.
    """
    return json.loads(data.decode("utf-8"))


def digest(value: Any) -> bytes:
    """SHA-256 over the canonical encoding of ``value``."""
    return hashlib.sha256(encode(value)).digest()
