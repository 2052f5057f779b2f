"""Canonical JSON and digest helpers shared by the two hash-chained logs.

Canonical form: keys sorted, no whitespace, ASCII-escaped.  Two structurally
equal objects always serialize to the same bytes, which is what makes digest
comparison meaningful.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

GENESIS_DIGEST = "0" * 64


def canonical_json_bytes(obj: Any) -> bytes:
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("ascii")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_of(obj: Any) -> str:
    return sha256_hex(canonical_json_bytes(obj))
