"""Append-only, hash-chained ledger of pipeline steps.

Every step that produces an artifact appends one record carrying its full
parameter snapshot (seeds included), the digests of its input and output,
and who asked for it.  Records chain through their predecessor's digest, so
the ledger head pins the entire history; replaying the ledger re-executes
each step and any digest divergence is an error naming the offending record.

Two digests per record:

* ``digest`` is the chain identity.  It excludes the timestamp, so a replay
  performed later still reproduces the same chain.
* ``guard`` covers the whole record (timestamp and digest included) and
  exists purely for corruption detection; without it a bit flip inside the
  timestamp would be invisible to verification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from .canon import GENESIS_DIGEST, digest_of

__all__ = [
    "STEP_KINDS",
    "PROVENANCE_HEADER",
    "ChainIntegrityError",
    "ReplayDivergenceError",
    "ProvenanceRecord",
    "Ledger",
    "ensure_replay_digest",
]

STEP_KINDS = (
    "parse",
    "extract",
    "decision",
    "build",
    "filter",
    "communities",
    "layout",
    "export",
)

PROVENANCE_HEADER = {"format": "diarynet-provenance/1", "hash": "sha256"}


class ChainIntegrityError(Exception):
    """The ledger file or an incoming record breaks the hash chain."""


class ReplayDivergenceError(Exception):
    """A replayed step produced different bytes than the ledger recorded."""


@dataclass(frozen=True)
class ProvenanceRecord:
    seq: int
    step: str
    params: dict
    input_digest: str
    output_digest: str
    actor: str
    rationale: str
    prev: str
    digest: str
    ts: str

    def chain_body(self) -> dict:
        return {
            "seq": self.seq,
            "step": self.step,
            "params": self.params,
            "input_digest": self.input_digest,
            "output_digest": self.output_digest,
            "actor": self.actor,
            "rationale": self.rationale,
            "prev": self.prev,
        }

    def fingerprint(self) -> str:
        """Chain-independent identity of the step: what ran, on what, by whom.

        Excludes seq/prev/ts so a re-run with unchanged inputs yields the same
        value even though it occupies a new chain position. Safe to embed in
        exported artifacts without breaking byte-level determinism.
        """
        return digest_of(
            {
                "step": self.step,
                "params": self.params,
                "input_digest": self.input_digest,
                "output_digest": self.output_digest,
                "actor": self.actor,
                "rationale": self.rationale,
            }
        )


def _chain_digest(body: Mapping[str, Any]) -> str:
    return digest_of(dict(body))


def _guard_digest(full: Mapping[str, Any]) -> str:
    return digest_of({k: v for k, v in full.items() if k != "guard"})


def _validate_fields(
    step: str, params: Mapping, actor: str, rationale: str
) -> None:
    if step not in STEP_KINDS:
        raise ValueError(f"unknown step kind {step!r}")
    if not isinstance(params, Mapping):
        raise ValueError("params must be a mapping")
    if not actor:
        raise ValueError("actor must be non-empty")
    if actor != "auto" and not rationale.strip():
        raise ValueError(f"human step ({actor!r}) requires a rationale")


class Ledger:
    """Hash-chained JSONL ledger bound to one `provenance.log` path.

    Single-writer append; readers always see a consistent prefix because
    records are written whole lines at a time.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)

    # -- reading ------------------------------------------------------------

    def read_records(self, verify: bool = True) -> list[ProvenanceRecord]:
        if not self.path.exists():
            return []
        raw = self.path.read_bytes()
        if not raw:
            return []
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ChainIntegrityError(f"{self.path}: not valid UTF-8") from exc
        # Strict "\n" split: splitlines() also breaks on \x0b and friends,
        # which would let a one-bit LF corruption slip through unnoticed.
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            return []
        try:
            header = json.loads(lines[0])
        except ValueError as exc:
            raise ChainIntegrityError(f"{self.path}: unreadable header") from exc
        if header != PROVENANCE_HEADER:
            raise ChainIntegrityError(f"{self.path}: unrecognized header {header!r}")
        records: list[ProvenanceRecord] = []
        prev = GENESIS_DIGEST
        for i, line in enumerate(lines[1:], start=1):
            if line == "":
                raise ChainIntegrityError(f"{self.path}: blank line at record {i}")
            try:
                rec = json.loads(line)
            except ValueError as exc:
                raise ChainIntegrityError(
                    f"{self.path}: record {i} is not valid JSON"
                ) from exc
            if verify:
                prev = self._verify_one(rec, i, prev)
            records.append(
                ProvenanceRecord(
                    **{k: rec[k] for k in ProvenanceRecord.__dataclass_fields__}
                )
            )
        return records

    def _verify_one(self, rec: Mapping, i: int, prev: str) -> str:
        expected_keys = set(ProvenanceRecord.__dataclass_fields__) | {"guard"}
        if set(rec) != expected_keys:
            raise ChainIntegrityError(f"{self.path}: record {i} has wrong fields")
        if rec["guard"] != _guard_digest(rec):
            raise ChainIntegrityError(f"{self.path}: record {i} fails its guard hash")
        if rec["seq"] != i:
            raise ChainIntegrityError(f"{self.path}: record {i} has seq {rec['seq']}")
        if rec["step"] not in STEP_KINDS:
            raise ChainIntegrityError(
                f"{self.path}: record {i} has unknown step {rec['step']!r}"
            )
        if rec["prev"] != prev:
            raise ChainIntegrityError(f"{self.path}: record {i} breaks the chain")
        body = {k: rec[k] for k in ProvenanceRecord.__dataclass_fields__ if k not in ("digest", "ts")}
        if rec["digest"] != _chain_digest(body):
            raise ChainIntegrityError(f"{self.path}: record {i} digest mismatch")
        if rec["actor"] != "auto" and not str(rec["rationale"]).strip():
            raise ChainIntegrityError(
                f"{self.path}: record {i} is a human step without rationale"
            )
        try:
            datetime.fromisoformat(rec["ts"])
        except (TypeError, ValueError) as exc:
            raise ChainIntegrityError(f"{self.path}: record {i} bad timestamp") from exc
        return rec["digest"]

    def verify(self) -> int:
        """Walk the whole chain; return the record count.  O(n)."""
        return len(self.read_records(verify=True))

    def head(self) -> str:
        records = self.read_records(verify=True)
        return records[-1].digest if records else GENESIS_DIGEST

    # -- writing ------------------------------------------------------------

    def make_record(
        self,
        step: str,
        params: Mapping[str, Any],
        input_digest: str,
        output_digest: str,
        actor: str = "auto",
        rationale: str = "",
        prev: str | None = None,
        seq: int | None = None,
        ts: str | None = None,
    ) -> ProvenanceRecord:
        """Build (but do not append) the next record.

        prev/seq default to the current head; passing them explicitly lets a
        caller detect losing a race to another writer when record() rejects
        the stale chain position.
        """
        _validate_fields(step, params, actor, rationale)
        existing = self.read_records(verify=True)
        if prev is None:
            prev = existing[-1].digest if existing else GENESIS_DIGEST
        if seq is None:
            seq = len(existing) + 1
        body = {
            "seq": seq,
            "step": step,
            "params": dict(params),
            "input_digest": input_digest,
            "output_digest": output_digest,
            "actor": actor,
            "rationale": rationale,
            "prev": prev,
        }
        return ProvenanceRecord(
            digest=_chain_digest(body),
            ts=ts or datetime.now(timezone.utc).isoformat(),
            **body,
        )

    def record(self, rec: ProvenanceRecord) -> ProvenanceRecord:
        """Append a prepared record; its prev must equal the current head."""
        existing = self.read_records(verify=True)
        head = existing[-1].digest if existing else GENESIS_DIGEST
        if rec.prev != head:
            raise ChainIntegrityError(
                f"stale chain position: record carries prev {rec.prev[:12]}..., "
                f"ledger head is {head[:12]}... (another writer got there first?)"
            )
        if rec.seq != len(existing) + 1:
            raise ChainIntegrityError(
                f"record seq {rec.seq} does not follow ledger length {len(existing)}"
            )
        if rec.digest != _chain_digest(rec.chain_body()):
            raise ChainIntegrityError("record digest does not match its content")
        _validate_fields(rec.step, rec.params, rec.actor, rec.rationale)
        full = {**rec.chain_body(), "digest": rec.digest, "ts": rec.ts}
        full["guard"] = _guard_digest(full)
        needs_header = not self.path.exists() or self.path.stat().st_size == 0
        with self.path.open("a", encoding="utf-8") as fh:
            if needs_header:
                fh.write(json.dumps(PROVENANCE_HEADER, sort_keys=True) + "\n")
            fh.write(json.dumps(full, sort_keys=True) + "\n")
        return rec

    def append(
        self,
        step: str,
        params: Mapping[str, Any],
        input_digest: str,
        output_digest: str,
        actor: str = "auto",
        rationale: str = "",
        ts: str | None = None,
    ) -> ProvenanceRecord:
        """make_record + record in one step (the common single-writer path)."""
        return self.record(
            self.make_record(
                step, params, input_digest, output_digest, actor, rationale, ts=ts
            )
        )


def ensure_replay_digest(rec: ProvenanceRecord, actual_digest: str) -> None:
    """Raise unless a replayed step reproduced the recorded output digest."""
    if actual_digest != rec.output_digest:
        raise ReplayDivergenceError(
            f"replay diverged at seq {rec.seq} ({rec.step}): "
            f"expected {rec.output_digest}, got {actual_digest}"
        )
