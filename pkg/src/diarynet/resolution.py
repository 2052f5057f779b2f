"""Coreference resolution: alias table, curator decisions, review queue.

The alias table is never edited directly.  It is the fold of an append-only
decision log (aliases.log), so the full curation history replays to the same
table byte for byte.  Each decision carries an actor and a mandatory
rationale; applying one either succeeds completely or leaves the table
untouched.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence, Union

from .canon import GENESIS_DIGEST, canonical_json_bytes, digest_of
from .corpus import Corpus
from .extraction import Mention, normalize_form

__all__ = [
    "ResolutionError",
    "NotFoundError",
    "ConflictError",
    "ValidationError",
    "IntegrityError",
    "PersonEntity",
    "AliasTable",
    "MapTo",
    "NewEntity",
    "Merge",
    "Split",
    "Ignore",
    "Decision",
    "Resolution",
    "ResolvedMention",
    "ReviewItem",
    "Snippet",
    "apply_decision",
    "resolve_form",
    "resolve_mentions",
    "build_review_queue",
    "serialize_table",
    "decision_to_dict",
    "decision_from_dict",
    "AliasLog",
    "ALIAS_LOG_HEADER",
]


class ResolutionError(Exception):
    """Base for decision failures; code maps onto the service error body."""

    code = "validation"


class NotFoundError(ResolutionError):
    code = "not_found"


class ConflictError(ResolutionError):
    code = "conflict"


class ValidationError(ResolutionError):
    code = "validation"


class IntegrityError(ResolutionError):
    """A hash-chained log failed verification."""

    code = "validation"


# ---------------------------------------------------------------------------
# Table
# ---------------------------------------------------------------------------


@dataclass
class PersonEntity:
    entity_id: str
    display_name: str
    aliases: set[str] = field(default_factory=set)  # normalized forms
    notes: str = ""


@dataclass
class AliasTable:
    """Canonical person identities plus the ignore stop-list.

    version counts applied decisions, so equal versions of the same project
    imply byte-identical tables.  retired maps ids removed by Merge to their
    surviving entity so old references stay explainable.
    """

    entities: dict[str, PersonEntity] = field(default_factory=dict)
    ignored: set[str] = field(default_factory=set)
    retired: dict[str, str] = field(default_factory=dict)
    version: int = 0

    def alias_owner(self, form: str) -> str | None:
        for ent in self.entities.values():
            if form in ent.aliases:
                return ent.entity_id
        return None

    def surname_index(self) -> dict[str, set[str]]:
        index: dict[str, set[str]] = {}
        for ent in self.entities.values():
            for alias in ent.aliases:
                surname = alias.rsplit(" ", 1)[-1]
                index.setdefault(surname, set()).add(ent.entity_id)
        return index


def serialize_table(table: AliasTable) -> bytes:
    """Canonical byte form of a table, used for replay equality checks."""
    return canonical_json_bytes(
        {
            "version": table.version,
            "ignored": sorted(table.ignored),
            "retired": dict(sorted(table.retired.items())),
            "entities": {
                eid: {
                    "display_name": ent.display_name,
                    "aliases": sorted(ent.aliases),
                    "notes": ent.notes,
                }
                for eid, ent in sorted(table.entities.items())
            },
        }
    )


# ---------------------------------------------------------------------------
# Decisions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MapTo:
    form: str
    entity_id: str


@dataclass(frozen=True)
class NewEntity:
    display_name: str
    aliases: tuple[str, ...] = ()


@dataclass(frozen=True)
class Merge:
    keep: str
    retire: str


@dataclass(frozen=True)
class Split:
    source: str
    aliases: tuple[str, ...]
    display_name: str


@dataclass(frozen=True)
class Ignore:
    form: str


Decision = Union[MapTo, NewEntity, Merge, Split, Ignore]

_KINDS = {
    "map_to": MapTo,
    "new_entity": NewEntity,
    "merge": Merge,
    "split": Split,
    "ignore": Ignore,
}


def decision_to_dict(decision: Decision) -> dict:
    for kind, cls in _KINDS.items():
        if isinstance(decision, cls):
            d = {"kind": kind}
            for f in cls.__dataclass_fields__:
                value = getattr(decision, f)
                d[f] = list(value) if isinstance(value, tuple) else value
            return d
    raise ValidationError(f"unknown decision type {type(decision).__name__}")


def decision_from_dict(d: Mapping) -> Decision:
    kind = d.get("kind")
    cls = _KINDS.get(kind)
    if cls is None:
        raise ValidationError(f"unknown decision kind {kind!r}")
    kwargs = {}
    for f in cls.__dataclass_fields__:
        if f not in d:
            raise ValidationError(f"decision {kind!r} missing field {f!r}")
        value = d[f]
        kwargs[f] = tuple(value) if isinstance(value, list) else value
    return cls(**kwargs)


def _copy_table(table: AliasTable) -> AliasTable:
    # Structured copy; much cheaper than copy.deepcopy on large tables.
    return AliasTable(
        entities={
            eid: PersonEntity(e.entity_id, e.display_name, set(e.aliases), e.notes)
            for eid, e in table.entities.items()
        },
        ignored=set(table.ignored),
        retired=dict(table.retired),
        version=table.version,
    )


def _slugify(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", name.casefold()).strip("-")
    return slug or "person"


def _fresh_id(table: AliasTable, name: str) -> str:
    base = _slugify(name)
    if base not in table.entities and base not in table.retired:
        return base
    n = 2
    while f"{base}-{n}" in table.entities or f"{base}-{n}" in table.retired:
        n += 1
    return f"{base}-{n}"


def apply_decision(
    table: AliasTable, decision: Decision, actor: str, rationale: str
) -> AliasTable:
    """Return a new table with the decision applied; the input is not touched.

    Raises NotFoundError, ConflictError, or ValidationError.  Any raise leaves
    the caller's table exactly as it was, which is what makes a decision
    atomic.
    """
    if not actor or not actor.strip():
        raise ValidationError("actor must be non-empty")
    if not rationale or not rationale.strip():
        raise ValidationError("rationale must be non-empty")

    work = _copy_table(table)

    if isinstance(decision, MapTo):
        form = normalize_form(decision.form)
        if not form:
            raise ValidationError("form normalizes to the empty string")
        ent = work.entities.get(decision.entity_id)
        if ent is None:
            raise NotFoundError(f"entity {decision.entity_id!r} does not exist")
        owner = work.alias_owner(form)
        if owner is not None and owner != decision.entity_id:
            raise ConflictError(f"form {form!r} is already an alias of {owner!r}")
        ent.aliases.add(form)
        work.ignored.discard(form)

    elif isinstance(decision, NewEntity):
        if not decision.display_name.strip():
            raise ValidationError("display_name must be non-empty")
        forms = {normalize_form(decision.display_name)}
        forms.update(normalize_form(a) for a in decision.aliases)
        forms.discard("")
        if not forms:
            raise ValidationError("entity would have no usable alias")
        for form in sorted(forms):
            owner = work.alias_owner(form)
            if owner is not None:
                raise ConflictError(f"form {form!r} is already an alias of {owner!r}")
        eid = _fresh_id(work, decision.display_name)
        work.entities[eid] = PersonEntity(
            entity_id=eid, display_name=decision.display_name.strip(), aliases=forms
        )
        work.ignored.difference_update(forms)

    elif isinstance(decision, Merge):
        if decision.keep == decision.retire:
            raise ValidationError("cannot merge an entity into itself")
        keep = work.entities.get(decision.keep)
        retire = work.entities.get(decision.retire)
        if keep is None:
            raise NotFoundError(f"entity {decision.keep!r} does not exist")
        if retire is None:
            raise NotFoundError(f"entity {decision.retire!r} does not exist")
        keep.aliases.update(retire.aliases)
        if retire.notes:
            keep.notes = (keep.notes + "\n" + retire.notes).strip()
        del work.entities[decision.retire]
        work.retired[decision.retire] = decision.keep
        # Anything previously merged into the retiring entity follows it.
        for old, target in work.retired.items():
            if target == decision.retire:
                work.retired[old] = decision.keep

    elif isinstance(decision, Split):
        source = work.entities.get(decision.source)
        if source is None:
            raise NotFoundError(f"entity {decision.source!r} does not exist")
        if not decision.display_name.strip():
            raise ValidationError("display_name must be non-empty")
        moved = [normalize_form(a) for a in decision.aliases]
        if not moved:
            raise ValidationError("split must move at least one alias")
        missing = [a for a in moved if a not in source.aliases]
        if missing:
            raise NotFoundError(
                f"alias(es) not on {decision.source!r}: {', '.join(sorted(missing))}"
            )
        source.aliases.difference_update(moved)
        eid = _fresh_id(work, decision.display_name)
        work.entities[eid] = PersonEntity(
            entity_id=eid,
            display_name=decision.display_name.strip(),
            aliases=set(moved),
        )

    elif isinstance(decision, Ignore):
        form = normalize_form(decision.form)
        if not form:
            raise ValidationError("form normalizes to the empty string")
        owner = work.alias_owner(form)
        if owner is not None:
            raise ConflictError(f"form {form!r} is an alias of {owner!r}")
        work.ignored.add(form)

    else:
        raise ValidationError(f"unknown decision type {type(decision).__name__}")

    work.version = table.version + 1
    return work


# ---------------------------------------------------------------------------
# Resolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Resolution:
    status: str  # "resolved" | "ambiguous" | "unknown"
    entity_id: str | None = None
    candidates: tuple[str, ...] = ()


def resolve_form(table: AliasTable, form: str) -> Resolution:
    """Classify one normalized form against the table.

    An exact alias hit resolves.  Otherwise the form's final token is looked
    up as a surname: two or more owners make it ambiguous with those owners
    as candidates; one or zero leaves it unknown.  A single surname hit is
    deliberately not auto-resolved, because a shared surname alone is weak
    evidence and the cost of a silent misattribution is high.  Ignored forms
    classify like any other; the stop-list only keeps them off the queue.
    """
    owner = table.alias_owner(form)
    if owner is not None:
        return Resolution(status="resolved", entity_id=owner)
    surname = form.rsplit(" ", 1)[-1]
    hits = tuple(sorted(table.surname_index().get(surname, ())))
    if len(hits) >= 2:
        return Resolution(status="ambiguous", candidates=hits)
    return Resolution(status="unknown", candidates=hits)


@dataclass(frozen=True)
class ResolvedMention:
    mention: Mention
    status: str
    entity_id: str | None
    candidates: tuple[str, ...]


def resolve_mentions(
    mentions: Sequence[Mention], table: AliasTable
) -> list[ResolvedMention]:
    """Resolve every mention, caching per distinct form."""
    cache: dict[str, Resolution] = {}
    out: list[ResolvedMention] = []
    for m in mentions:
        res = cache.get(m.normalized)
        if res is None:
            res = resolve_form(table, m.normalized)
            cache[m.normalized] = res
        out.append(
            ResolvedMention(
                mention=m,
                status=res.status,
                entity_id=res.entity_id,
                candidates=res.candidates,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Review queue
# ---------------------------------------------------------------------------

SNIPPET_RADIUS = 120


@dataclass(frozen=True)
class Snippet:
    volume_id: str
    date: str  # ISO
    text: str
    match_span: tuple[int, int]  # surface offsets within text


@dataclass(frozen=True)
class ReviewItem:
    form: str
    count: int
    status: str  # "unknown" | "ambiguous"
    candidates: tuple[str, ...]
    snippets: tuple[Snippet, ...]


def _snippet_for(mention: Mention, entry_text: str) -> Snippet:
    start, end = mention.char_span
    lo = max(0, start - SNIPPET_RADIUS)
    hi = min(len(entry_text), end + SNIPPET_RADIUS)
    return Snippet(
        volume_id=mention.volume_id,
        date=mention.date.isoformat(),
        text=entry_text[lo:hi],
        match_span=(start - lo, end - lo),
    )


def build_review_queue(
    resolutions: Sequence[ResolvedMention],
    ignored: Iterable[str] = (),
    corpus: Corpus | None = None,
    max_snippets: int = 5,
) -> list[ReviewItem]:
    """One queue item per distinct normalized form not yet Resolved.

    Forms on the ignore stop-list never re-queue.  Items are ordered by
    occurrence count descending, then form ascending, so the busiest open
    question is always on top.  Snippets (at most max_snippets,
    chronological) come from the corpus when it is supplied.
    """
    entry_text: dict[tuple[str, str], str] = {}
    if corpus is not None:
        for entry in corpus.entries:
            entry_text.setdefault((entry.volume_id, entry.date.isoformat()), entry.text)

    stop = set(ignored)
    by_form: dict[str, list[ResolvedMention]] = {}
    for rm in resolutions:
        by_form.setdefault(rm.mention.normalized, []).append(rm)

    items: list[ReviewItem] = []
    for form, occurrences in by_form.items():
        status = occurrences[0].status
        if status == "resolved" or form in stop:
            continue
        ordered = sorted(
            occurrences,
            key=lambda rm: (rm.mention.date, rm.mention.volume_id, rm.mention.char_span[0]),
        )
        snippets = []
        for rm in ordered[:max_snippets]:
            text = entry_text.get((rm.mention.volume_id, rm.mention.date.isoformat()))
            if text is not None:
                snippets.append(_snippet_for(rm.mention, text))
        items.append(
            ReviewItem(
                form=form,
                count=len(occurrences),
                status=status,
                candidates=occurrences[0].candidates,
                snippets=tuple(snippets),
            )
        )
    items.sort(key=lambda it: (-it.count, it.form))
    return items


# ---------------------------------------------------------------------------
# Decision log (aliases.log)
# ---------------------------------------------------------------------------

ALIAS_LOG_HEADER = {"format": "diarynet-aliases/1", "hash": "sha256"}


def _record_digest(record: Mapping) -> str:
    # The timestamp stays outside the digest so replaying a project yields a
    # byte-identical chain; ts is display metadata, not evidence.
    body = {
        k: record[k] for k in ("seq", "decision", "actor", "rationale", "prev")
    }
    return digest_of(body)


class AliasLog:
    """Hash-chained JSONL decision log bound to one file path.

    Line 1 is a fixed header; every later line is one decision record:
    {seq, decision, actor, rationale, prev, ts, digest}.  prev chains to the
    previous record's digest (genesis: 64 zeros).
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)

    # -- reading ----------------------------------------------------------

    def read_records(self, verify: bool = True) -> list[dict]:
        if not self.path.exists():
            return []
        lines = self.path.read_text(encoding="utf-8").splitlines()
        if not lines:
            return []
        header = json.loads(lines[0])
        if header != ALIAS_LOG_HEADER:
            raise IntegrityError(f"{self.path}: unrecognized header {header!r}")
        records = [json.loads(line) for line in lines[1:] if line.strip()]
        if verify:
            self._verify(records)
        return records

    def _verify(self, records: Sequence[Mapping]) -> None:
        prev = GENESIS_DIGEST
        for i, rec in enumerate(records, start=1):
            if rec.get("seq") != i:
                raise IntegrityError(f"{self.path}: record {i} has seq {rec.get('seq')}")
            if rec.get("prev") != prev:
                raise IntegrityError(f"{self.path}: record {i} breaks the chain")
            if rec.get("digest") != _record_digest(rec):
                raise IntegrityError(f"{self.path}: record {i} digest mismatch")
            try:
                datetime.fromisoformat(rec["ts"])
            except (KeyError, TypeError, ValueError) as exc:
                raise IntegrityError(f"{self.path}: record {i} bad timestamp") from exc
            prev = rec["digest"]

    def replay(self, version: int | None = None) -> AliasTable:
        """Fold the verified log into a table from scratch.

        version caps how many decisions are applied, reconstructing the
        table exactly as it stood at that point in history.
        """
        table = AliasTable()
        records = self.read_records(verify=True)
        if version is not None:
            if version < 0 or version > len(records):
                raise ValidationError(
                    f"version {version} out of range 0..{len(records)}"
                )
            records = records[:version]
        for rec in records:
            table = apply_decision(
                table,
                decision_from_dict(rec["decision"]),
                rec["actor"],
                rec["rationale"],
            )
        return table

    # -- writing ----------------------------------------------------------

    def append(
        self,
        decision: Decision,
        actor: str,
        rationale: str,
        ts: str | None = None,
    ) -> dict:
        """Append one record, creating the file (with header) on first use."""
        existing = self.read_records(verify=True)
        prev = existing[-1]["digest"] if existing else GENESIS_DIGEST
        record = {
            "seq": len(existing) + 1,
            "decision": decision_to_dict(decision),
            "actor": actor,
            "rationale": rationale,
            "prev": prev,
        }
        record["digest"] = _record_digest(record)
        record["ts"] = ts or datetime.now(timezone.utc).isoformat()
        needs_header = not self.path.exists() or self.path.stat().st_size == 0
        with self.path.open("a", encoding="utf-8") as fh:
            if needs_header:
                fh.write(json.dumps(ALIAS_LOG_HEADER, sort_keys=True) + "\n")
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        return record

    def append_many(
        self,
        decisions: Iterable[Decision],
        actor: str,
        rationale: str,
        ts: str | None = None,
    ) -> list[dict]:
        """Append a batch with one read/verify pass instead of one per record."""
        existing = self.read_records(verify=True)
        seq = len(existing)
        prev = existing[-1]["digest"] if existing else GENESIS_DIGEST
        stamp = ts or datetime.now(timezone.utc).isoformat()
        records = []
        for decision in decisions:
            seq += 1
            record = {
                "seq": seq,
                "decision": decision_to_dict(decision),
                "actor": actor,
                "rationale": rationale,
                "prev": prev,
            }
            record["digest"] = _record_digest(record)
            record["ts"] = stamp
            prev = record["digest"]
            records.append(record)
        needs_header = not self.path.exists() or self.path.stat().st_size == 0
        with self.path.open("a", encoding="utf-8") as fh:
            if needs_header:
                fh.write(json.dumps(ALIAS_LOG_HEADER, sort_keys=True) + "\n")
            for record in records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        return records
