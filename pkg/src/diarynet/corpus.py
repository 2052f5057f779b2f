"""Diary transcription parsing.

A transcription file is a flat text stream in which certain lines are date
headings.  Everything between one recognized heading and the next is the body
of a single dated entry.  Parsing is fail-soft: malformed headings and stray
prefix text produce warnings, never exceptions, so a long OCR'd volume with a
few bad lines still yields a usable corpus.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date as Date
from pathlib import Path
from typing import IO, Iterable, Sequence

__all__ = [
    "CorpusError",
    "DiaryEntry",
    "Corpus",
    "ValidationIssue",
    "DEFAULT_DATE_PATTERNS",
    "compile_date_patterns",
    "parse_diary",
    "load_corpus",
    "validate_corpus",
]


class CorpusError(ValueError):
    """Raised for unrecoverable corpus problems (bad encoding, bad pattern)."""


# ---------------------------------------------------------------------------
# Date heading grammar
# ---------------------------------------------------------------------------

# Ordered alternatives; the first pattern that matches a line wins.  Each
# pattern must expose named groups year/month/day.  month may be numeric or a
# month name.
DEFAULT_DATE_PATTERNS: tuple[str, ...] = (
    # ISO form on a line of its own, e.g. "1891-05-05"
    r"^(?P<year>\d{4})-(?P<month>\d{1,2})-(?P<day>\d{1,2})\s*$",
    # Long form, e.g. "Tuesday 5 May 1891" or "Tue, 5th May, 1891"
    r"^(?:mon|tues?|wednes|wed|thurs?|thu|fri|satur|sat|sun)day?,?\s+"
    r"(?P<day>\d{1,2})(?:st|nd|rd|th)?\s+(?P<month>[a-z]+),?\s+(?P<year>\d{4})\s*$",
)

_MONTH_NAMES = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5,
    "june": 6, "july": 7, "august": 8, "september": 9, "october": 10,
    "november": 11, "december": 12,
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "jun": 6, "jul": 7,
    "aug": 8, "sep": 9, "sept": 9, "oct": 10, "nov": 11, "dec": 12,
}


def compile_date_patterns(patterns: Sequence[str] | None = None) -> list[re.Pattern[str]]:
    """Compile the heading grammar, validating that required groups exist."""
    compiled = []
    for pat in patterns or DEFAULT_DATE_PATTERNS:
        try:
            rx = re.compile(pat, re.IGNORECASE)
        except re.error as exc:
            raise CorpusError(f"invalid date pattern {pat!r}: {exc}") from exc
        missing = {"year", "month", "day"} - set(rx.groupindex)
        if missing:
            raise CorpusError(
                f"date pattern {pat!r} lacks named group(s): {', '.join(sorted(missing))}"
            )
        compiled.append(rx)
    return compiled


def _heading_date(match: re.Match[str]) -> Date | None:
    """Turn a heading match into a date, or None if the date is impossible."""
    raw_month = match.group("month")
    if raw_month.isdigit():
        month = int(raw_month)
    else:
        month = _MONTH_NAMES.get(raw_month.casefold(), 0)
    try:
        return Date(int(match.group("year")), month, int(match.group("day")))
    except ValueError:
        return None


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiaryEntry:
    """One dated entry.

    source_span is the [start, end) byte range of the block in the original
    file, heading line included, so the file can be reassembled byte for byte
    from its prefix plus the entry spans in order.
    """

    volume_id: str
    date: Date
    text: str
    source_span: tuple[int, int]


@dataclass(frozen=True)
class Corpus:
    entries: tuple[DiaryEntry, ...]
    warnings: tuple[str, ...]

    @property
    def volume_ids(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for entry in self.entries:
            seen.setdefault(entry.volume_id, None)
        return tuple(seen)


@dataclass(frozen=True)
class ValidationIssue:
    kind: str  # "non_monotonic_date" | "duplicate_date" | "date_gap" | "empty_entry"
    volume_id: str
    date: Date
    message: str


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_diary(
    source: str | IO[str],
    volume_id: str,
    date_patterns: Sequence[str] | None = None,
) -> tuple[list[DiaryEntry], list[str]]:
    """Parse one volume into dated entries plus warnings.

    Returns (entries, warnings).  Entries appear in file order.  The number of
    entries equals the number of recognized valid-date headings; a heading with
    an impossible calendar date is folded into the preceding entry's body with
    a warning rather than starting a new entry.
    """
    text = source if isinstance(source, str) else source.read()
    patterns = compile_date_patterns(date_patterns)

    entries: list[DiaryEntry] = []
    warnings: list[str] = []

    # Accumulate per block.  Byte offsets are over the UTF-8 encoding of the
    # file so spans stay valid against the on-disk form.
    offset = 0
    current_date: Date | None = None
    current_start = 0
    body_lines: list[str] = []
    prefix_lines: list[str] = []

    def flush(end: int) -> None:
        nonlocal body_lines
        if current_date is None:
            return
        body = "\n".join(body_lines)
        if not body.strip():
            warnings.append(
                f"{volume_id}: entry {current_date.isoformat()} has an empty body"
            )
        entries.append(
            DiaryEntry(
                volume_id=volume_id,
                date=current_date,
                text=body,
                source_span=(current_start, end),
            )
        )
        body_lines = []

    for raw_line in text.splitlines(keepends=True):
        line = raw_line.rstrip("\r\n")
        line_bytes = len(raw_line.encode("utf-8"))
        matched = None
        for rx in patterns:
            matched = rx.match(line)
            if matched:
                break
        if matched:
            parsed = _heading_date(matched)
            if parsed is None:
                where = (
                    "treating the block as part of the previous entry"
                    if current_date is not None
                    else "discarding it with the prefix"
                )
                warnings.append(
                    f"{volume_id}: impossible date in heading {line.strip()!r}; {where}"
                )
                matched = None  # fall through to body handling
            else:
                flush(offset)
                current_date = parsed
                current_start = offset
                offset += line_bytes
                continue
        if current_date is None:
            prefix_lines.append(line)
        else:
            body_lines.append(line)
        offset += line_bytes

    flush(offset)

    if any(line.strip() for line in prefix_lines):
        warnings.append(
            f"{volume_id}: {len(prefix_lines)} line(s) before the first date heading discarded"
        )
    return entries, warnings


def load_corpus(
    paths: Iterable[str | Path],
    date_patterns: Sequence[str] | None = None,
) -> Corpus:
    """Parse several volume files into one corpus.

    The volume id is the file stem.  Volumes are merged in sorted volume-id
    order regardless of the order paths were given, so the result is stable.
    Files must be valid UTF-8; a decode failure is an error, not a warning.
    """
    loaded: dict[str, tuple[list[DiaryEntry], list[str]]] = {}
    for path in paths:
        p = Path(path)
        vol = p.stem
        if vol in loaded:
            raise CorpusError(f"duplicate volume id {vol!r} from {p}")
        try:
            raw = p.read_text(encoding="utf-8", errors="strict")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"{p}: not valid UTF-8: {exc}") from exc
        loaded[vol] = parse_diary(raw, vol, date_patterns)

    entries: list[DiaryEntry] = []
    warnings: list[str] = []
    for vol in sorted(loaded):
        ents, warns = loaded[vol]
        entries.extend(ents)
        warnings.extend(warns)
    return Corpus(entries=tuple(entries), warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_corpus(corpus: Corpus, max_gap_days: int | None = None) -> list[ValidationIssue]:
    """Report ordering problems per volume; never raises.

    Checks, within each volume in file order: dates that move backwards,
    duplicate dates, gaps longer than max_gap_days (when given), and empty
    entry bodies.
    """
    issues: list[ValidationIssue] = []
    by_volume: dict[str, list[DiaryEntry]] = {}
    for entry in corpus.entries:
        by_volume.setdefault(entry.volume_id, []).append(entry)

    for vol, ents in by_volume.items():
        seen: set[Date] = set()
        prev: Date | None = None
        for entry in ents:
            if entry.date in seen:
                issues.append(
                    ValidationIssue(
                        "duplicate_date", vol, entry.date,
                        f"{vol}: date {entry.date.isoformat()} appears more than once",
                    )
                )
            seen.add(entry.date)
            if prev is not None:
                if entry.date < prev:
                    issues.append(
                        ValidationIssue(
                            "non_monotonic_date", vol, entry.date,
                            f"{vol}: {entry.date.isoformat()} follows {prev.isoformat()}",
                        )
                    )
                elif max_gap_days is not None and (entry.date - prev).days > max_gap_days:
                    issues.append(
                        ValidationIssue(
                            "date_gap", vol, entry.date,
                            f"{vol}: {(entry.date - prev).days}-day gap before "
                            f"{entry.date.isoformat()}",
                        )
                    )
            prev = entry.date
            if not entry.text.strip():
                issues.append(
                    ValidationIssue(
                        "empty_entry", vol, entry.date,
                        f"{vol}: entry {entry.date.isoformat()} has an empty body",
                    )
                )
    return issues
