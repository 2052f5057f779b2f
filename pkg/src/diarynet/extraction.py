"""Person mention extraction.

Two candidate sources feed the extractor: a gazetteer of known aliases, and a
rule that proposes honorific-plus-capitalized-name sequences even when the
name is not in the gazetteer (so new people surface for review instead of
vanishing).  Candidates are merged greedily, earliest start first, longer
match preferred at the same start.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date as Date
from typing import Iterable, Sequence

from .corpus import Corpus, DiaryEntry

__all__ = [
    "DEFAULT_HONORIFICS",
    "GazetteerCollisionError",
    "Gazetteer",
    "Mention",
    "MentionExtractor",
    "compile_gazetteer",
    "extract_mentions",
    "normalize_form",
]


class GazetteerCollisionError(ValueError):
    """Two entities claim the same normalized alias."""

# Honorific tokens are stripped from normalized forms and absorbed into match
# spans.  Mixed English/Ottoman set reflecting late-19th-century diaries.
DEFAULT_HONORIFICS: tuple[str, ...] = (
    "Mr", "Mrs", "Capt", "Captain", "Dr", "Haji", "Agha", "Effendi", "Sheikh",
)

_TRAILING_PUNCT = ".,;:!?'\")"


def normalize_form(surface: str, honorifics: Sequence[str] = DEFAULT_HONORIFICS) -> str:
    """Reduce a surface string to its canonical lookup form.

    Casefold, collapse whitespace runs to single spaces, drop leading
    honorific tokens (with or without a trailing period), and strip trailing
    punctuation.  The result may be empty if the surface was nothing but
    honorifics.
    """
    folded = " ".join(surface.casefold().split())
    hset = {h.casefold() for h in honorifics}
    tokens = folded.split(" ")
    i = 0
    while i < len(tokens) and tokens[i].rstrip(".") in hset:
        i += 1
    return " ".join(tokens[i:]).rstrip(_TRAILING_PUNCT)


@dataclass(frozen=True)
class Mention:
    """One person mention inside one entry.

    char_span holds [start, end) character offsets into the entry text, so
    entry.text[start:end] == surface always holds.
    """

    volume_id: str
    date: Date
    surface: str
    normalized: str
    char_span: tuple[int, int]
    source: str  # "gazetteer" | "rule"


def _alias_pattern(alias: str) -> str:
    """Escape an alias for the matcher; internal whitespace matches any run."""
    parts = [re.escape(p) for p in alias.split()]
    return r"\s+".join(parts)


class MentionExtractor:
    """Find person mentions in entry text.

    The gazetteer matcher is a single alternation regex with aliases sorted
    longest first so the longer of two overlapping aliases wins, wrapped in
    (?<!\\w)...(?!\\w) boundaries so "Bob" never fires inside "Bobby".
    """

    def __init__(
        self,
        aliases: Iterable[str],
        honorifics: Sequence[str] = DEFAULT_HONORIFICS,
        rule_candidates: bool = True,
    ) -> None:
        self.honorifics = tuple(honorifics)
        self.rule_candidates = rule_candidates
        cleaned = sorted(
            {a.strip() for a in aliases if a and a.strip()},
            key=lambda a: (-len(a), a),
        )
        self._gazetteer_rx: re.Pattern[str] | None = None
        if cleaned:
            alternation = "|".join(_alias_pattern(a) for a in cleaned)
            self._gazetteer_rx = re.compile(
                rf"(?<!\w)(?:{alternation})(?!\w)", re.IGNORECASE
            )
        self._honorific_rx = self._build_honorific_rx()
        self._rule_rx = self._build_rule_rx()

    def _build_honorific_rx(self) -> re.Pattern[str]:
        # Matches one honorific token (optionally dotted) plus trailing
        # whitespace, ending exactly where the following match begins.
        alts = "|".join(
            re.escape(h) for h in sorted(self.honorifics, key=len, reverse=True)
        )
        return re.compile(rf"(?<!\w)(?:{alts})\.?\s+\Z", re.IGNORECASE)

    def _build_rule_rx(self) -> re.Pattern[str]:
        alts = "|".join(
            re.escape(h) for h in sorted(self.honorifics, key=len, reverse=True)
        )
        # Honorific (any case) then one or more capitalized tokens.
        name_token = r"[A-Z][\w'-]*"
        return re.compile(
            rf"(?<!\w)(?i:(?:{alts}))\.?\s+{name_token}(?:\s+{name_token})*(?!\w)"
        )

    def _absorb_honorifics(self, text: str, start: int) -> int:
        """Extend a span start left over any immediately preceding honorifics."""
        while True:
            m = self._honorific_rx.search(text, 0, start)
            if m is None or m.end() != start:
                return start
            start = m.start()

    def extract_entry(self, entry: DiaryEntry) -> list[Mention]:
        text = entry.text
        candidates: list[tuple[int, int, str]] = []
        if self._gazetteer_rx is not None:
            for m in self._gazetteer_rx.finditer(text):
                start = self._absorb_honorifics(text, m.start())
                candidates.append((start, m.end(), "gazetteer"))
        if self.rule_candidates:
            for m in self._rule_rx.finditer(text):
                candidates.append((m.start(), m.end(), "rule"))

        # Greedy merge: earliest start, then longest; gazetteer outranks rule
        # on identical spans.  Overlapping later candidates are dropped.
        candidates.sort(key=lambda c: (c[0], c[0] - c[1], c[2]))
        mentions: list[Mention] = []
        last_end = -1
        prev_span: tuple[int, int] | None = None
        for start, end, source in candidates:
            if (start, end) == prev_span:
                continue
            if start < last_end:
                continue
            surface = text[start:end]
            mentions.append(
                Mention(
                    volume_id=entry.volume_id,
                    date=entry.date,
                    surface=surface,
                    normalized=normalize_form(surface, self.honorifics),
                    char_span=(start, end),
                    source=source,
                )
            )
            last_end = end
            prev_span = (start, end)
        return mentions

    def extract_corpus(self, corpus: Corpus) -> list[Mention]:
        out: list[Mention] = []
        for entry in corpus.entries:
            out.extend(self.extract_entry(entry))
        return out


# ---------------------------------------------------------------------------
# Gazetteer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gazetteer:
    """Compiled alias lookup: normalized alias -> canonical entity id."""

    entries: dict[str, str]
    honorifics: tuple[str, ...]
    extractor: MentionExtractor

    def lookup(self, normalized: str) -> str | None:
        return self.entries.get(normalized)


def compile_gazetteer(
    alias_table,
    honorifics: Sequence[str] = DEFAULT_HONORIFICS,
    rule_candidates: bool = True,
) -> Gazetteer:
    """Compile an alias table into a matcher plus exact-lookup map.

    The alias table normally guarantees disjoint alias sets, but a hand-built
    or corrupted table might not; a shared normalized alias is a hard error
    naming both claimants, because silently picking one would misattribute
    every later match.
    """
    entries: dict[str, str] = {}
    for eid in sorted(alias_table.entities):
        for alias in sorted(alias_table.entities[eid].aliases):
            other = entries.get(alias)
            if other is not None and other != eid:
                raise GazetteerCollisionError(
                    f"alias {alias!r} claimed by both {other!r} and {eid!r}"
                )
            entries[alias] = eid
    return Gazetteer(
        entries=entries,
        honorifics=tuple(honorifics),
        extractor=MentionExtractor(
            entries.keys(), honorifics=honorifics, rule_candidates=rule_candidates
        ),
    )


def extract_mentions(entry: DiaryEntry, gazetteer: Gazetteer) -> list[Mention]:
    """All non-overlapping mentions in one entry, ordered by char_span."""
    return gazetteer.extractor.extract_entry(entry)
