"""Alias table, decision, and review queue tests.

The random-decision soup at the bottom is the workhorse: it throws valid and
invalid decisions at a table and checks that failures never leave a mark and
that the log replays to the same bytes.
"""

from __future__ import annotations

import json
import random
from datetime import date

import pytest

from diarynet.corpus import Corpus, DiaryEntry
from diarynet.extraction import Mention, MentionExtractor
from diarynet.resolution import (
    AliasLog,
    AliasTable,
    ConflictError,
    Ignore,
    IntegrityError,
    MapTo,
    Merge,
    NewEntity,
    NotFoundError,
    PersonEntity,
    ResolutionError,
    Split,
    ValidationError,
    apply_decision,
    build_review_queue,
    decision_from_dict,
    decision_to_dict,
    resolve_form,
    resolve_mentions,
    serialize_table,
)


def table_with(*names: str) -> AliasTable:
    t = AliasTable()
    for name in names:
        t = apply_decision(t, NewEntity(display_name=name), "test", "seed")
    return t


# ---------------------------------------------------------------------------
# apply_decision
# ---------------------------------------------------------------------------


def test_new_entity_creates_slug_and_default_alias():
    t = table_with("Alice Smith")
    assert set(t.entities) == {"alice-smith"}
    ent = t.entities["alice-smith"]
    assert ent.display_name == "Alice Smith"
    assert ent.aliases == {"alice smith"}
    assert t.version == 1


def test_new_entity_slug_collision_gets_suffix():
    # Same slug, different default alias: both are allowed to exist.
    t = table_with("Alice Smith", "Alice-Smith")
    assert set(t.entities) == {"alice-smith", "alice-smith-2"}


def test_new_entity_extra_aliases_normalized():
    t = AliasTable()
    t = apply_decision(
        t, NewEntity("Alice Smith", aliases=("Mrs. Alice", "ALICE S.")), "a", "r"
    )
    assert t.entities["alice-smith"].aliases == {"alice smith", "alice", "alice s"}


def test_new_entity_alias_conflict_rejected():
    t = table_with("Alice Smith")
    with pytest.raises(ConflictError):
        apply_decision(t, NewEntity("Alice Smith"), "a", "r")


def test_map_to_adds_alias_and_unignores():
    t = table_with("Alice Smith")
    t = apply_decision(t, Ignore("ally"), "a", "r")
    t = apply_decision(t, MapTo("Ally", "alice-smith"), "a", "changed my mind")
    assert "ally" in t.entities["alice-smith"].aliases
    assert "ally" not in t.ignored


def test_map_to_unknown_entity_not_found():
    with pytest.raises(NotFoundError):
        apply_decision(table_with("Alice"), MapTo("x", "nobody"), "a", "r")


def test_map_to_owned_form_conflicts():
    t = table_with("Alice Smith", "Bob Jones")
    with pytest.raises(ConflictError):
        apply_decision(t, MapTo("alice smith", "bob-jones"), "a", "r")
    # Re-mapping to the same owner is a harmless no-op.
    t2 = apply_decision(t, MapTo("alice smith", "alice-smith"), "a", "r")
    assert t2.version == t.version + 1


def test_empty_rationale_rejected_and_table_unchanged():
    t = table_with("Alice")
    before = serialize_table(t)
    for bad in ("", "   "):
        with pytest.raises(ValidationError):
            apply_decision(t, Ignore("x"), "a", bad)
    assert serialize_table(t) == before


def test_merge_moves_aliases_and_retires():
    t = table_with("Alice Smith", "A. Smith")
    t = apply_decision(t, Merge(keep="alice-smith", retire="a-smith"), "a", "same person")
    assert "a-smith" not in t.entities
    assert t.entities["alice-smith"].aliases == {"alice smith", "a. smith"}
    assert t.retired == {"a-smith": "alice-smith"}


def test_merge_chain_repoints_old_retirements():
    t = table_with("A", "B", "C")
    t = apply_decision(t, Merge(keep="b", retire="a"), "x", "r")
    t = apply_decision(t, Merge(keep="c", retire="b"), "x", "r")
    assert t.retired == {"a": "c", "b": "c"}


def test_merge_self_and_missing_rejected():
    t = table_with("Alice")
    with pytest.raises(ValidationError):
        apply_decision(t, Merge("alice", "alice"), "a", "r")
    with pytest.raises(NotFoundError):
        apply_decision(t, Merge("alice", "ghost"), "a", "r")


def test_split_moves_alias_subset():
    t = AliasTable()
    t = apply_decision(t, NewEntity("Smith", aliases=("john smith", "mary smith")), "a", "r")
    t = apply_decision(
        t, Split(source="smith", aliases=("mary smith",), display_name="Mary Smith"), "a", "r"
    )
    assert t.entities["smith"].aliases == {"smith", "john smith"}
    assert t.entities["mary-smith"].aliases == {"mary smith"}


def test_split_requires_subset():
    t = table_with("Alice Smith")
    with pytest.raises(NotFoundError):
        apply_decision(
            t, Split("alice-smith", ("not an alias",), "Other"), "a", "r"
        )


def test_ignore_conflicts_with_owned_alias():
    t = table_with("Alice")
    with pytest.raises(ConflictError):
        apply_decision(t, Ignore("alice"), "a", "r")


def test_decision_dict_roundtrip():
    decisions = [
        MapTo("ally", "alice"),
        NewEntity("Bob", aliases=("bobby",)),
        Merge("a", "b"),
        Split("a", ("x", "y"), "New"),
        Ignore("noise"),
    ]
    for d in decisions:
        assert decision_from_dict(decision_to_dict(d)) == d
    with pytest.raises(ValidationError):
        decision_from_dict({"kind": "bogus"})


# ---------------------------------------------------------------------------
# resolve_form
# ---------------------------------------------------------------------------


def test_resolve_exact_alias_hit():
    t = table_with("Alice Smith")
    r = resolve_form(t, "alice smith")
    assert (r.status, r.entity_id) == ("resolved", "alice-smith")


def test_resolve_shared_surname_is_ambiguous():
    t = table_with("John Smith", "Mary Smith")
    r = resolve_form(t, "smith")
    assert r.status == "ambiguous"
    assert r.candidates == ("john-smith", "mary-smith")


def test_resolve_single_surname_hit_stays_unknown():
    t = table_with("John Smith")
    r = resolve_form(t, "smith")
    assert r.status == "unknown"
    assert r.candidates == ("john-smith",)


def test_ignored_form_still_classifies_normally():
    # The stop-list only keeps forms off the review queue; resolution itself
    # never reports a special status for them.
    t = apply_decision(AliasTable(), Ignore("the sultan"), "a", "title, not a person")
    assert resolve_form(t, "the sultan").status == "unknown"


def test_resolve_no_evidence_unknown():
    assert resolve_form(table_with("Alice"), "zanzibar").status == "unknown"


# ---------------------------------------------------------------------------
# review queue
# ---------------------------------------------------------------------------


def mk_mention(form: str, day: int, text_pos: int = 0) -> Mention:
    return Mention(
        volume_id="v1",
        date=date(1891, 5, day),
        surface=form.title(),
        normalized=form,
        char_span=(text_pos, text_pos + len(form)),
        source="gazetteer",
    )


def test_queue_orders_by_count_then_form():
    t = table_with("Alice Smith")
    mentions = [
        mk_mention("zed", 1),
        mk_mention("karim", 1),
        mk_mention("karim", 2),
        mk_mention("alice smith", 1),  # resolved, excluded
    ]
    queue = build_review_queue(resolve_mentions(mentions, t), ignored=t.ignored)
    assert [(it.form, it.count) for it in queue] == [("karim", 2), ("zed", 1)]


def test_queue_skips_ignored_and_marks_ambiguous():
    t = table_with("John Smith", "Mary Smith")
    t = apply_decision(t, Ignore("noise"), "a", "r")
    queue = build_review_queue(
        resolve_mentions([mk_mention("noise", 1), mk_mention("smith", 1)], t),
        ignored=t.ignored,
    )
    assert len(queue) == 1
    assert queue[0].form == "smith"
    assert queue[0].status == "ambiguous"
    assert queue[0].candidates == ("john-smith", "mary-smith")


def test_queue_snippets_window_and_cap():
    body = ("x" * 200) + "Karim" + ("y" * 200)
    entries = tuple(
        DiaryEntry("v1", date(1891, 5, d), body, (0, 1)) for d in range(1, 9)
    )
    corpus = Corpus(entries=entries, warnings=())
    mentions = [
        Mention("v1", date(1891, 5, d), "Karim", "karim", (200, 205), "rule")
        for d in range(8, 0, -1)  # reversed to prove chronological sorting
    ]
    queue = build_review_queue(resolve_mentions(mentions, AliasTable()), corpus=corpus)
    assert len(queue) == 1
    snips = queue[0].snippets
    assert len(snips) == 5
    assert [s.date for s in snips] == [f"1891-05-0{d}" for d in range(1, 6)]
    s = snips[0]
    assert len(s.text) == 120 + 5 + 120
    lo, hi = s.match_span
    assert s.text[lo:hi] == "Karim"


def test_queue_snippet_clipped_at_entry_edges():
    entry = DiaryEntry("v1", date(1891, 5, 1), "Karim came by.", (0, 1))
    corpus = Corpus(entries=(entry,), warnings=())
    m = Mention("v1", date(1891, 5, 1), "Karim", "karim", (0, 5), "gazetteer")
    queue = build_review_queue(resolve_mentions([m], AliasTable()), corpus=corpus)
    s = queue[0].snippets[0]
    assert s.text == "Karim came by."
    assert s.match_span == (0, 5)


def test_resolve_mentions_statuses():
    t = table_with("Alice Smith", "John Smith", "Mary Smith")
    ex = MentionExtractor(["Alice Smith", "Smith", "Karim"])
    entry = DiaryEntry(
        "v", date(1891, 5, 5), "Alice Smith, Smith, and Karim dined.", (0, 1)
    )
    resolved = resolve_mentions(ex.extract_entry(entry), t)
    statuses = [(r.mention.normalized, r.status) for r in resolved]
    assert statuses == [
        ("alice smith", "resolved"),
        ("smith", "ambiguous"),
        ("karim", "unknown"),
    ]


# ---------------------------------------------------------------------------
# alias log
# ---------------------------------------------------------------------------


def test_alias_log_append_and_replay(tmp_path):
    log = AliasLog(tmp_path / "aliases.log")
    log.append(NewEntity("Alice Smith"), "curator", "seed")
    log.append(MapTo("ally", "alice-smith"), "curator", "diary shorthand")
    log.append(Ignore("the consul"), "curator", "title")
    table = log.replay()
    assert table.version == 3
    assert table.entities["alice-smith"].aliases == {"alice smith", "ally"}
    assert "the consul" in table.ignored


def test_alias_log_header_line(tmp_path):
    log = AliasLog(tmp_path / "aliases.log")
    log.append(NewEntity("A"), "c", "r")
    first = (tmp_path / "aliases.log").read_text().splitlines()[0]
    assert json.loads(first) == {"format": "diarynet-aliases/1", "hash": "sha256"}


def test_alias_log_detects_tampering(tmp_path):
    path = tmp_path / "aliases.log"
    log = AliasLog(path)
    log.append(NewEntity("Alice"), "c", "r")
    log.append(NewEntity("Bob"), "c", "r")
    lines = path.read_text().splitlines()
    lines[1] = lines[1].replace("Alice", "Malice")
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(IntegrityError):
        AliasLog(path).read_records()


def test_alias_log_chain_digests_ignore_timestamp(tmp_path):
    a = AliasLog(tmp_path / "a.log")
    b = AliasLog(tmp_path / "b.log")
    for log, ts in ((a, "2026-01-01T00:00:00+00:00"), (b, "2026-02-02T12:00:00+00:00")):
        log.append(NewEntity("Alice"), "c", "r", ts=ts)
        log.append(Ignore("x"), "c", "r", ts=ts)
    ra, rb = a.read_records(), b.read_records()
    assert [r["digest"] for r in ra] == [r["digest"] for r in rb]


# ---------------------------------------------------------------------------
# soup: atomicity + byte-exact replay over random decision sequences
# ---------------------------------------------------------------------------


def random_decision(rng: random.Random, table: AliasTable):
    names = ["Alice Smith", "Bob Jones", "Carol White", "Dan Black", "Eve Gray"]
    ids = sorted(table.entities) or ["nobody"]
    forms = ["ally", "bobby", "cw", "the consul", "smith", ""]
    kind = rng.randrange(6)
    if kind == 0:
        return NewEntity(rng.choice(names), aliases=tuple(rng.sample(forms, rng.randrange(3))))
    if kind == 1:
        return MapTo(rng.choice(forms), rng.choice(ids + ["ghost"]))
    if kind == 2:
        return Merge(rng.choice(ids + ["ghost"]), rng.choice(ids + ["ghost"]))
    if kind == 3:
        src = rng.choice(ids + ["ghost"])
        ent = table.entities.get(src)
        aliases = tuple(rng.sample(sorted(ent.aliases), min(1, len(ent.aliases)))) if ent else ("x",)
        return Split(src, aliases, rng.choice(names))
    if kind == 4:
        return Ignore(rng.choice(forms))
    return NewEntity("")  # always invalid


def test_random_decision_soup_atomic_and_replayable(tmp_path):
    rng = random.Random(20260815)
    log = AliasLog(tmp_path / "aliases.log")
    table = AliasTable()
    applied = 0
    for i in range(1000):
        decision = random_decision(rng, table)
        rationale = "" if rng.random() < 0.05 else f"step {i}"
        before = serialize_table(table)
        try:
            new_table = apply_decision(table, decision, "soup", rationale)
        except ResolutionError:
            assert serialize_table(table) == before  # failed apply left no trace
            continue
        log.append(decision, "soup", rationale, ts="2026-08-15T00:00:00+00:00")
        table = new_table
        applied += 1
    assert applied > 150  # the soup actually exercised the table
    assert table.version == applied
    replayed = log.replay()
    assert serialize_table(replayed) == serialize_table(table)
