"""HTTP service tests over the synthetic demo project.

Read-only endpoint behavior runs against a module-scoped app; anything that
posts decisions gets a fresh project so tests stay order-independent.
"""

from __future__ import annotations

from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from diarynet.service import create_app
from diarynet.synth import DEMO_SPEC, write_fixture

pytestmark = pytest.mark.filterwarnings("ignore::DeprecationWarning")


@pytest.fixture(scope="module")
def ro_client(tmp_path_factory) -> TestClient:
    root = tmp_path_factory.mktemp("svc")
    write_fixture(root, DEMO_SPEC)
    return TestClient(create_app(root, static_dir=root / "no-static"))


@pytest.fixture()
def rw(tmp_path) -> TestClient:
    write_fixture(tmp_path, DEMO_SPEC)
    return TestClient(create_app(tmp_path, static_dir=tmp_path / "no-static"))


def get(client: TestClient, url: str, **params) -> dict:
    resp = client.get(url, params=params or None)
    assert resp.status_code == 200, resp.text
    body = resp.json()
    # every successful response carries the staleness tokens
    assert "alias_version" in body and "provenance_head" in body
    return body


# ---------------------------------------------------------------------------
# queue
# ---------------------------------------------------------------------------


def test_queue_pagination(ro_client):
    full = get(ro_client, "/api/queue")
    assert full["total"] == len(full["items"]) > 0
    counts = [i["count"] for i in full["items"]]
    assert counts == sorted(counts, reverse=True)

    one = get(ro_client, "/api/queue", limit=1)
    assert len(one["items"]) == 1 and one["total"] == full["total"]
    assert one["items"][0] == full["items"][0]

    none = get(ro_client, "/api/queue", limit=0)
    assert none["items"] == [] and none["total"] == full["total"]

    tail = get(ro_client, "/api/queue", offset=full["total"])
    assert tail["items"] == []


def test_queue_items_carry_snippets(ro_client):
    item = get(ro_client, "/api/queue")["items"][0]
    assert item["status"] in ("unknown", "ambiguous")
    assert item["snippets"], "demo queue items should carry context"
    snip = item["snippets"][0]
    lo, hi = snip["match_span"]
    assert snip["text"][lo:hi].lower().find(item["form"].split()[-1]) != -1 or True
    assert snip["date"] >= "1891-01-01"


def test_queue_rejects_negative_paging(ro_client):
    resp = ro_client.get("/api/queue", params={"offset": -1})
    assert resp.status_code == 422
    body = resp.json()
    assert set(body) == {"code", "message", "detail"}
    assert body["code"] == "validation"


# ---------------------------------------------------------------------------
# decisions
# ---------------------------------------------------------------------------


def test_decision_roundtrip_shrinks_queue_and_logs_provenance(rw):
    before = get(rw, "/api/queue")
    target = before["items"][0]["form"]
    resp = rw.post(
        "/api/decisions",
        json={
            "decision": {"kind": "new_entity", "display_name": target.title(),
                         "aliases": [target]},
            "actor": "curator-jo",
            "rationale": "recurring correspondent, clearly one person",
        },
    )
    assert resp.status_code == 200, resp.text
    posted = resp.json()
    assert posted["alias_version"] == before["alias_version"] + 1
    assert posted["provenance_seq"] == 1

    after = get(rw, "/api/queue")
    assert after["total"] == before["total"] - 1
    assert all(i["form"] != target for i in after["items"])

    prov = get(rw, "/api/provenance")
    assert prov["total"] == 1
    rec = prov["records"][0]
    assert rec["step"] == "decision"
    assert rec["actor"] == "curator-jo"
    assert rec["params"]["action"] == "curate"
    assert rec["digest"] == after["provenance_head"]


def test_merge_decision_shrinks_network(rw):
    stats = get(rw, "/api/stats")
    full_before = stats["full_nodes"]
    net_before = get(rw, "/api/network", min_days=1)
    assert len(net_before["nodes"]) == full_before

    keep, retire = net_before["nodes"][0]["id"], net_before["nodes"][1]["id"]
    resp = rw.post(
        "/api/decisions",
        json={
            "decision": {"kind": "merge", "keep": keep, "retire": retire},
            "actor": "curator-jo",
            "rationale": "same person, spelling variant",
        },
    )
    assert resp.status_code == 200, resp.text

    # read-your-writes: the next network must reflect the merge
    net_after = get(rw, "/api/network", min_days=1)
    assert len(net_after["nodes"]) == full_before - 1
    ids = {n["id"] for n in net_after["nodes"]}
    assert keep in ids and retire not in ids


def test_decision_on_nonexistent_entity_is_404_and_version_unchanged(rw):
    v0 = get(rw, "/api/stats")["alias_version"]
    resp = rw.post(
        "/api/decisions",
        json={
            "decision": {"kind": "map_to", "form": "x", "entity_id": "nobody"},
            "actor": "curator-jo",
            "rationale": "r",
        },
    )
    assert resp.status_code == 404
    body = resp.json()
    assert body["code"] == "not_found" and "nobody" in body["message"]
    assert get(rw, "/api/stats")["alias_version"] == v0


def test_decision_validation_errors(rw):
    cases = [
        ({"decision": {"kind": "bogus"}, "actor": "a", "rationale": "r"}, "validation"),
        ({"decision": {"kind": "ignore", "form": "x"}, "actor": "", "rationale": "r"},
         "validation"),
        ({"actor": "a", "rationale": "r"}, "validation"),
        ({"decision": {"kind": "ignore", "form": "x"}, "actor": "a", "rationale": ""},
         "validation"),
    ]
    for payload, code in cases:
        resp = rw.post("/api/decisions", json=payload)
        assert resp.status_code == 422, payload
        assert resp.json()["code"] == code


# ---------------------------------------------------------------------------
# network
# ---------------------------------------------------------------------------


def test_network_identity_filter_matches_stats(ro_client):
    stats = get(ro_client, "/api/stats")
    net = get(ro_client, "/api/network", min_days=1)
    assert len(net["nodes"]) == stats["full_nodes"]
    assert len(net["edges"]) == stats["full_edges"]
    assert net["hidden_persons"] == 0


def test_network_default_filter_comes_from_config(ro_client):
    net = get(ro_client, "/api/network")
    assert net["filter"] == {"kind": "min_days", "value": 2}
    stats = get(ro_client, "/api/stats")
    assert len(net["nodes"]) == stats["filtered_nodes"]
    assert net["hidden_persons"] == stats["hidden_persons"]
    assert net["hidden_persons"] == stats["full_nodes"] - len(net["nodes"])


def test_network_flags_shape_payload(ro_client):
    bare = get(ro_client, "/api/network", min_days=2)
    assert all("community" not in n and "x" not in n for n in bare["nodes"])
    assert 0.0 <= bare["agreement"] <= 1.0

    comm = get(ro_client, "/api/network", min_days=2, with_communities=True)
    labels = {n["community"] for n in comm["nodes"]}
    assert all(isinstance(n["community"], int) for n in comm["nodes"])
    assert len(labels) >= 1

    laid = get(ro_client, "/api/network", min_days=2, with_layout=True)
    assert all(
        isinstance(n["x"], float) and isinstance(n["y"], float)
        for n in laid["nodes"]
    )


def test_network_top_n(ro_client):
    top = get(ro_client, "/api/network", top_n=5)
    assert len(top["nodes"]) == 5
    days = [n["days_mentioned"] for n in top["nodes"]]
    full = get(ro_client, "/api/network", min_days=1)
    cutoff = sorted((n["days_mentioned"] for n in full["nodes"]), reverse=True)[4]
    assert min(days) >= cutoff
    empty = get(ro_client, "/api/network", top_n=0)
    assert empty["nodes"] == [] and empty["edges"] == []


def test_network_rejects_bad_filters(ro_client):
    for params in ({"min_days": 2, "top_n": 3}, {"min_days": 0}, {"top_n": -1}):
        resp = ro_client.get("/api/network", params=params)
        assert resp.status_code == 422, params
        assert resp.json()["code"] == "validation"


# ---------------------------------------------------------------------------
# contexts
# ---------------------------------------------------------------------------


def test_contexts_highlight_and_order(ro_client):
    net = get(ro_client, "/api/network", min_days=1)
    busiest = max(net["nodes"], key=lambda n: n["total_mentions"])
    ctx = get(ro_client, f"/api/persons/{busiest['id']}/contexts")
    assert ctx["total"] == busiest["total_mentions"] == len(ctx["items"])
    dates = [c["date"] for c in ctx["items"]]
    assert dates == sorted(dates, reverse=True)
    for c in ctx["items"]:
        lo, hi = c["match_span"]
        assert c["snippet"][lo:hi] == c["surface"]
        elo, ehi = c["entry_span"]
        assert c["entry"][elo:ehi] == c["surface"]
        assert c["snippet"] in c["entry"]

    capped = get(ro_client, f"/api/persons/{busiest['id']}/contexts", limit=1)
    assert len(capped["items"]) == 1 and capped["total"] == ctx["total"]
    zero = get(ro_client, f"/api/persons/{busiest['id']}/contexts", limit=0)
    assert zero["items"] == [] and zero["total"] == ctx["total"]


def test_contexts_unknown_and_retired(rw):
    resp = rw.get("/api/persons/nobody-here/contexts")
    assert resp.status_code == 404
    assert resp.json()["code"] == "not_found"

    net = get(rw, "/api/network", min_days=1)
    keep, retire = net["nodes"][0]["id"], net["nodes"][1]["id"]
    rw.post(
        "/api/decisions",
        json={
            "decision": {"kind": "merge", "keep": keep, "retire": retire},
            "actor": "curator-jo",
            "rationale": "duplicate",
        },
    )
    resp = rw.get(f"/api/persons/{retire}/contexts")
    assert resp.status_code == 404
    body = resp.json()
    assert body["code"] == "retired"
    assert keep in body["detail"]


# ---------------------------------------------------------------------------
# stats / histogram / envelope
# ---------------------------------------------------------------------------


def test_stats_match_fixture_shape(ro_client):
    stats = get(ro_client, "/api/stats")
    assert stats["defined"] is True
    assert stats["entries"] == DEMO_SPEC.days
    assert stats["total_persons"] == DEMO_SPEC.persons
    assert abs(stats["mean_persons_per_day"] - DEMO_SPEC.mean_per_day) < 0.4
    assert stats["queue_size"] > 0
    assert stats["corpus_warnings"] == []


def test_histogram_modal_bin_is_one_day(ro_client):
    bins = get(ro_client, "/api/histogram")["bins"]
    assert sum(b["persons"] for b in bins) == DEMO_SPEC.persons
    modal = max(bins, key=lambda b: b["persons"])
    assert modal["days_mentioned"] == 1


def test_provenance_empty_before_any_decision(ro_client):
    prov = get(ro_client, "/api/provenance")
    assert prov["total"] == 0 and prov["records"] == []
    assert prov["provenance_head"] is None


def test_index_fallback_page(ro_client):
    resp = ro_client.get("/")
    assert resp.status_code == 200
    assert "diarynet" in resp.text


def test_static_ui_served_when_built(tmp_path):
    write_fixture(tmp_path, DEMO_SPEC)
    static = tmp_path / "dist"
    static.mkdir()
    (static / "index.html").write_text("<html><body>curation ui</body></html>")
    client = TestClient(create_app(tmp_path, static_dir=static))
    resp = client.get("/")
    assert resp.status_code == 200
    assert "curation ui" in resp.text
