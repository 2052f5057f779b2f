/** Decision round-trip through the HTTP contract: applying a MapTo from a
 * review card shrinks the queue by one and lands in the provenance feed
 * attributed to the curator who made it.
 */

import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import { CurationApp } from "../src/app.js";
import { MockBackend } from "./helpers/backend.js";

const CURATOR = "Marta Okoye";

describe("decision round-trip", () => {
  it("MapTo removes the card and shows up in provenance under the curator id", async () => {
    const backend = new MockBackend();
    const app = new CurationApp(backend.fetch);
    app.actor = CURATOR;
    await app.init();

    const before = app.queue!.total;
    expect(before).toBeGreaterThan(0);
    const card = app.queue!.items[0]!;

    const res = await app.submitDecision(
      { kind: "map_to", form: card.form, entity_id: "eliza-webb" },
      "same hand, same visits: this is the captain",
    );

    expect(app.queue!.total).toBe(before - 1);
    expect(app.queue!.items.some((it) => it.form === card.form)).toBe(false);

    const prov = await app.api.getProvenance();
    const rec = prov.records.find((r) => r.seq === res.provenance_seq);
    expect(rec).toBeDefined();
    expect(rec!.actor).toBe(CURATOR);
    expect(rec!.step).toBe("decision");
    expect(rec!.rationale).toContain("same hand");

    // read-your-writes: the refreshed views carry the bumped alias version
    expect(app.queue!.alias_version).toBe(res.alias_version);
    expect(app.network!.alias_version).toBe(res.alias_version);
  });

  it("refuses locally when the rationale is blank, without touching the server", async () => {
    const backend = new MockBackend();
    const app = new CurationApp(backend.fetch);
    app.actor = CURATOR;
    await app.init();
    const posted = () =>
      backend.requests.filter((r) => r.startsWith("POST")).length;
    const baseline = posted();

    await expect(
      app.submitDecision(
        { kind: "ignore", form: app.queue!.items[0]!.form },
        "   ",
      ),
    ).rejects.toThrow(/rationale/);
    expect(posted()).toBe(baseline);
  });

  it("refuses locally when no curator name is set", async () => {
    const backend = new MockBackend();
    const app = new CurationApp(backend.fetch);
    await app.init();

    await expect(
      app.submitDecision(
        { kind: "ignore", form: app.queue!.items[0]!.form },
        "street name, not a person",
      ),
    ).rejects.toThrow(/name/);
  });

  it("surfaces server-side validation as ApiError with the error body", async () => {
    const backend = new MockBackend();
    const app = new CurationApp(backend.fetch);
    await app.init();

    // bypass the local guard to exercise the HTTP 422 path
    const err = await app.api
      .postDecision({ kind: "ignore", form: "x" }, "someone", "")
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(422);
    expect((err as ApiError).body.code).toBe("validation");
  });

  it("a MapTo onto an unknown entity is rejected and the queue is untouched", async () => {
    const backend = new MockBackend();
    const app = new CurationApp(backend.fetch);
    app.actor = CURATOR;
    await app.init();
    const before = app.queue!.total;

    const err = await app
      .submitDecision(
        { kind: "map_to", form: app.queue!.items[0]!.form, entity_id: "ghost" },
        "misread the ledger",
      )
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);

    await app.refreshQueue();
    expect(app.queue!.total).toBe(before);
  });
});
