import { describe, expect, it } from "vitest";

import type { NetworkNode } from "../src/api.js";
import {
  captionText,
  colorFor,
  escapeHtml,
  fitTransform,
  hiddenCount,
  highlightHtml,
  hitTest,
  radiusFor,
  splitAtSpan,
} from "../src/model.js";
import { renderQueueCard } from "../src/render.js";
import { markedText, MockBackend } from "./helpers/backend.js";

function node(id: string, x: number, y: number, days = 1): NetworkNode {
  return {
    id,
    display_name: id,
    days_mentioned: days,
    total_mentions: days,
    x,
    y,
  };
}

describe("escaping and highlighting", () => {
  it("escapes the five HTML metacharacters", () => {
    expect(escapeHtml(`<a href="x">&'`)).toBe(
      "&lt;a href=&quot;x&quot;&gt;&amp;&#39;",
    );
  });

  it("keeps span offsets meaningful when the text needs escaping", () => {
    const text = `saw <Mr. Webb> & co.`;
    const span: [number, number] = [5, 13];
    expect(splitAtSpan(text, span).match).toBe("Mr. Webb");
    const html = highlightHtml(text, span);
    expect(html).toBe("saw &lt;<mark>Mr. Webb</mark>&gt; &amp; co.");
  });

  it("clamps out-of-range spans instead of throwing", () => {
    expect(splitAtSpan("abc", [2, 99]).match).toBe("c");
    expect(splitAtSpan("abc", [-4, 2]).match).toBe("ab");
    expect(splitAtSpan("abc", [5, 9]).match).toBe("");
  });
});

describe("caption", () => {
  it("states hidden over full and the agreement score", () => {
    expect(captionText(80, 47, 0.8242368)).toBe(
      "33 of 80 persons hidden by this filter; " +
        "community agreement with the full graph 0.824",
    );
  });

  it("uses the singular for one hidden person", () => {
    expect(captionText(5, 4, 1)).toContain("1 of 5 person hidden");
  });

  it("hiddenCount is plain subtraction", () => {
    expect(hiddenCount(80, 80)).toBe(0);
    expect(hiddenCount(80, 47)).toBe(33);
  });
});

describe("node styling", () => {
  it("cycles the palette and greys out missing communities", () => {
    expect(colorFor(0)).toBe(colorFor(12));
    expect(colorFor(1)).not.toBe(colorFor(2));
    expect(colorFor(undefined)).toBe("#9e9e9e");
  });

  it("radius grows with days and stays within bounds", () => {
    expect(radiusFor(0, 10)).toBe(4);
    expect(radiusFor(10, 10)).toBe(16);
    expect(radiusFor(5, 10)).toBeGreaterThan(radiusFor(2, 10));
    expect(radiusFor(3, 0)).toBe(4);
  });
});

describe("canvas projection", () => {
  it("centres the layout and flips the y axis", () => {
    const nodes = [node("a", -10, 0), node("b", 10, 0), node("c", 0, 5)];
    const project = fitTransform(nodes, { width: 200, height: 100, pad: 10 });
    const [ax, ay] = project(-10, 0);
    const [bx] = project(10, 0);
    const [, cy] = project(0, 5);
    expect((ax + bx) / 2).toBeCloseTo(100);
    expect(cy).toBeLessThan(ay);
    expect(ax).toBeGreaterThanOrEqual(10);
    expect(bx).toBeLessThanOrEqual(190);
  });

  it("puts a single node in the middle", () => {
    const project = fitTransform([node("solo", 42, -7)], {
      width: 300,
      height: 200,
      pad: 20,
    });
    // extent is padded by the origin, so the node lands inside, not at, centre
    const [x, y] = project(42, -7);
    expect(x).toBeGreaterThan(0);
    expect(x).toBeLessThan(300);
    expect(y).toBeGreaterThan(0);
    expect(y).toBeLessThan(200);
  });

  it("hit testing finds the node under the cursor and nothing elsewhere", () => {
    const nodes = [node("a", 0, 0, 5), node("b", 100, 0, 5)];
    const project = fitTransform(nodes, { width: 220, height: 100, pad: 10 });
    const [ax, ay] = project(0, 0);
    expect(hitTest(nodes, project, 5, ax + 2, ay - 2)?.id).toBe("a");
    expect(hitTest(nodes, project, 5, (ax + project(100, 0)[0]) / 2, 50)).toBeNull();
  });
});

describe("queue card markup", () => {
  it("marks the mention inside each snippet and carries the form", () => {
    const backend = new MockBackend();
    const item = backend.queue.items[0]!;
    const html = renderQueueCard(item);
    expect(html).toContain(`data-form="${item.form}"`);
    expect(html).toContain("Rationale");
    const snippet = item.snippets[0]!;
    const [lo, hi] = snippet.match_span;
    expect(markedText(html)).toBe(snippet.text.slice(lo, hi));
  });
});
