/** Pure view-model helpers, kept free of DOM and network so they are
 * directly unit-testable.
 */

import type { FilterSpec, NetworkNode } from "./api.js";

/** The scale slider maps straight onto the min-days filter: value 1 keeps
 * every person mentioned on at least one day, i.e. the full graph.
 */
export function filterForSlider(value: number): FilterSpec {
  const v = Math.max(1, Math.round(value));
  return { kind: "min_days", value: v };
}

export function hiddenCount(fullNodes: number, renderedNodes: number): number {
  return fullNodes - renderedNodes;
}

/** Caption shown beside the network at all times. States how many persons the
 * current filter hides and how well the filtered communities agree with the
 * full graph, so the reader never mistakes the drawing for the whole corpus.
 */
export function captionText(
  fullNodes: number,
  renderedNodes: number,
  agreement: number,
): string {
  const hidden = hiddenCount(fullNodes, renderedNodes);
  const noun = hidden === 1 ? "person" : "persons";
  return (
    `${hidden} of ${fullNodes} ${noun} hidden by this filter; ` +
    `community agreement with the full graph ${agreement.toFixed(3)}`
  );
}

export interface SpanParts {
  before: string;
  match: string;
  after: string;
}

/** Split text around a half-open [start, end) span. Out-of-range spans are
 * clamped rather than thrown: a truncated snippet must still render.
 */
export function splitAtSpan(text: string, span: [number, number]): SpanParts {
  const start = Math.max(0, Math.min(span[0], text.length));
  const end = Math.max(start, Math.min(span[1], text.length));
  return {
    before: text.slice(0, start),
    match: text.slice(start, end),
    after: text.slice(end),
  };
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Render text as HTML with the span wrapped in <mark>. Escaping happens per
 * segment so the span offsets keep their meaning in the source text.
 */
export function highlightHtml(text: string, span: [number, number]): string {
  const parts = splitAtSpan(text, span);
  return (
    escapeHtml(parts.before) +
    "<mark>" +
    escapeHtml(parts.match) +
    "</mark>" +
    escapeHtml(parts.after)
  );
}

// Okabe-Ito plus a few darker fills; distinguishable on white and not
// dependent on red-green separation.
const PALETTE = [
  "#0072b2",
  "#e69f00",
  "#009e73",
  "#cc79a7",
  "#d55e00",
  "#56b4e9",
  "#f0e442",
  "#8c6bb1",
  "#525252",
  "#66c2a4",
  "#bf812d",
  "#80b1d3",
];

export function colorFor(community: number | undefined): string {
  if (community === undefined || community < 0) return "#9e9e9e";
  return PALETTE[community % PALETTE.length] as string;
}

/** Node radius in pixels, scaled by sqrt so area tracks days mentioned. */
export function radiusFor(daysMentioned: number, maxDays: number): number {
  if (maxDays <= 0) return 4;
  const frac = Math.max(0, Math.min(1, daysMentioned / maxDays));
  return 4 + 12 * Math.sqrt(frac);
}

export interface Viewport {
  width: number;
  height: number;
  pad: number;
}

export type Project = (x: number, y: number) => [number, number];

/** Map server layout coordinates into a canvas viewport, preserving aspect
 * ratio. Degenerate extents (a single node, or all nodes coincident) land in
 * the centre.
 */
export function fitTransform(
  nodes: readonly NetworkNode[],
  view: Viewport,
): Project {
  const xs = nodes.map((n) => n.x ?? 0);
  const ys = nodes.map((n) => n.y ?? 0);
  const minX = Math.min(...xs, 0);
  const maxX = Math.max(...xs, 0);
  const minY = Math.min(...ys, 0);
  const maxY = Math.max(...ys, 0);
  const spanX = maxX - minX;
  const spanY = maxY - minY;
  const innerW = view.width - 2 * view.pad;
  const innerH = view.height - 2 * view.pad;
  const scale =
    spanX <= 0 && spanY <= 0
      ? 1
      : Math.min(innerW / Math.max(spanX, 1e-9), innerH / Math.max(spanY, 1e-9));
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  return (x, y) => [
    view.width / 2 + (x - cx) * scale,
    // flip y: layout has y up, canvas has y down
    view.height / 2 - (y - cy) * scale,
  ];
}

/** Nearest node within its drawn radius (plus slack), or null. */
export function hitTest(
  nodes: readonly NetworkNode[],
  project: Project,
  maxDays: number,
  px: number,
  py: number,
): NetworkNode | null {
  let best: NetworkNode | null = null;
  let bestDist = Infinity;
  for (const node of nodes) {
    const [nx, ny] = project(node.x ?? 0, node.y ?? 0);
    const dist = Math.hypot(px - nx, py - ny);
    const reach = radiusFor(node.days_mentioned, maxDays) + 3;
    if (dist <= reach && dist < bestDist) {
      best = node;
      bestDist = dist;
    }
  }
  return best;
}
