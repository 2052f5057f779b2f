/** HTML string builders. No DOM access here: every function maps data to
 * markup so tests can run without a browser.
 */

import type {
  ContextItem,
  ContextsResponse,
  ProvenanceRecord,
  QueueItem,
  StatsResponse,
} from "./api.js";
import { escapeHtml, highlightHtml } from "./model.js";

function titleCase(form: string): string {
  return form.replace(/\b\p{L}/gu, (ch) => ch.toUpperCase());
}

function snippetBlock(
  text: string,
  span: [number, number],
  where: string,
): string {
  return (
    `<figure class="snippet"><blockquote>${highlightHtml(text, span)}</blockquote>` +
    `<figcaption>${escapeHtml(where)}</figcaption></figure>`
  );
}

export function renderQueueCard(item: QueueItem): string {
  const form = escapeHtml(item.form);
  const count = item.count === 1 ? "1 mention" : `${item.count} mentions`;
  const snippets = item.snippets
    .map((s) => snippetBlock(s.text, s.match_span, `${s.volume_id}, ${s.date}`))
    .join("");
  const options = item.candidates
    .map((c) => `<option value="${escapeHtml(c)}"></option>`)
    .join("");
  const datalistId = `cand-${encodeURIComponent(item.form)}`;
  return `<article class="card" data-form="${form}">
  <header>
    <strong>${form}</strong>
    <span class="badge">${count}</span>
    <span class="badge status">${escapeHtml(item.status)}</span>
  </header>
  <div class="snippets">${snippets}</div>
  <form class="decision" data-kind="map_to">
    <label>Action
      <select name="kind">
        <option value="map_to">Map to existing person</option>
        <option value="new_entity">New person</option>
        <option value="ignore">Ignore (not a person)</option>
        <option value="merge">Merge two persons</option>
      </select>
    </label>
    <div class="fields" data-for="map_to">
      <label>Person id
        <input name="entity_id" list="${datalistId}" placeholder="e.g. eliza-webb">
        <datalist id="${datalistId}">${options}</datalist>
      </label>
    </div>
    <div class="fields" data-for="new_entity">
      <label>Display name
        <input name="display_name" value="${escapeHtml(titleCase(item.form))}">
      </label>
    </div>
    <div class="fields" data-for="merge">
      <label>Keep <input name="keep" placeholder="person id"></label>
      <label>Retire <input name="retire" placeholder="person id"></label>
    </div>
    <label>Rationale <span class="req">(required)</span>
      <textarea name="rationale" rows="2" placeholder="why this decision"></textarea>
    </label>
    <button type="submit">Apply decision</button>
  </form>
</article>`;
}

export function renderQueueEmpty(): string {
  return `<p class="empty">Queue is clear: every mention is resolved or ignored.</p>`;
}

export function renderContextItem(item: ContextItem, expanded: boolean): string {
  const body = expanded
    ? `<blockquote class="entry">${highlightHtml(item.entry, item.entry_span)}</blockquote>`
    : `<blockquote>${highlightHtml(item.snippet, item.match_span)}</blockquote>`;
  const hint = expanded ? "click to collapse" : "click for the full entry";
  return `<li class="context${expanded ? " expanded" : ""}" data-date="${escapeHtml(item.date)}" title="${hint}">
  <span class="where">${escapeHtml(item.volume)}, ${escapeHtml(item.date)}</span>
  ${body}
</li>`;
}

export function renderContextsPanel(
  resp: ContextsResponse,
  expandedIndex: number | null,
): string {
  const items = resp.items
    .map((item, i) => renderContextItem(item, i === expandedIndex))
    .join("\n");
  const shown =
    resp.items.length < resp.total
      ? ` (showing ${resp.items.length} of ${resp.total})`
      : "";
  return `<h2>${escapeHtml(resp.display_name)}</h2>
<p class="meta">${resp.total === 1 ? "1 context" : `${resp.total} contexts`}${shown}</p>
<ul class="contexts">${items}</ul>`;
}

export function renderProvenanceRow(rec: ProvenanceRecord): string {
  const why = rec.rationale ? ` — ${escapeHtml(rec.rationale)}` : "";
  return `<li><code>#${rec.seq}</code> <strong>${escapeHtml(rec.step)}</strong> by ${escapeHtml(rec.actor)}${why}</li>`;
}

export function renderStatsLine(stats: StatsResponse): string {
  if (!stats.defined) return "No corpus loaded yet.";
  const mean =
    stats.mean_persons_per_day === null
      ? "n/a"
      : stats.mean_persons_per_day.toFixed(2);
  return (
    `${stats.entries} entries over ${stats.span_days} days, ` +
    `${stats.total_persons} persons, ${mean} persons/day, ` +
    `${stats.queue_size} in queue`
  );
}
