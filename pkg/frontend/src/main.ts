/** Browser entry point: wires the controller to the three panels.
 *
 * Layout positions come from the server; this file only projects them onto
 * the canvas. All markup is produced by render.ts builders.
 */

import { ApiError, type Decision, type NetworkResponse } from "./api.js";
import { CurationApp } from "./app.js";
import {
  colorFor,
  fitTransform,
  hitTest,
  radiusFor,
  type Project,
} from "./model.js";
import {
  renderContextsPanel,
  renderProvenanceRow,
  renderQueueCard,
  renderQueueEmpty,
  renderStatsLine,
} from "./render.js";

function must<T extends Element>(selector: string): T {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as T;
}

const app = new CurationApp();

const nameInput = must<HTMLInputElement>("#curator-name");
const statusLine = must<HTMLElement>("#status-line");
const statsLine = must<HTMLElement>("#stats-line");
const queueList = must<HTMLElement>("#queue-list");
const canvas = must<HTMLCanvasElement>("#network-canvas");
const slider = must<HTMLInputElement>("#scale-slider");
const sliderValue = must<HTMLElement>("#scale-value");
const caption = must<HTMLElement>("#network-caption");
const contextPanel = must<HTMLElement>("#context-panel");
const provenanceList = must<HTMLElement>("#provenance-list");

let projector: Project = (x, y) => [x, y];
let expandedContext: number | null = null;

function flash(message: string, isError: boolean): void {
  statusLine.textContent = message;
  statusLine.classList.toggle("error", isError);
  statusLine.classList.toggle("ok", !isError && message !== "");
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return err.body.detail
      ? `${err.body.message} (${err.body.detail})`
      : err.body.message;
  }
  return err instanceof Error ? err.message : String(err);
}

function drawNetwork(net: NetworkResponse): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  projector = fitTransform(net.nodes, { width, height, pad: 28 });
  const maxDays = Math.max(1, ...net.nodes.map((n) => n.days_mentioned));
  const at = new Map(net.nodes.map((n) => [n.id, n] as const));
  const maxWeight = Math.max(1, ...net.edges.map((e) => e.weight));

  for (const edge of net.edges) {
    const a = at.get(edge.source);
    const b = at.get(edge.target);
    if (!a || !b) continue;
    const [x1, y1] = projector(a.x ?? 0, a.y ?? 0);
    const [x2, y2] = projector(b.x ?? 0, b.y ?? 0);
    ctx.strokeStyle = "#30363d";
    ctx.globalAlpha = 0.25 + 0.55 * (edge.weight / maxWeight);
    ctx.lineWidth = 0.6 + 1.8 * (edge.weight / maxWeight);
    ctx.beginPath();
    ctx.moveTo(x1, y1);
    ctx.lineTo(x2, y2);
    ctx.stroke();
  }
  ctx.globalAlpha = 1;

  for (const node of net.nodes) {
    const [x, y] = projector(node.x ?? 0, node.y ?? 0);
    ctx.fillStyle = colorFor(node.community);
    ctx.beginPath();
    ctx.arc(x, y, radiusFor(node.days_mentioned, maxDays), 0, 2 * Math.PI);
    ctx.fill();
  }

  // Label the busiest dozen so the picture stays legible.
  const labeled = [...net.nodes]
    .sort((a, b) => b.days_mentioned - a.days_mentioned)
    .slice(0, 12);
  ctx.font = "11px system-ui, sans-serif";
  ctx.fillStyle = "#e6edf3";
  for (const node of labeled) {
    const [x, y] = projector(node.x ?? 0, node.y ?? 0);
    const r = radiusFor(node.days_mentioned, maxDays);
    ctx.fillText(node.display_name, x + r + 3, y + 3);
  }
}

function refreshNetworkPanel(): void {
  if (app.network) drawNetwork(app.network);
  caption.textContent = app.caption();
  sliderValue.textContent = `min ${app.slider} day${app.slider === 1 ? "" : "s"}`;
}

function refreshQueuePanel(): void {
  if (!app.queue) return;
  queueList.innerHTML = app.queue.items.length
    ? app.queue.items.map(renderQueueCard).join("\n")
    : renderQueueEmpty();
}

function refreshStatsPanel(): void {
  if (app.stats) statsLine.textContent = renderStatsLine(app.stats);
}

async function refreshProvenance(): Promise<void> {
  try {
    const resp = await app.api.getProvenance(0);
    const recent = resp.records.slice(-15).reverse();
    provenanceList.innerHTML = recent.map(renderProvenanceRow).join("\n");
  } catch (err) {
    provenanceList.innerHTML = `<li class="error">${describeError(err)}</li>`;
  }
}

function refreshContextsPanel(): void {
  if (!app.contexts) return;
  contextPanel.innerHTML = renderContextsPanel(app.contexts, expandedContext);
}

function decisionFrom(form: HTMLFormElement, surface: string): Decision {
  const field = (name: string): string => {
    const el = form.elements.namedItem(name);
    return el instanceof HTMLInputElement || el instanceof HTMLSelectElement
      ? el.value.trim()
      : "";
  };
  const kind = field("kind");
  switch (kind) {
    case "map_to": {
      const entityId = field("entity_id");
      if (!entityId) throw new Error("pick the person id to map this form to");
      return { kind: "map_to", form: surface, entity_id: entityId };
    }
    case "new_entity": {
      const displayName = field("display_name");
      if (!displayName) throw new Error("give the new person a display name");
      return { kind: "new_entity", display_name: displayName, aliases: [surface] };
    }
    case "ignore":
      return { kind: "ignore", form: surface };
    case "merge": {
      const keep = field("keep");
      const retire = field("retire");
      if (!keep || !retire) throw new Error("merge needs both person ids");
      return { kind: "merge", keep, retire };
    }
    default:
      throw new Error(`unknown action ${kind}`);
  }
}

queueList.addEventListener("change", (ev) => {
  const select = ev.target;
  if (select instanceof HTMLSelectElement && select.name === "kind") {
    select.closest("form")?.setAttribute("data-kind", select.value);
  }
});

queueList.addEventListener("submit", (ev) => {
  const form = ev.target;
  if (!(form instanceof HTMLFormElement)) return;
  ev.preventDefault();
  const card = form.closest<HTMLElement>(".card");
  const surface = card?.dataset["form"];
  if (!surface) return;
  const rationaleEl = form.elements.namedItem("rationale");
  const rationale =
    rationaleEl instanceof HTMLTextAreaElement ? rationaleEl.value : "";
  void (async () => {
    try {
      const decision = decisionFrom(form, surface);
      const res = await app.submitDecision(decision, rationale);
      flash(`Recorded decision #${res.provenance_seq} on "${surface}".`, false);
      refreshQueuePanel();
      refreshNetworkPanel();
      refreshStatsPanel();
      await refreshProvenance();
    } catch (err) {
      flash(describeError(err), true);
    }
  })();
});

nameInput.addEventListener("input", () => {
  app.actor = nameInput.value;
});

let sliderTimer: ReturnType<typeof setTimeout> | undefined;
slider.addEventListener("input", () => {
  const value = Number(slider.value);
  sliderValue.textContent = `min ${value} day${value === 1 ? "" : "s"}`;
  clearTimeout(sliderTimer);
  sliderTimer = setTimeout(() => {
    void app
      .setSlider(value)
      .then(() => refreshNetworkPanel())
      .catch((err) => flash(describeError(err), true));
  }, 150);
});

canvas.addEventListener("click", (ev) => {
  if (!app.network) return;
  const rect = canvas.getBoundingClientRect();
  const px = ((ev.clientX - rect.left) / rect.width) * canvas.width;
  const py = ((ev.clientY - rect.top) / rect.height) * canvas.height;
  const maxDays = Math.max(1, ...app.network.nodes.map((n) => n.days_mentioned));
  const node = hitTest(app.network.nodes, projector, maxDays, px, py);
  if (!node) return;
  void app
    .openContexts(node.id)
    .then(() => {
      expandedContext = null;
      refreshContextsPanel();
    })
    .catch((err) => flash(describeError(err), true));
});

contextPanel.addEventListener("click", (ev) => {
  const li = ev.target instanceof Element ? ev.target.closest("li.context") : null;
  if (!li || !li.parentElement) return;
  const index = Array.from(li.parentElement.children).indexOf(li);
  expandedContext = expandedContext === index ? null : index;
  refreshContextsPanel();
});

void (async () => {
  try {
    await app.init();
    refreshStatsPanel();
    refreshQueuePanel();
    refreshNetworkPanel();
    slider.value = String(app.slider);
    await refreshProvenance();
    flash("", false);
  } catch (err) {
    flash(describeError(err), true);
  }
})();
