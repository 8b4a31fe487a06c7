/** DOM rendering: ranked list, graph detail sketch, threshold control.
 *
 * Render functions are pure DOM producers over store state; they show
 * server numbers verbatim (no client-side scoring).
 */

import type { StoreState } from "./store.js";
import type { GraphDetail, Label } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface RankingHandlers {
  onSelect: (graphId: string) => void;
  onLabel: (graphId: string, label: Label) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function marker(row: HTMLElement, className: string, text: string, title: string): void {
  const chip = el("span", `marker ${className}`, text);
  chip.title = title;
  row.appendChild(chip);
}

export function renderRanking(
  container: HTMLElement,
  state: StoreState,
  handlers: RankingHandlers,
): void {
  container.replaceChildren();
  container.dataset.revision = String(state.revision);

  if (state.lastError) {
    const alert = el("div", "error-banner", `Labeling failed: ${state.lastError}`);
    alert.setAttribute("role", "alert");
    container.appendChild(alert);
  }

  if (state.status === "untrained") {
    const empty = el("div", "empty-state");
    empty.appendChild(el("h2", undefined, "No ranking yet"));
    empty.appendChild(el(
      "p", undefined,
      "Label a first positive example to seed the reference pattern; " +
      "the corpus will be ranked after every label you provide."));
    container.appendChild(empty);
    return;
  }

  const list = el("ol", "ranking");
  for (const record of state.records) {
    const row = el("li", "ranking-row");
    row.dataset.graphId = record.graph_id;

    const idButton = el("button", "graph-id", record.graph_id);
    idButton.addEventListener("click", () => handlers.onSelect(record.graph_id));
    row.appendChild(idButton);

    const bar = el("div", "posterior-bar");
    const fill = el("div", "posterior-fill");
    fill.style.width = `${(record.posterior * 100).toFixed(2)}%`;
    bar.appendChild(fill);
    bar.title = `L+ ${record.likelihood_pos.toFixed(4)} / L- ${record.likelihood_neg.toFixed(4)}`;
    row.appendChild(bar);

    row.appendChild(el("span", "posterior-value", record.posterior.toFixed(4)));

    if (record.labeled) {
      marker(row, "badge", "labeled", "posterior above the threshold");
    }
    if (state.positiveReference === record.graph_id) {
      marker(row, "reference positive", "ref+", "positive reference pattern");
    }
    if (state.negativeReference === record.graph_id) {
      marker(row, "reference negative", "ref-", "negative reference pattern");
    }
    if (state.positiveExamples.includes(record.graph_id)) {
      marker(row, "example positive", "+", "your positive example");
    }
    if (state.negativeExamples.includes(record.graph_id)) {
      marker(row, "example negative", "−", "your negative example");
    }
    if (state.pending?.graphId === record.graph_id) {
      marker(row, "pending", "…", `sending ${state.pending.label} label`);
    }

    const actions = el("span", "actions");
    const positive = el("button", "label positive", "+");
    positive.title = "label as positive example";
    positive.addEventListener("click", () => handlers.onLabel(record.graph_id, "positive"));
    const negative = el("button", "label negative", "−");
    negative.title = "label as negative example";
    negative.addEventListener("click", () => handlers.onLabel(record.graph_id, "negative"));
    actions.append(positive, negative);
    row.appendChild(actions);

    list.appendChild(row);
  }
  container.appendChild(list);
}

/** Visible rows in display order; used by tests and protocol checks. */
export function displayedOrder(container: HTMLElement): string[] {
  return Array.from(container.querySelectorAll<HTMLElement>(".ranking-row"))
    .map((row) => row.dataset.graphId ?? "");
}

export function displayedBadgeCount(container: HTMLElement): number {
  return container.querySelectorAll(".marker.badge").length;
}

export function renderThresholdControl(
  container: HTMLElement,
  threshold: number,
  labeledCount: number,
  onChange: (value: number) => void,
): void {
  container.replaceChildren();
  const label = el("label", "threshold-label",
                   `false-alarm threshold ${threshold.toFixed(2)}`);
  const slider = el("input", "threshold-slider");
  slider.type = "range";
  slider.min = "0";
  slider.max = "1";
  slider.step = "0.01";
  slider.value = String(threshold);
  slider.addEventListener("change", () => onChange(Number(slider.value)));
  const count = el("span", "labeled-count", `${labeledCount} labeled`);
  container.append(label, slider, count);
}

function layerPositions(detail: GraphDetail): Map<string, { x: number; y: number }> {
  const byLayer = new Map<number, string[]>();
  for (const vertex of detail.vertices) {
    const bucket = byLayer.get(vertex.time_index) ?? [];
    bucket.push(vertex.id);
    byLayer.set(vertex.time_index, bucket);
  }
  const positions = new Map<string, { x: number; y: number }>();
  for (const [layer, ids] of byLayer) {
    ids.forEach((id, i) => {
      positions.set(id, { x: 70 + layer * 120, y: 40 + i * 70 });
    });
  }
  return positions;
}

/** Time-layered node-link sketch plus per-vertex/edge attribute tables. */
export function renderGraphDetail(container: HTMLElement, detail: GraphDetail): void {
  container.replaceChildren();
  container.appendChild(el("h2", undefined, detail.id));

  const layers = 1 + Math.max(...detail.vertices.map((v) => v.time_index));
  const maxPerLayer = Math.max(
    ...Array.from({ length: layers },
                  (_, t) => detail.vertices.filter((v) => v.time_index === t).length));
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "graph-sketch");
  svg.setAttribute("width", String(70 + layers * 120));
  svg.setAttribute("height", String(40 + maxPerLayer * 70 + 20));
  const positions = layerPositions(detail);

  for (const edge of detail.edges) {
    const from = positions.get(edge.from);
    const to = positions.get(edge.to);
    if (!from || !to) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(from.x));
    line.setAttribute("y1", String(from.y));
    line.setAttribute("x2", String(to.x));
    line.setAttribute("y2", String(to.y));
    line.setAttribute("class", "sketch-edge");
    const tip = document.createElementNS(SVG_NS, "title");
    tip.textContent =
      `delay ${edge.time_delay.toFixed(3)}, flow ${edge.pixel_flow.toFixed(3)}, ` +
      `evolution ${edge.gaussian_evolution.toFixed(3)}, ` +
      `mutual info ${edge.mutual_information.toFixed(3)}`;
    line.appendChild(tip);
    svg.appendChild(line);
  }
  for (const vertex of detail.vertices) {
    const at = positions.get(vertex.id);
    if (!at) continue;
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(at.x));
    circle.setAttribute("cy", String(at.y));
    circle.setAttribute("r", "14");
    circle.setAttribute("class", "sketch-vertex");
    const tip = document.createElementNS(SVG_NS, "title");
    tip.textContent =
      `${vertex.id}: weight ${vertex.pixel_weight.toFixed(3)}, ` +
      `divergence ${vertex.divergence.toFixed(3)}`;
    circle.appendChild(tip);
    svg.appendChild(circle);
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(at.x));
    text.setAttribute("y", String(at.y + 30));
    text.setAttribute("class", "sketch-label");
    text.textContent = vertex.id;
    svg.appendChild(text);
  }
  container.appendChild(svg);

  const vertexTable = el("table", "attributes");
  vertexTable.innerHTML =
    "<thead><tr><th>vertex</th><th>layer</th><th>weight</th>" +
    "<th>mean</th><th>divergence</th></tr></thead>";
  const vertexBody = document.createElement("tbody");
  for (const vertex of detail.vertices) {
    const row = document.createElement("tr");
    row.innerHTML =
      `<td>${vertex.id}</td><td>${vertex.time_index}</td>` +
      `<td>${vertex.pixel_weight.toFixed(4)}</td>` +
      `<td>[${vertex.mean.map((x) => x.toFixed(3)).join(", ")}]</td>` +
      `<td>${vertex.divergence.toFixed(4)}</td>`;
    vertexBody.appendChild(row);
  }
  vertexTable.appendChild(vertexBody);
  container.appendChild(vertexTable);

  if (detail.edges.length > 0) {
    const edgeTable = el("table", "attributes");
    edgeTable.innerHTML =
      "<thead><tr><th>edge</th><th>delay</th><th>flow</th>" +
      "<th>evolution</th><th>mutual info</th></tr></thead>";
    const edgeBody = document.createElement("tbody");
    for (const edge of detail.edges) {
      const row = document.createElement("tr");
      row.innerHTML =
        `<td>${edge.from} → ${edge.to}</td>` +
        `<td>${edge.time_delay.toFixed(4)}</td>` +
        `<td>${edge.pixel_flow.toFixed(4)}</td>` +
        `<td>${edge.gaussian_evolution.toFixed(4)}</td>` +
        `<td>${edge.mutual_information.toFixed(4)}</td>`;
      edgeBody.appendChild(row);
    }
    edgeTable.appendChild(edgeBody);
    container.appendChild(edgeTable);
  }
}
