// @vitest-environment jsdom
//
// Protocol conformance against the real service: a scripted session
// labels one positive and one negative pattern and the rendered list
// must equal the server's ranking with the revision up by exactly 2.
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, mkdirSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ApiClient } from "../src/api.js";
import { SessionStore, badgeCount } from "../src/store.js";
import { displayedBadgeCount, displayedOrder, renderRanking } from "../src/view.js";

const PORT = 8600 + (process.pid % 200);
const BASE = `http://127.0.0.1:${PORT}`;

const GENERATE_SPEC = {
  feature_dimension: 2,
  classes: [
    {
      class_label: "pos", count: 4, layers: 2, vertices_per_layer: [2, 2],
      centers: { pixel_weight: 0.5, gaussian_mean: 0.0, divergence: 1.0,
                 time_delay: 1.0, pixel_flow: 0.4, gaussian_evolution: 0.3,
                 mutual_information: 0.6 },
      within_class_spread: 0.05,
    },
    {
      class_label: "neg", count: 4, layers: 2, vertices_per_layer: [2, 2],
      centers: { pixel_weight: 1.5, gaussian_mean: 1.5, divergence: 2.5,
                 time_delay: 2.5, pixel_flow: 1.9, gaussian_evolution: 1.8,
                 mutual_information: 2.1 },
      within_class_spread: 0.05,
    },
  ],
};

let workDir: string;
let server: ChildProcess | null = null;

function run(command: string, args: string[]): Promise<void> {
  return new Promise((resolve, reject) => {
    const child = spawn(command, args, { stdio: "inherit" });
    child.on("exit", (code) =>
      code === 0 ? resolve() : reject(new Error(`${command} exited ${code}`)));
    child.on("error", reject);
  });
}

async function waitForServer(timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/openapi.json`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("service did not come up in time");
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "graphsem-ui-"));
  const corpusDir = join(workDir, "corpora");
  mkdirSync(corpusDir);
  const specPath = join(workDir, "spec.json");
  writeFileSync(specPath, JSON.stringify(GENERATE_SPEC));
  await run("python3", ["-m", "graphsem.cli", "generate", "--spec", specPath,
                        "--seed", "5", "--out", join(corpusDir, "demo.json")]);
  server = spawn("python3", ["-m", "graphsem.service", "--port", String(PORT),
                             "--corpus-dir", corpusDir],
                 { stdio: "ignore" });
  await waitForServer();
}, 60000);

afterAll(() => {
  server?.kill();
  rmSync(workDir, { recursive: true, force: true });
});

describe("live service conformance", () => {
  it("scripted 1+1 labeling matches GET ranking and bumps revision by 2", async () => {
    const api = new ApiClient(BASE);
    const created = await api.createSession("demo", { r: 100 });
    const store = new SessionStore(api, created.session_id, created.corpus_id, 50);
    await store.refresh();
    const initialRevision = store.getState().revision;
    expect(initialRevision).toBe(0);

    await store.label("pos-000", "positive");
    await store.label("neg-000", "negative");

    const container = document.createElement("div");
    document.body.replaceChildren(container);
    renderRanking(container, store.getState(), {
      onSelect: () => undefined, onLabel: () => undefined,
    });

    const serverView = await api.getRanking(created.session_id, 50);
    expect(displayedOrder(container))
      .toEqual(serverView.records.map((r) => r.graph_id));
    expect(store.getState().revision).toBe(initialRevision + 2);
    expect(serverView.revision).toBe(initialRevision + 2);
    expect(Number(container.dataset.revision)).toBe(initialRevision + 2);

    // positive class patterns should sit on top given the separation
    const top = displayedOrder(container).slice(0, 4);
    expect(top.every((id) => id.startsWith("pos-"))).toBe(true);
  });

  it("threshold sweep 0 to 1 never increases the rendered badge count", async () => {
    const api = new ApiClient(BASE);
    const created = await api.createSession("demo", { r: 100 });
    const store = new SessionStore(api, created.session_id, created.corpus_id, 50);
    await store.refresh();
    await store.label("pos-000", "positive");
    await store.label("neg-000", "negative");

    const container = document.createElement("div");
    let previous = Number.POSITIVE_INFINITY;
    for (const threshold of [0, 0.25, 0.5, 0.75, 1]) {
      await store.setThreshold(threshold);
      renderRanking(container, store.getState(), {
        onSelect: () => undefined, onLabel: () => undefined,
      });
      const rendered = displayedBadgeCount(container);
      expect(rendered).toBe(badgeCount(store.getState().records));
      expect(rendered).toBeLessThanOrEqual(previous);
      previous = rendered;
    }
    // boundary semantics: 0 labels everything, 1 only exact-1 posteriors
    await store.setThreshold(0);
    expect(badgeCount(store.getState().records))
      .toBe(store.getState().records.length);
    await store.setThreshold(1);
    for (const record of store.getState().records) {
      expect(record.labeled).toBe(record.posterior >= 1.0);
    }
  });

  it("graph detail endpoint feeds the sketch renderer", async () => {
    const api = new ApiClient(BASE);
    const created = await api.createSession("demo");
    const detail = await api.getGraph(created.corpus_id, "pos-000");
    expect(detail.id).toBe("pos-000");
    expect(detail.vertices.length).toBeGreaterThan(0);
    const { renderGraphDetail } = await import("../src/view.js");
    const container = document.createElement("div");
    renderGraphDetail(container, detail);
    expect(container.querySelectorAll("circle.sketch-vertex").length)
      .toBe(detail.vertices.length);
  });
});
