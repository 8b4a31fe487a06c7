/** Bootstrap: connect to the service, create a session, wire the panels. */

import { ApiClient } from "./api.js";
import { SessionStore, badgeCount } from "./store.js";
import {
  renderGraphDetail,
  renderRanking,
  renderThresholdControl,
} from "./view.js";

function requireElement(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function bootstrap(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? "";
  const api = new ApiClient(server);

  const corpusId = params.get("corpus");
  if (!corpusId) {
    requireElement("ranking").textContent =
      "Pass ?corpus=<id> (and optionally ?server=<url>) to start a session.";
    return;
  }

  const created = await api.createSession(corpusId);
  const store = new SessionStore(api, created.session_id, created.corpus_id);

  const rankingPanel = requireElement("ranking");
  const detailPanel = requireElement("detail");
  const thresholdPanel = requireElement("threshold");
  const statusLine = requireElement("status");

  const handlers = {
    onSelect: (graphId: string) => {
      api.getGraph(created.corpus_id, graphId)
        .then((detail) => renderGraphDetail(detailPanel, detail))
        .catch((error) => {
          detailPanel.textContent = `failed to load ${graphId}: ${error}`;
        });
    },
    onLabel: (graphId: string, label: "positive" | "negative") => {
      // store serializes and retries once on conflict; surfaced errors
      // land in state.lastError and render as a banner
      void store.label(graphId, label).catch(() => undefined);
    },
  };

  store.subscribe((state) => {
    renderRanking(rankingPanel, state, handlers);
    renderThresholdControl(
      thresholdPanel, state.threshold, badgeCount(state.records),
      (value) => void store.setThreshold(value).catch(() => undefined));
    statusLine.textContent =
      `session ${state.sessionId} | revision ${state.revision} | ${state.status}` +
      ` | ${state.total} patterns`;
  });

  await store.refresh();
}

bootstrap().catch((error) => {
  requireElement("status").textContent = `startup failed: ${error}`;
});
