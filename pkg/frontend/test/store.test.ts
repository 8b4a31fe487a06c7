import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { SessionStore, badgeCount } from "../src/store.js";
import { FakeServer } from "./fake_server.js";

const GRAPH_IDS = ["g-a", "g-b", "g-c", "g-d", "g-e"];

function makeStore(server: FakeServer): SessionStore {
  const api = new ApiClient("http://fake", server.fetch);
  return new SessionStore(api, "session-1", "corpus-1", 10);
}

describe("SessionStore labeling", () => {
  let server: FakeServer;
  let store: SessionStore;

  beforeEach(() => {
    server = new FakeServer({ graphIds: GRAPH_IDS });
    store = makeStore(server);
  });

  it("adopts server state on refresh", async () => {
    await store.refresh();
    expect(store.getState().status).toBe("untrained");
    expect(store.getState().revision).toBe(0);
  });

  it("one label produces exactly one revision increment", async () => {
    await store.refresh();
    await store.label("g-a", "positive");
    const state = store.getState();
    expect(state.revision).toBe(1);
    expect(state.positiveReference).toBe("g-a");
    expect(state.status).toBe("ready");
    expect(server.feedbackAttempts).toBe(1);
    expect(server.conflictsServed).toBe(0);
  });

  it("serializes rapid labels so neither conflicts", async () => {
    await store.refresh();
    // fire both without awaiting in between (double-click style)
    const first = store.label("g-a", "positive");
    const second = store.label("g-b", "negative");
    await Promise.all([first, second]);
    expect(store.getState().revision).toBe(2);
    expect(server.conflictsServed).toBe(0);
    expect(server.positiveExamples).toEqual(["g-a"]);
    expect(server.negativeExamples).toEqual(["g-b"]);
  });

  it("shows an optimistic pending marker while the label is in flight", async () => {
    await store.refresh();
    const seen: Array<string | null> = [];
    store.subscribe((state) => seen.push(state.pending?.graphId ?? null));
    await store.label("g-a", "positive");
    expect(seen).toContain("g-a");     // optimistic phase
    expect(seen[seen.length - 1]).toBeNull(); // cleared on confirm
  });

  it("recovers from a stale revision with one refetch-and-replay", async () => {
    await store.refresh();
    server.externalMutation(); // a competing writer bumped the revision
    await store.label("g-a", "positive");
    const state = store.getState();
    expect(server.conflictsServed).toBe(1);
    expect(server.feedbackAttempts).toBe(2);
    expect(state.positiveExamples).toEqual(["g-a"]);
    expect(state.lastError).toBeNull();
  });

  it("surfaces a conflict that survives the retry, losing nothing silently", async () => {
    server = new FakeServer({ graphIds: GRAPH_IDS, alwaysConflict: true });
    store = makeStore(server);
    await store.refresh();
    await expect(store.label("g-a", "positive")).rejects.toThrow(ApiError);
    const state = store.getState();
    expect(state.lastError).not.toBeNull();
    expect(state.pending).toBeNull();
    expect(server.feedbackAttempts).toBe(2); // original + exactly one retry
  });

  it("never lets the displayed revision decrease", async () => {
    await store.refresh();
    await store.label("g-a", "positive");
    const after = store.getState().revision;
    // a stale summary (as if from a long-delayed response) is ignored
    const stale = server.summary(10);
    stale.revision = after - 1;
    (store as unknown as {
      commitSummary(summary: typeof stale): void;
    }).commitSummary(stale);
    expect(store.getState().revision).toBe(after);
  });
});

describe("SessionStore threshold", () => {
  it("recuts badges server-side and refreshes records", async () => {
    const server = new FakeServer({ graphIds: GRAPH_IDS });
    const store = makeStore(server);
    await store.refresh();
    await store.label("g-a", "positive");
    await store.label("g-b", "negative");

    await store.setThreshold(0.0);
    const everything = badgeCount(store.getState().records);
    expect(everything).toBe(GRAPH_IDS.length);

    await store.setThreshold(1.0);
    expect(badgeCount(store.getState().records)).toBe(0);
    expect(store.getState().threshold).toBe(1.0);
  });

  it("moving 0 to 1 monotonically non-increases the badge count", async () => {
    const server = new FakeServer({ graphIds: GRAPH_IDS });
    const store = makeStore(server);
    await store.refresh();
    await store.label("g-a", "positive");
    await store.label("g-b", "negative");

    let previous = Number.POSITIVE_INFINITY;
    for (const threshold of [0, 0.2, 0.4, 0.6, 0.8, 1]) {
      await store.setThreshold(threshold);
      const count = badgeCount(store.getState().records);
      expect(count).toBeLessThanOrEqual(previous);
      previous = count;
    }
  });

  it("retries a threshold conflict after refetching", async () => {
    const server = new FakeServer({ graphIds: GRAPH_IDS });
    const store = makeStore(server);
    await store.refresh();
    await store.label("g-a", "positive");
    server.externalMutation();
    await store.setThreshold(0.3);
    expect(store.getState().threshold).toBe(0.3);
    expect(server.conflictsServed).toBe(1);
  });
});
