/** Client session state: serialized mutations over server-owned numbers.
 *
 * Every posterior, likelihood, and label flag shown in the UI comes
 * from a server response; the store never derives them locally. The
 * displayed revision is monotone: a response older than the current
 * state is ignored. Mutations are chained on an internal queue so two
 * rapid labels cannot race each other's revision token.
 */

import { ApiClient, ApiError } from "./api.js";
import type { Label, RankingRecord, SessionSummary } from "./types.js";

export interface PendingLabel {
  graphId: string;
  label: Label;
}

export interface StoreState {
  sessionId: string;
  corpusId: string;
  revision: number;
  status: "ready" | "untrained";
  threshold: number;
  records: RankingRecord[];
  total: number;
  positiveReference: string | null;
  negativeReference: string | null;
  positiveExamples: string[];
  negativeExamples: string[];
  /** Optimistic marker for the in-flight label, if any. */
  pending: PendingLabel | null;
  /** Surfaced failure of the most recent mutation, if any. */
  lastError: string | null;
}

export type StoreListener = (state: StoreState) => void;

export class SessionStore {
  private state: StoreState;
  private queue: Promise<void> = Promise.resolve();
  private readonly listeners = new Set<StoreListener>();

  constructor(
    private readonly api: ApiClient,
    sessionId: string,
    corpusId: string,
    private readonly topK = 50,
  ) {
    this.state = {
      sessionId,
      corpusId,
      revision: 0,
      status: "untrained",
      threshold: 0.5,
      records: [],
      total: 0,
      positiveReference: null,
      negativeReference: null,
      positiveExamples: [],
      negativeExamples: [],
      pending: null,
      lastError: null,
    };
  }

  getState(): StoreState {
    return this.state;
  }

  subscribe(listener: StoreListener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(partial: Partial<StoreState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  /** Adopt a server summary unless it is older than what is shown. */
  private commitSummary(summary: SessionSummary, extra?: Partial<StoreState>): void {
    if (summary.revision < this.state.revision) {
      return;
    }
    this.emit({
      revision: summary.revision,
      status: summary.status,
      threshold: summary.threshold,
      records: summary.records,
      total: summary.total,
      positiveReference: summary.positive_reference,
      negativeReference: summary.negative_reference,
      positiveExamples: summary.positive_examples,
      negativeExamples: summary.negative_examples,
      ...extra,
    });
  }

  /** Serialize mutations; each step sees the committed revision. */
  private enqueue(step: () => Promise<void>): Promise<void> {
    const next = this.queue.then(step);
    // keep the chain alive after failures
    this.queue = next.catch(() => undefined);
    return next;
  }

  async refresh(): Promise<void> {
    const summary = await this.api.getRanking(this.state.sessionId, this.topK);
    this.commitSummary(summary);
  }

  /**
   * Label a pattern: optimistic marker first, then the server-confirmed
   * ranking. On a revision conflict the store refetches and replays
   * exactly once; a second conflict is surfaced, never silently lost.
   */
  label(graphId: string, label: Label): Promise<void> {
    return this.enqueue(async () => {
      this.emit({ pending: { graphId, label }, lastError: null });
      try {
        const summary = await this.api.submitFeedback(
          this.state.sessionId, graphId, label, this.state.revision);
        this.commitSummary(summary, { pending: null });
      } catch (error) {
        if (error instanceof ApiError && error.isConflict) {
          await this.refresh();
          try {
            const retried = await this.api.submitFeedback(
              this.state.sessionId, graphId, label, this.state.revision);
            this.commitSummary(retried, { pending: null });
          } catch (retryError) {
            this.emit({
              pending: null,
              lastError: retryError instanceof Error
                ? retryError.message
                : String(retryError),
            });
            throw retryError;
          }
          return;
        }
        this.emit({
          pending: null,
          lastError: error instanceof Error ? error.message : String(error),
        });
        throw error;
      }
    });
  }

  /** Move the labeling threshold; labels are recut server-side. */
  setThreshold(threshold: number): Promise<void> {
    return this.enqueue(async () => {
      this.emit({ lastError: null });
      const send = () => this.api.setThreshold(
        this.state.sessionId, threshold, this.state.revision);
      try {
        await send();
      } catch (error) {
        if (!(error instanceof ApiError && error.isConflict)) {
          this.emit({ lastError: error instanceof Error ? error.message : String(error) });
          throw error;
        }
        await this.refresh();
        await send();
      }
      // the threshold endpoint returns counts only; refetch the records
      // so badge flags stay server-provided
      const summary = await this.api.getRanking(this.state.sessionId, this.topK);
      this.commitSummary(summary);
    });
  }
}

/** Server-labeled badge count of the visible records. */
export function badgeCount(records: RankingRecord[]): number {
  return records.filter((record) => record.labeled).length;
}
