/** Wire types of the session service (all numbers are server-computed). */

export type Label = "positive" | "negative";

export interface RankingRecord {
  graph_id: string;
  likelihood_pos: number;
  likelihood_neg: number;
  posterior: number;
  labeled: boolean;
}

/** Shape shared by session creation, feedback, and ranking responses. */
export interface SessionSummary {
  revision: number;
  status: "ready" | "untrained";
  threshold: number;
  total: number;
  offset: number;
  records: RankingRecord[];
  positive_reference: string | null;
  negative_reference: string | null;
  positive_examples: string[];
  negative_examples: string[];
}

export interface SessionCreated extends SessionSummary {
  session_id: string;
  corpus_id: string;
  quantizer_r: number;
  beam_width: number;
}

export interface ThresholdResponse {
  revision: number;
  threshold: number;
  labeled_count: number;
  total: number;
}

export interface GraphVertex {
  id: string;
  time_index: number;
  pixel_weight: number;
  mean: number[];
  covariance: number[][];
  divergence: number;
}

export interface GraphEdge {
  from: string;
  to: string;
  time_delay: number;
  pixel_flow: number;
  gaussian_evolution: number;
  mutual_information: number;
}

export interface GraphDetail {
  id: string;
  vertices: GraphVertex[];
  edges: GraphEdge[];
  metadata: Record<string, unknown> | null;
}

export interface ApiErrorBody {
  error: string;
  message: string;
}
