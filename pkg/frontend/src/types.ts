/** Payload shapes of the backend JSON API. The UI renders these verbatim:
 * every number or score on screen is traceable to one of these fields. */

export interface Precedent {
  case_id: number;
  name: string;
  session_time: string;
  reason: string;
  specifics: string;
}

export interface Candidate {
  article: number;
  article_number: string;
  cumulative_score: number;
  per_key_scores: number[];
  body: string;
  precedents: Precedent[];
}

export interface Retrieval {
  candidates: Candidate[];
  num_candidates: number;
  num_keys: number;
}

export interface KeysUsed {
  phrases: string[];
  resolved: number[];
  k_limit: number;
}

export interface Recommendation {
  articles: string[];
  grounded: Record<string, boolean>;
  rationale: string;
  retrieval: Retrieval | null;
  keys: KeysUsed | null;
  session_id: string | null;
  no_match: boolean;
  fully_grounded: boolean;
}

export interface GraphStats {
  nodes: Record<string, number>;
  edges: Record<string, number>;
}

export interface FeedbackReport {
  case_id: number;
  nodes_created: Record<string, number>;
  edges_created: Record<string, number>;
  embeddings_stale: boolean;
  graph_stats: GraphStats;
}

export interface ArticleInfo {
  number: string;
  body: string;
  keys: string[];
  precedent_count: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  request_id: string;
}

export interface FeedbackBody {
  case_text: string;
  case_name: string;
  session_date: string;
  prosecution_reason: string;
  confirmed_articles: string[];
  corrected_from?: string[];
}
