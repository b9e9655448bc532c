/** Wire types mirroring the moderation service's JSON responses.
 *
 * The console never recomputes moderation values: every number shown on
 * screen comes straight from one of these payloads.
 */

export type FlagStatus =
  | 'PENDING'
  | 'VALIDATED_TP'
  | 'VALIDATED_FP'
  | 'HUMAN_TP'
  | 'HUMAN_FP';

export type HumanVerdict = 'HUMAN_TP' | 'HUMAN_FP';

export interface FlagScores {
  similarity: number;
  g_query: number;
  g_result: number;
  g_metadata: number;
}

export interface FlagView {
  flag_id: string;
  query_id: string;
  result_id: string;
  epoch: number;
  scores: FlagScores;
  /** surface name (QUERY/RESULT/METADATA) -> matched lexicon ids */
  matched_lexicons: Record<string, string[]>;
  status: FlagStatus;
}

export interface ReportView {
  flag_id: string;
  task_scores: Record<string, number>;
  weights: Record<string, number>;
  aggregate_v: number;
  source: string;
  rationale: string | null;
}

export interface QueueItem {
  flag: FlagView;
  report: ReportView | null;
}

export interface QueuePage {
  items: QueueItem[];
  next_cursor: string | null;
  total: number;
}

export interface QueueFilters {
  epoch?: number;
  status?: FlagStatus;
}

export interface VerdictRequest {
  verdict: HumanVerdict;
  reviewer_id: string;
  supersede?: boolean;
}

export interface VerdictResponse {
  flag: FlagView;
}

export interface LexiconRow {
  lexicon_id: string;
  term: string;
  category: string | null;
  f0: number;
  f_t: number;
  score: number;
  override: boolean;
}

export interface LexiconsResponse {
  epoch: number;
  lexicons: LexiconRow[];
}

export interface WeeklyPoint {
  week: number;
  anomalies: number;
  tp: number;
  fp: number;
  precision: number;
  f1: number;
}

export interface MetricsResponse {
  weeks: WeeklyPoint[];
}

export interface HealthResponse {
  status: string;
  latest_epoch: number | null;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
