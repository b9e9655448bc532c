import type { FlagStatus, QueueItem, ReportView } from './api/types.js';
import type { ChartPoint } from './metrics.js';

/** Pure rendering helpers: API values pass through unchanged so the
 * on-screen numbers are snapshot-testable against the raw payload.
 */

export interface TaskRow {
  task: string;
  score: number;
  weight: number;
}

export interface ReviewItemView {
  flagId: string;
  queryId: string;
  resultId: string;
  epoch: number;
  statusBadge: FlagStatus;
  similarity: number;
  gQuery: number;
  gResult: number;
  gMetadata: number;
  matchedLexicons: { surface: string; lexicons: string[] }[];
  tasks: TaskRow[];
  aggregateV: number | null;
  rationale: string | null;
}

function taskRows(report: ReportView): TaskRow[] {
  return Object.keys(report.task_scores)
    .sort()
    .map((task) => ({
      task,
      score: report.task_scores[task]!,
      weight: report.weights[task] ?? 0,
    }));
}

export function toReviewItemView(item: QueueItem): ReviewItemView {
  return {
    flagId: item.flag.flag_id,
    queryId: item.flag.query_id,
    resultId: item.flag.result_id,
    epoch: item.flag.epoch,
    statusBadge: item.flag.status,
    similarity: item.flag.scores.similarity,
    gQuery: item.flag.scores.g_query,
    gResult: item.flag.scores.g_result,
    gMetadata: item.flag.scores.g_metadata,
    matchedLexicons: Object.entries(item.flag.matched_lexicons)
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([surface, lexicons]) => ({ surface, lexicons: [...lexicons] })),
    tasks: item.report === null ? [] : taskRows(item.report),
    aggregateV: item.report === null ? null : item.report.aggregate_v,
    rationale: item.report?.rationale ?? null,
  };
}

export function statusBadgeLabel(status: FlagStatus): string {
  switch (status) {
    case 'PENDING':
      return 'Pending';
    case 'VALIDATED_TP':
      return 'Auto: violation';
    case 'VALIDATED_FP':
      return 'Auto: acceptable';
    case 'HUMAN_TP':
      return 'Reviewed: violation';
    case 'HUMAN_FP':
      return 'Reviewed: acceptable';
  }
}

/** One CSV-ish text line per chart point, values emitted verbatim. */
export function chartPointLine(point: ChartPoint): string {
  return [
    `week ${point.week}`,
    `precision ${point.precision}`,
    `f1 ${point.f1}`,
    `tp ${point.tp}`,
    `fp ${point.fp}`,
    `anomalies ${point.anomalies}`,
  ].join(' | ');
}
