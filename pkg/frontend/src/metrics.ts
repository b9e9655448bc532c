import { ApiError, type ConsoleApiClient } from './api/client.js';
import type { MetricsResponse, WeeklyPoint } from './api/types.js';

export interface ChartPoint {
  week: number;
  precision: number;
  f1: number;
  tp: number;
  fp: number;
  anomalies: number;
}

export type MetricsView =
  | { kind: 'empty' }
  | { kind: 'chart'; points: ChartPoint[] }
  | { kind: 'error'; status: number; message: string };

/** Map the service payload to chart points verbatim — no client-side
 * aggregation or rounding; rendered values must equal API values.
 */
export function buildMetricsView(response: MetricsResponse): MetricsView {
  if (response.weeks.length === 0) return { kind: 'empty' };
  return {
    kind: 'chart',
    points: response.weeks.map((week: WeeklyPoint) => ({
      week: week.week,
      precision: week.precision,
      f1: week.f1,
      tp: week.tp,
      fp: week.fp,
      anomalies: week.anomalies,
    })),
  };
}

export async function loadMetricsView(client: ConsoleApiClient): Promise<MetricsView> {
  try {
    return buildMetricsView(await client.getWeeklyMetrics());
  } catch (err) {
    if (err instanceof ApiError) {
      return { kind: 'error', status: err.status, message: err.message };
    }
    throw err;
  }
}
