import type { FetchLike } from '../src/api/client.js';
import type {
  FlagStatus,
  QueueItem,
  QueuePage,
  ReportView,
  WeeklyPoint,
} from '../src/api/types.js';

export function makeItem(flagId: string, status: FlagStatus = 'VALIDATED_TP'): QueueItem {
  const report: ReportView = {
    flag_id: flagId,
    task_scores: { age_estimation: 0.2, query_irrelevancy: 0.4 },
    weights: { age_estimation: 0.5, query_irrelevancy: 0.5 },
    aggregate_v: 0.3,
    source: 'MOCK',
    rationale: 'mock backend heuristic score',
  };
  return {
    flag: {
      flag_id: flagId,
      query_id: `q-${flagId}`,
      result_id: `r-${flagId}`,
      epoch: 0,
      scores: { similarity: 0.51, g_query: 0.1, g_result: 0.72, g_metadata: 0.64 },
      matched_lexicons: { RESULT: ['lex-1'], METADATA: ['lex-1', 'lex-2'] },
      status,
    },
    report,
  };
}

export const TABLE_WEEKS: WeeklyPoint[] = [
  { week: 1, anomalies: 2948, tp: 168, fp: 2780, precision: 0.057, f1: 0.108 },
  { week: 2, anomalies: 2361, tp: 170, fp: 2191, precision: 0.072, f1: 0.134 },
  { week: 3, anomalies: 2669, tp: 225, fp: 2444, precision: 0.084, f1: 0.155 },
  { week: 4, anomalies: 2403, tp: 210, fp: 2193, precision: 0.087, f1: 0.16 },
  { week: 5, anomalies: 2430, tp: 220, fp: 2210, precision: 0.091, f1: 0.166 },
  { week: 6, anomalies: 2493, tp: 241, fp: 2252, precision: 0.097, f1: 0.176 },
  { week: 7, anomalies: 2288, tp: 209, fp: 2079, precision: 0.091, f1: 0.167 },
  { week: 8, anomalies: 2510, tp: 371, fp: 2139, precision: 0.148, f1: 0.258 },
];

export interface RecordedRequest {
  method: string;
  url: string;
  body: unknown;
}

export type RouteHandler = (req: RecordedRequest) => { status: number; body: unknown };

/** Mock fetch that records requests and dispatches on `METHOD path`. */
export function mockFetch(routes: Record<string, RouteHandler>): {
  fetch: FetchLike;
  requests: RecordedRequest[];
} {
  const requests: RecordedRequest[] = [];
  const impl: FetchLike = async (input, init) => {
    const method = init?.method ?? 'GET';
    const url = new URL(input, 'http://test');
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    const req: RecordedRequest = { method, url: url.pathname + url.search, body };
    requests.push(req);
    const handler = routes[`${method} ${url.pathname}`];
    if (!handler) {
      return new Response(
        JSON.stringify({ code: 'not_found', message: `no route ${url.pathname}`, details: {} }),
        { status: 404, headers: { 'content-type': 'application/json' } },
      );
    }
    const { status, body: payload } = handler(req);
    return new Response(JSON.stringify(payload), {
      status,
      headers: { 'content-type': 'application/json' },
    });
  };
  return { fetch: impl, requests };
}

export function queuePage(
  items: QueueItem[],
  total: number,
  nextCursor: string | null,
): QueuePage {
  return { items, next_cursor: nextCursor, total };
}
