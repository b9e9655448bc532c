import type {
  FlagStatus,
  HealthResponse,
  LexiconsResponse,
  MetricsResponse,
  QueueFilters,
  QueuePage,
  VerdictRequest,
  VerdictResponse,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ClientOptions {
  /** Injectable for tests; defaults to the global fetch. */
  fetch?: FetchLike;
  /** Optional static token forwarded as x-modguard-token. */
  token?: string;
}

/** Error raised for any non-2xx response, carrying the service's envelope. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly details: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

function buildQuery(params: Record<string, string | number | undefined>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined) search.set(key, String(value));
  }
  const encoded = search.toString();
  return encoded ? `?${encoded}` : '';
}

export class ConsoleApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly baseUrl: string,
    private readonly options: ClientOptions = {},
  ) {
    this.fetchImpl = options.fetch ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { accept: 'application/json' };
    if (body !== undefined) headers['content-type'] = 'application/json';
    if (this.options.token) headers['x-modguard-token'] = this.options.token;
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let code = 'http_error';
      let message = `${method} ${path} failed with ${resp.status}`;
      let details: Record<string, unknown> = {};
      try {
        const envelope = (await resp.json()) as Partial<{
          code: string;
          message: string;
          details: Record<string, unknown>;
        }>;
        if (envelope.code) code = envelope.code;
        if (envelope.message) message = envelope.message;
        if (envelope.details) details = envelope.details;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(resp.status, code, message, details);
    }
    return (await resp.json()) as T;
  }

  getQueue(
    filters: QueueFilters = {},
    page: { limit?: number; cursor?: string } = {},
  ): Promise<QueuePage> {
    const query = buildQuery({
      epoch: filters.epoch,
      status: filters.status,
      limit: page.limit,
      cursor: page.cursor,
    });
    return this.request<QueuePage>('GET', `/v1/review/queue${query}`);
  }

  submitVerdict(flagId: string, body: VerdictRequest): Promise<VerdictResponse> {
    return this.request<VerdictResponse>(
      'POST',
      `/v1/review/${encodeURIComponent(flagId)}/verdict`,
      body,
    );
  }

  getLexicons(sort: 'score' | 'lexicon_id' = 'score'): Promise<LexiconsResponse> {
    return this.request<LexiconsResponse>('GET', `/v1/lexicons${buildQuery({ sort })}`);
  }

  getWeeklyMetrics(): Promise<MetricsResponse> {
    return this.request<MetricsResponse>('GET', '/v1/metrics/weekly');
  }

  getHealth(): Promise<HealthResponse> {
    return this.request<HealthResponse>('GET', '/v1/health');
  }
}

export type { FlagStatus };
