import type { ApiError, ConsoleApiClient } from './api/client.js';
import type { FlagStatus, QueueFilters, QueueItem } from './api/types.js';

export type QueueStateKind = 'idle' | 'loading' | 'ready' | 'error';

export interface QueueState {
  kind: QueueStateKind;
  items: QueueItem[];
  total: number;
  nextCursor: string | null;
  selectedIndex: number;
  error: string | null;
}

/** Review-queue screen state: pagination, filters, keyboard selection.
 *
 * Ordering always matches the API response; the controller only appends
 * pages and never re-sorts.
 */
export class QueueController {
  private state: QueueState = {
    kind: 'idle',
    items: [],
    total: 0,
    nextCursor: null,
    selectedIndex: -1,
    error: null,
  };

  constructor(
    private readonly client: ConsoleApiClient,
    private filters: QueueFilters = {},
    private readonly pageSize = 50,
  ) {}

  snapshot(): QueueState {
    return { ...this.state, items: [...this.state.items] };
  }

  get isEmpty(): boolean {
    return this.state.kind === 'ready' && this.state.items.length === 0;
  }

  get hasMore(): boolean {
    return this.state.nextCursor !== null;
  }

  async loadFirstPage(filters?: QueueFilters): Promise<QueueState> {
    if (filters !== undefined) this.filters = filters;
    this.state = { ...this.state, kind: 'loading', items: [], nextCursor: null, error: null };
    return this.fetchPage(undefined);
  }

  async loadNextPage(): Promise<QueueState> {
    if (this.state.nextCursor === null) return this.snapshot();
    return this.fetchPage(this.state.nextCursor);
  }

  /** Convenience for tests and exports: page until the queue is drained. */
  async loadAll(filters?: QueueFilters): Promise<QueueItem[]> {
    await this.loadFirstPage(filters);
    while (this.hasMore) await this.loadNextPage();
    return this.snapshot().items;
  }

  private async fetchPage(cursor: string | undefined): Promise<QueueState> {
    try {
      const page = await this.client.getQueue(this.filters, {
        limit: this.pageSize,
        cursor,
      });
      const items = [...this.state.items, ...page.items];
      this.state = {
        kind: 'ready',
        items,
        total: page.total,
        nextCursor: page.next_cursor,
        selectedIndex: items.length === 0 ? -1 : Math.max(this.state.selectedIndex, 0),
        error: null,
      };
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      this.state = { ...this.state, kind: 'error', error: message };
    }
    return this.snapshot();
  }

  /** Retry the failed request (first page if nothing loaded yet). */
  async retry(): Promise<QueueState> {
    if (this.state.items.length === 0) return this.loadFirstPage();
    return this.loadNextPage();
  }

  selected(): QueueItem | null {
    return this.state.items[this.state.selectedIndex] ?? null;
  }

  selectNext(): QueueItem | null {
    if (this.state.items.length === 0) return null;
    const index = Math.min(this.state.selectedIndex + 1, this.state.items.length - 1);
    this.state = { ...this.state, selectedIndex: index };
    return this.selected();
  }

  selectPrevious(): QueueItem | null {
    if (this.state.items.length === 0) return null;
    const index = Math.max(this.state.selectedIndex - 1, 0);
    this.state = { ...this.state, selectedIndex: index };
    return this.selected();
  }

  /** Apply a server-confirmed or optimistic status to a loaded item. */
  setStatus(flagId: string, status: FlagStatus): boolean {
    const index = this.state.items.findIndex((item) => item.flag.flag_id === flagId);
    if (index < 0) return false;
    const items = [...this.state.items];
    const current = items[index]!;
    items[index] = { ...current, flag: { ...current.flag, status } };
    this.state = { ...this.state, items };
    return true;
  }

  getItem(flagId: string): QueueItem | null {
    return this.state.items.find((item) => item.flag.flag_id === flagId) ?? null;
  }

  /** Drop items no longer matching the active status filter (post-verdict). */
  applyStatusFilter(): void {
    if (this.filters.status === undefined) return;
    const status = this.filters.status;
    const items = this.state.items.filter((item) => item.flag.status === status);
    const removed = this.state.items.length - items.length;
    this.state = {
      ...this.state,
      items,
      total: Math.max(this.state.total - removed, 0),
      selectedIndex: Math.min(this.state.selectedIndex, items.length - 1),
    };
  }
}

export function describeQueueError(error: ApiError): string {
  if (error.status === 404) return error.message;
  if (error.code === 'bad_cursor') return 'Pagination cursor expired; reload the queue.';
  return `Service error (${error.status}): ${error.message}`;
}
