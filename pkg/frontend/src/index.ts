export { ApiError, ConsoleApiClient } from './api/client.js';
export type * from './api/types.js';
export { mountConsole } from './app.js';
export { buildMetricsView, loadMetricsView } from './metrics.js';
export type { ChartPoint, MetricsView } from './metrics.js';
export { QueueController, describeQueueError } from './queue.js';
export type { QueueState } from './queue.js';
export { chartPointLine, statusBadgeLabel, toReviewItemView } from './render.js';
export type { ReviewItemView } from './render.js';
export { VerdictSubmitter } from './verdicts.js';
export type { SubmitOutcome } from './verdicts.js';
