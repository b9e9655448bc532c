import { ConsoleApiClient } from './api/client.js';
import type { HumanVerdict } from './api/types.js';
import { loadMetricsView } from './metrics.js';
import { QueueController } from './queue.js';
import { chartPointLine, statusBadgeLabel, toReviewItemView } from './render.js';
import { VerdictSubmitter } from './verdicts.js';

/** Minimal DOM wiring for the review console. All behavior lives in the
 * (unit-tested) controllers; this file only renders their snapshots.
 */
export function mountConsole(root: HTMLElement, baseUrl: string, reviewerId: string): void {
  const client = new ConsoleApiClient(baseUrl);
  const queue = new QueueController(client);
  const submitter = new VerdictSubmitter(client, queue, reviewerId);

  const list = document.createElement('ul');
  list.className = 'review-queue';
  const statusLine = document.createElement('p');
  const metricsPane = document.createElement('pre');
  metricsPane.className = 'metrics-chart';
  root.append(statusLine, list, metricsPane);

  function renderQueue(): void {
    const state = queue.snapshot();
    list.replaceChildren();
    if (state.kind === 'error') {
      statusLine.textContent = `Failed to load queue: ${state.error}`;
      const retry = document.createElement('button');
      retry.textContent = 'Retry';
      retry.onclick = () => void queue.retry().then(renderQueue);
      list.append(retry);
      return;
    }
    if (queue.isEmpty) {
      statusLine.textContent = 'No flagged items in the queue.';
      return;
    }
    statusLine.textContent = `${state.items.length} of ${state.total} flags loaded`;
    state.items.forEach((item, index) => {
      const view = toReviewItemView(item);
      const entry = document.createElement('li');
      if (index === state.selectedIndex) entry.classList.add('selected');
      entry.textContent =
        `${view.queryId} → ${view.resultId} ` +
        `[${statusBadgeLabel(view.statusBadge)}] ` +
        `sim=${view.similarity} gq=${view.gQuery} gr=${view.gResult} gm=${view.gMetadata}` +
        (view.aggregateV === null ? '' : ` v=${view.aggregateV}`);
      for (const verdict of ['HUMAN_TP', 'HUMAN_FP'] as HumanVerdict[]) {
        const button = document.createElement('button');
        button.textContent = verdict === 'HUMAN_TP' ? 'Violation' : 'Acceptable';
        button.onclick = () => {
          renderQueue(); // optimistic flip is visible immediately
          void submitter.submit(view.flagId, verdict).then((outcome) => {
            if (
              outcome.kind === 'conflict' &&
              window.confirm('Another verdict exists. Replace it?')
            ) {
              void submitter.supersede(view.flagId, verdict).then(renderQueue);
              return;
            }
            renderQueue();
          });
        };
        entry.append(button);
      }
      list.append(entry);
    });
    if (queue.hasMore) {
      const more = document.createElement('button');
      more.textContent = 'Load more';
      more.onclick = () => void queue.loadNextPage().then(renderQueue);
      list.append(more);
    }
  }

  root.addEventListener('keydown', (event) => {
    if (event.key === 'j' || event.key === 'ArrowDown') queue.selectNext();
    else if (event.key === 'k' || event.key === 'ArrowUp') queue.selectPrevious();
    else return;
    renderQueue();
  });

  void queue.loadFirstPage().then(renderQueue);
  void loadMetricsView(client).then((view) => {
    if (view.kind === 'empty') metricsPane.textContent = 'No weekly metrics yet.';
    else if (view.kind === 'error') metricsPane.textContent = `Metrics unavailable: ${view.message}`;
    else metricsPane.textContent = view.points.map(chartPointLine).join('\n');
  });
}
