import { ApiError, type ConsoleApiClient } from './api/client.js';
import type { FlagStatus, HumanVerdict } from './api/types.js';
import type { QueueController } from './queue.js';

export type SubmitOutcome =
  | { kind: 'confirmed'; status: FlagStatus }
  | { kind: 'conflict'; currentStatus: FlagStatus | null }
  | { kind: 'rolled-back'; message: string }
  | { kind: 'duplicate' };

/** Optimistic verdict submission against the review queue.
 *
 * The queue item's badge flips immediately; on failure the previous
 * status is restored. Repeat submissions for a flag that is already
 * in flight are dropped (double-click debounce), and a 409 from the
 * service surfaces as a conflict for the superseding-verdict flow.
 */
export class VerdictSubmitter {
  private readonly inFlight = new Set<string>();

  constructor(
    private readonly client: ConsoleApiClient,
    private readonly queue: QueueController,
    private readonly reviewerId: string,
  ) {}

  async submit(
    flagId: string,
    verdict: HumanVerdict,
    options: { supersede?: boolean } = {},
  ): Promise<SubmitOutcome> {
    if (this.inFlight.has(flagId)) return { kind: 'duplicate' };
    const item = this.queue.getItem(flagId);
    if (item === null) return { kind: 'rolled-back', message: `flag ${flagId} is not loaded` };
    const previous = item.flag.status;
    this.inFlight.add(flagId);
    this.queue.setStatus(flagId, verdict); // optimistic flip
    try {
      const resp = await this.client.submitVerdict(flagId, {
        verdict,
        reviewer_id: this.reviewerId,
        supersede: options.supersede ?? false,
      });
      this.queue.setStatus(flagId, resp.flag.status);
      this.queue.applyStatusFilter();
      return { kind: 'confirmed', status: resp.flag.status };
    } catch (err) {
      this.queue.setStatus(flagId, previous); // rollback
      if (err instanceof ApiError && err.status === 409) {
        const current = err.details['current_status'];
        return {
          kind: 'conflict',
          currentStatus: typeof current === 'string' ? (current as FlagStatus) : null,
        };
      }
      const message = err instanceof Error ? err.message : String(err);
      return { kind: 'rolled-back', message };
    } finally {
      this.inFlight.delete(flagId);
    }
  }

  /** Conflict-dialog confirmation: replace the existing human verdict. */
  supersede(flagId: string, verdict: HumanVerdict): Promise<SubmitOutcome> {
    return this.submit(flagId, verdict, { supersede: true });
  }
}
