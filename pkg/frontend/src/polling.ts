/** Fixed-interval polling for Running sessions; no websockets needed. */
import type { ApiClient } from './api.js';
import type { SessionRecord } from './types.js';

const TERMINAL = new Set(['Done', 'Failed']);

export interface PollOptions {
  intervalMs?: number;
  maxPolls?: number;
  onUpdate?: (record: SessionRecord) => void;
  /** Injectable for tests. */
  delay?: (ms: number) => Promise<void>;
}

const defaultDelay = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollSession(
  client: ApiClient,
  sessionId: string,
  options: PollOptions = {},
): Promise<SessionRecord> {
  const intervalMs = options.intervalMs ?? 2000;
  const maxPolls = options.maxPolls ?? 300;
  const delay = options.delay ?? defaultDelay;
  let record = await client.getSession(sessionId);
  options.onUpdate?.(record);
  let polls = 0;
  while (!TERMINAL.has(record.status)) {
    if (++polls > maxPolls) {
      throw new Error(`session ${sessionId} still ${record.status} after ${maxPolls} polls`);
    }
    await delay(intervalMs);
    record = await client.getSession(sessionId);
    options.onUpdate?.(record);
  }
  return record;
}
