// Async polling loop for the state-delta endpoint. One in-flight request at
// a time; the cursor only advances, so the consumer sees every event exactly
// once and in order.

import type { ApiClient } from './api.js';
import type { StateDelta } from './types.js';

export class StatePoller {
  private api: ApiClient;
  private roomId: string;
  private onDelta: (delta: StateDelta) => void;
  private onError: (err: unknown) => void;
  private intervalMs: number;
  private cursor = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = true;

  constructor(api: ApiClient, roomId: string,
              onDelta: (delta: StateDelta) => void,
              onError: (err: unknown) => void = () => {},
              intervalMs = 1500) {
    this.api = api;
    this.roomId = roomId;
    this.onDelta = onDelta;
    this.onError = onError;
    this.intervalMs = intervalMs;
  }

  start(): void {
    if (!this.stopped) {
      return;
    }
    this.stopped = false;
    void this.tick();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  /** Fetch one delta immediately (also used between timer ticks after the
   * user acts, so their change shows without waiting a full interval). */
  async tick(): Promise<void> {
    if (this.stopped) {
      return;
    }
    try {
      const delta = await this.api.getState(this.roomId, this.cursor);
      this.cursor = Math.max(this.cursor, delta.room.latest_seq);
      this.onDelta(delta);
    } catch (err) {
      this.onError(err);
    } finally {
      this.schedule();
    }
  }

  private schedule(): void {
    if (this.stopped) {
      return;
    }
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    const jitter = Math.floor(Math.random() * (this.intervalMs / 4));
    this.timer = setTimeout(() => void this.tick(), this.intervalMs + jitter);
  }
}
