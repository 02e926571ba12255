// Auto-refreshing value subscription over the /api/watch NDJSON stream.
//
// The server emits one {"t", "value"} line per interval. On stream drop we
// reconnect with exponential backoff and flag the display as stale until
// events flow again.

import { createNdjsonParser } from "./ndjson.js";
import type { FetchLike } from "./api.js";

export interface WatchEvent {
  t: number;
  value: string;
}

export interface WatchHooks {
  onEvent: (event: WatchEvent) => void;
  onStale?: (stale: boolean) => void;
  onError?: (error: unknown) => void;
}

const INITIAL_BACKOFF_MS = 500;
const MAX_BACKOFF_MS = 10_000;

export class WatchSubscription {
  private active = false;
  private backoffMs = INITIAL_BACKOFF_MS;
  private abort: AbortController | null = null;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private hooks: WatchHooks,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  start(): void {
    if (this.active) return;
    this.active = true;
    void this.connect();
  }

  stop(): void {
    this.active = false;
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.retryTimer = null;
    this.abort?.abort();
    this.abort = null;
  }

  private async connect(): Promise<void> {
    while (this.active) {
      this.abort = new AbortController();
      try {
        const response = await this.fetchFn(this.url, { signal: this.abort.signal });
        if (!response.ok || response.body === null) {
          // A 4xx is permanent: report and stop rather than hammering.
          this.hooks.onError?.(new Error(`watch failed: ${response.status}`));
          if (response.status >= 400 && response.status < 500) {
            this.active = false;
            return;
          }
          throw new Error(`status ${response.status}`);
        }
        this.hooks.onStale?.(false);
        this.backoffMs = INITIAL_BACKOFF_MS;
        await this.pump(response.body);
      } catch (error) {
        if (!this.active) return;
        this.hooks.onError?.(error);
      }
      if (!this.active) return;
      this.hooks.onStale?.(true);
      await this.delay(this.backoffMs);
      this.backoffMs = Math.min(this.backoffMs * 2, MAX_BACKOFF_MS);
    }
  }

  private async pump(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    const parse = createNdjsonParser((message) => {
      const event = message as WatchEvent;
      if (this.active && typeof event.value === "string") this.hooks.onEvent(event);
    });
    for (;;) {
      const { done, value } = await reader.read();
      if (done || !this.active) return;
      if (value) parse(decoder.decode(value, { stream: true }));
    }
  }

  private delay(ms: number): Promise<void> {
    return new Promise((resolve) => {
      this.retryTimer = setTimeout(resolve, ms);
    });
  }
}
