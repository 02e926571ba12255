// Shared fakes for tests: canned JSON responses and controllable NDJSON streams.

import type { FetchLike } from "./api.js";

export function jsonResponse(data: unknown, status = 200): Response {
  return new Response(JSON.stringify(data), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export type RouteTable = Record<string, (init?: RequestInit) => Response | Promise<Response>>;

export interface FetchLog {
  calls: string[];
}

export function fakeFetch(routes: RouteTable): FetchLike & FetchLog {
  const fn = (async (input: string, init?: RequestInit) => {
    fn.calls.push(input);
    const handler = routes[input];
    if (!handler) {
      return jsonResponse({ error: "NoSuchRoute", message: input }, 404);
    }
    return handler(init);
  }) as FetchLike & FetchLog;
  fn.calls = [];
  return fn;
}

export class StreamController {
  private controller!: ReadableStreamDefaultController<Uint8Array>;
  readonly stream: ReadableStream<Uint8Array>;
  private encoder = new TextEncoder();

  constructor() {
    this.stream = new ReadableStream<Uint8Array>({
      start: (controller) => {
        this.controller = controller;
      },
    });
  }

  pushLine(message: unknown): void {
    this.controller.enqueue(this.encoder.encode(JSON.stringify(message) + "\n"));
  }

  pushRaw(text: string): void {
    this.controller.enqueue(this.encoder.encode(text));
  }

  close(): void {
    this.controller.close();
  }

  fail(message = "stream error"): void {
    this.controller.error(new Error(message));
  }

  asResponse(): Response {
    return new Response(this.stream, {
      status: 200,
      headers: { "Content-Type": "application/x-ndjson" },
    });
  }
}

export function flushMicrotasks(times = 10): Promise<void> {
  let chain: Promise<void> = Promise.resolve();
  for (let i = 0; i < times; i++) chain = chain.then(() => undefined);
  return chain;
}
