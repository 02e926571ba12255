import { afterEach, beforeEach, describe, expect, test, vi } from "vitest";

import { ApiClient } from "./api.js";
import { SeriesPoller, autoscale } from "./plot.js";
import { fakeFetch, jsonResponse } from "./testutil.js";

// Server-side series emulation with cursor semantics.
class SeriesServer {
  points: [number, number][] = [];
  exists = false;

  handler(name: string) {
    return (url: string) => {
      const since = Number(new URL(url, "http://x").searchParams.get("since") ?? 0);
      if (!this.exists) {
        return jsonResponse({ error: "UnknownSeries", message: name }, 404);
      }
      return jsonResponse({
        points: this.points.slice(since),
        next: this.points.length,
      });
    };
  }
}

function pollerWorld() {
  const server = new SeriesServer();
  const fetchFn = fakeFetch({});
  const rawFetch = async (url: string) => server.handler("av")(url);
  const api = new ApiClient("", async (url, init) => {
    fetchFn.calls.push(url);
    return rawFetch(url);
  });
  return { server, api, fetchFn };
}

describe("series poller", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  test("accumulates the 10 points of the scaled plot run with no duplicates", async () => {
    const { server, api } = pollerWorld();
    server.exists = true;
    const batches: number[] = [];
    const poller = new SeriesPoller(api, "av", {
      onPoints: (added) => batches.push(added.length),
    });

    // The run emits a point every 100 steps; the poller polls at 500 ms.
    const emitted: [number, number][] = [];
    for (let k = 1; k <= 10; k++) emitted.push([k * 100, 1 / k]);

    poller.start();
    await vi.advanceTimersByTimeAsync(0);
    for (let k = 0; k < 10; k += 2) {
      server.points.push(emitted[k]!, emitted[k + 1]!);  // two new points appear
      await vi.advanceTimersByTimeAsync(500);             // one poll tick
    }
    await vi.advanceTimersByTimeAsync(1000);
    poller.stop();

    expect(poller.points).toEqual(emitted);
    expect(poller.points).toHaveLength(10);
    expect(batches.reduce((a, b) => a + b, 0)).toBe(10); // no gaps, no duplicates
  });

  test("no new points means no callback and an unchanged cursor", async () => {
    const { server, api, fetchFn } = pollerWorld();
    server.exists = true;
    server.points.push([1, 1]);
    let callbacks = 0;
    const poller = new SeriesPoller(api, "av", { onPoints: () => { callbacks += 1; } });
    poller.start();
    await vi.advanceTimersByTimeAsync(0);
    await vi.advanceTimersByTimeAsync(2000); // several empty polls
    poller.stop();
    expect(callbacks).toBe(1);
    const sinces = fetchFn.calls.map((u) => u.split("since=")[1]);
    expect(sinces[0]).toBe("0");
    expect(sinces.slice(1).every((s) => s === "1")).toBe(true);
  });

  test("unknown series reports waiting state and keeps polling", async () => {
    const { server, api } = pollerWorld();
    let waits = 0;
    const poller = new SeriesPoller(api, "av", { onWaiting: () => { waits += 1; } });
    poller.start();
    await vi.advanceTimersByTimeAsync(1000);
    expect(waits).toBeGreaterThan(0);
    server.exists = true;
    server.points.push([100, 0.5]);
    await vi.advanceTimersByTimeAsync(500);
    poller.stop();
    expect(poller.points).toEqual([[100, 0.5]]);
  });

  test("two pollers on one series fetch identical point sets", async () => {
    const { server, api } = pollerWorld();
    server.exists = true;
    server.points = [[1, 2], [3, 4], [5, 6]];
    const a = new SeriesPoller(api, "av");
    const b = new SeriesPoller(api, "av");
    a.start();
    b.start();
    await vi.advanceTimersByTimeAsync(600);
    a.stop();
    b.stop();
    expect(a.points).toEqual(b.points);
    expect(a.points).toHaveLength(3);
  });
});

describe("autoscale", () => {
  test("spans the data range", () => {
    expect(autoscale([1, 5, 3])).toEqual({ min: 1, max: 5 });
  });

  test("degenerate ranges get padding", () => {
    const s = autoscale([2, 2]);
    expect(s.min).toBeLessThan(2);
    expect(s.max).toBeGreaterThan(2);
  });

  test("empty data gets a unit range", () => {
    expect(autoscale([])).toEqual({ min: 0, max: 1 });
  });
});
