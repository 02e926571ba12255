// Live plot: a cursor-disciplined poller over /api/series plus a small
// canvas renderer with autoscaling axes. Polling never re-fetches old
// points; the cursor advances by exactly what the server handed back.

import { ApiClient } from "./api.js";

export type Point = [number, number];

export interface PollerHooks {
  onPoints?: (added: Point[], all: readonly Point[]) => void;
  onWaiting?: () => void; // series does not exist yet
  onError?: (error: unknown) => void;
}

export class SeriesPoller {
  readonly points: Point[] = [];
  private cursor = 0;
  private timer: ReturnType<typeof setInterval> | null = null;
  private busy = false;

  constructor(
    private api: ApiClient,
    readonly name: string,
    private hooks: PollerHooks = {},
    private intervalMs = 500,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    void this.poll();
    this.timer = setInterval(() => void this.poll(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }

  async poll(): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const batch = await this.api.series(this.name, this.cursor);
      this.cursor = batch.next;
      if (batch.points.length > 0) {
        this.points.push(...batch.points);
        this.hooks.onPoints?.(batch.points, this.points);
      }
    } catch (error) {
      const kind = (error as { kind?: string }).kind;
      if (kind === "UnknownSeries") {
        this.hooks.onWaiting?.(); // chart shows "waiting for data"
      } else {
        this.hooks.onError?.(error);
      }
    } finally {
      this.busy = false;
    }
  }
}

const MARGIN = { left: 46, right: 12, top: 10, bottom: 24 };

export interface Scale {
  min: number;
  max: number;
}

export function autoscale(values: number[]): Scale {
  if (values.length === 0) return { min: 0, max: 1 };
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  return { min, max };
}

export class CanvasChart {
  constructor(private canvas: HTMLCanvasElement) {}

  render(points: readonly Point[], label = ""): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.font = "11px sans-serif";
    ctx.fillStyle = "#667";
    if (points.length === 0) {
      ctx.fillText("waiting for data", width / 2 - 40, height / 2);
      return;
    }
    const xs = autoscale(points.map((p) => p[0]));
    const ys = autoscale(points.map((p) => p[1]));
    const plotW = width - MARGIN.left - MARGIN.right;
    const plotH = height - MARGIN.top - MARGIN.bottom;
    const toX = (x: number) => MARGIN.left + ((x - xs.min) / (xs.max - xs.min)) * plotW;
    const toY = (y: number) => MARGIN.top + (1 - (y - ys.min) / (ys.max - ys.min)) * plotH;

    ctx.strokeStyle = "#99a";
    ctx.strokeRect(MARGIN.left, MARGIN.top, plotW, plotH);
    ctx.fillText(ys.max.toPrecision(4), 2, MARGIN.top + 10);
    ctx.fillText(ys.min.toPrecision(4), 2, MARGIN.top + plotH);
    ctx.fillText(xs.min.toPrecision(4), MARGIN.left, height - 8);
    ctx.fillText(xs.max.toPrecision(4), width - MARGIN.right - 40, height - 8);
    if (label) ctx.fillText(label, MARGIN.left + 6, MARGIN.top + 12);

    ctx.strokeStyle = "#2b6cb0";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    points.forEach(([x, y], i) => {
      if (i === 0) ctx.moveTo(toX(x), toY(y));
      else ctx.lineTo(toX(x), toY(y));
    });
    ctx.stroke();
  }
}
