// Application wiring: tree + watch list + plot panel + console.

import { ApiClient, BrowseEntry } from "./api.js";
import { ScriptConsole } from "./console.js";
import { CanvasChart, SeriesPoller } from "./plot.js";
import { ObjectTree } from "./tree.js";
import { WatchSubscription } from "./watch.js";

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

interface WatchRow {
  subscription: WatchSubscription;
  row: HTMLElement;
}

const watches = new Map<string, WatchRow>();

function addWatch(entry: BrowseEntry): void {
  const list = el<HTMLElement>("watch-list");
  const row = document.createElement("div");
  row.className = "watch-row";
  const name = document.createElement("span");
  name.className = "watch-name";
  name.textContent = entry.path;
  const value = document.createElement("span");
  value.className = "watch-value";
  value.textContent = "…";
  const stale = document.createElement("span");
  stale.className = "watch-stale";
  stale.textContent = "stale";
  stale.hidden = true;
  row.append(name, value, stale);
  list.appendChild(row);

  const subscription = new WatchSubscription(api.watchUrl(entry.path, 1000), {
    onEvent: (event) => {
      value.textContent = event.value;
    },
    onStale: (isStale) => {
      stale.hidden = !isStale;
    },
    onError: () => {
      stale.hidden = false;
    },
  });
  subscription.start();
  watches.set(entry.path, { subscription, row });
}

function removeWatch(path: string): void {
  const existing = watches.get(path);
  if (!existing) return;
  existing.subscription.stop();
  existing.row.remove();
  watches.delete(path);
}

function showDetail(entry: BrowseEntry, text: string): void {
  el<HTMLElement>("detail-path").textContent = entry.path;
  el<HTMLElement>("detail-value").textContent = text;
}

let poller: SeriesPoller | null = null;

function startPlot(): void {
  const name = el<HTMLInputElement>("series-name").value.trim();
  if (!name) return;
  poller?.stop();
  const chart = new CanvasChart(el<HTMLCanvasElement>("chart"));
  chart.render([], name);
  poller = new SeriesPoller(api, name, {
    onPoints: (_added, all) => chart.render(all, name),
    onWaiting: () => chart.render([], name),
  });
  poller.start();
}

function init(): void {
  const tree = new ObjectTree(el<HTMLElement>("tree"), api, {
    onResult: showDetail,
    onSelect: (entry) => {
      el<HTMLElement>("detail-path").textContent = entry.path;
    },
    onWatchToggle: (entry, enabled) => {
      if (enabled) addWatch(entry);
      else removeWatch(entry.path);
    },
  });
  void tree.load();
  el<HTMLButtonElement>("tree-refresh").addEventListener("click", () => void tree.load());
  el<HTMLButtonElement>("plot-start").addEventListener("click", startPlot);
  new ScriptConsole(
    api,
    el<HTMLTextAreaElement>("console-input"),
    el<HTMLElement>("console-log"),
    el<HTMLButtonElement>("console-run"),
  );
}

document.addEventListener("DOMContentLoaded", init);
