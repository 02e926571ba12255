// Object browser: a lazily expanded tree over /api/objects and
// /api/object/{path}. Fields show their value on click, methods invoke
// (with an argument box when arity > 0), and watchable nodes carry an
// auto-refresh toggle.

import { ApiClient, ApiError, BrowseEntry } from "./api.js";

export interface TreeHooks {
  onSelect?: (entry: BrowseEntry) => void;
  onResult?: (entry: BrowseEntry, text: string) => void;
  onWatchToggle?: (entry: BrowseEntry, enabled: boolean) => void;
}

interface TreeNode {
  entry: BrowseEntry;
  element: HTMLLIElement;
  childList: HTMLUListElement | null;
  expanded: boolean;
  loaded: boolean;
  watching: boolean;
}

function isWatchable(entry: BrowseEntry): boolean {
  return entry.kind === "field" || (entry.kind === "method" && entry.arity === 0);
}

export class ObjectTree {
  private nodes = new Map<string, TreeNode>();

  constructor(
    private container: HTMLElement,
    private api: ApiClient,
    private hooks: TreeHooks = {},
  ) {}

  async load(): Promise<void> {
    this.container.textContent = "";
    this.nodes.clear();
    const list = document.createElement("ul");
    list.className = "tree-root";
    this.container.appendChild(list);
    try {
      for (const entry of await this.api.objects()) {
        list.appendChild(this.renderNode(entry).element);
      }
    } catch (error) {
      this.showTopLevelError(list, error);
    }
  }

  node(path: string): TreeNode | undefined {
    return this.nodes.get(path);
  }

  private showTopLevelError(list: HTMLUListElement, error: unknown): void {
    const item = document.createElement("li");
    item.className = "tree-error";
    item.textContent = `cannot reach the model: ${describe(error)} `;
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.addEventListener("click", () => void this.load());
    item.appendChild(retry);
    list.appendChild(item);
  }

  private renderNode(entry: BrowseEntry): TreeNode {
    const element = document.createElement("li");
    element.className = `tree-node kind-${entry.kind}`;
    element.dataset.path = entry.path;

    const row = document.createElement("div");
    row.className = "tree-row";
    element.appendChild(row);

    const node: TreeNode = {
      entry, element, childList: null, expanded: false, loaded: false, watching: false,
    };
    this.nodes.set(entry.path, node);

    const label = document.createElement("button");
    label.className = "tree-label";
    label.textContent = entry.kind === "method" && entry.arity
      ? `${entry.name}(${entry.arity})`
      : entry.name;
    row.appendChild(label);

    if (entry.preview !== "") {
      const preview = document.createElement("span");
      preview.className = "tree-preview";
      preview.textContent = entry.preview;
      row.appendChild(preview);
    }

    if (entry.kind === "root" || entry.kind === "compound") {
      label.addEventListener("click", () => void this.toggleExpand(node));
    } else if (entry.kind === "field") {
      label.addEventListener("click", () => void this.showValue(node, row));
    } else {
      this.attachInvoker(node, row, label);
    }

    if (isWatchable(entry)) {
      const watch = document.createElement("button");
      watch.className = "watch-toggle";
      watch.textContent = "watch";
      watch.addEventListener("click", () => {
        node.watching = !node.watching;
        watch.classList.toggle("watch-on", node.watching);
        this.hooks.onWatchToggle?.(entry, node.watching);
      });
      row.appendChild(watch);
    }
    return node;
  }

  private async toggleExpand(node: TreeNode): Promise<void> {
    this.hooks.onSelect?.(node.entry);
    if (node.expanded) {
      node.expanded = false;
      if (node.childList) node.childList.hidden = true;
      return;
    }
    node.expanded = true;
    if (node.loaded) {
      if (node.childList) node.childList.hidden = false;
      return; // children fetched at most once per expansion
    }
    try {
      const members = await this.api.members(node.entry.path);
      const list = document.createElement("ul");
      list.className = "tree-children";
      for (const child of members) {
        list.appendChild(this.renderNode(child).element);
      }
      node.element.appendChild(list);
      node.childList = list;
      node.loaded = true;
    } catch (error) {
      node.expanded = false;
      this.showNodeError(node, error);
    }
  }

  private async showValue(node: TreeNode, row: HTMLElement): Promise<void> {
    this.hooks.onSelect?.(node.entry);
    try {
      const value = await this.api.value(node.entry.path);
      this.hooks.onResult?.(node.entry, value);
      let preview = row.querySelector<HTMLSpanElement>(".tree-preview");
      if (!preview) {
        preview = document.createElement("span");
        preview.className = "tree-preview";
        row.appendChild(preview);
      }
      preview.textContent = value;
    } catch (error) {
      this.showNodeError(node, error);
    }
  }

  private attachInvoker(node: TreeNode, row: HTMLElement, label: HTMLElement): void {
    const arity = node.entry.arity ?? 0;
    let argsInput: HTMLInputElement | null = null;
    if (arity > 0) {
      argsInput = document.createElement("input");
      argsInput.className = "method-args";
      argsInput.placeholder = arity === 1 ? "argument" : `${arity} arguments`;
      row.appendChild(argsInput);
    }
    label.addEventListener("click", () => {
      this.hooks.onSelect?.(node.entry);
      const args = argsInput && argsInput.value !== ""
        ? argsInput.value.trim().split(/\s+/)
        : [];
      void this.invoke(node, args);
    });
  }

  private async invoke(node: TreeNode, args: string[]): Promise<void> {
    try {
      const { result } = await this.api.invoke(node.entry.path, args);
      this.hooks.onResult?.(node.entry, result);
      this.clearNodeError(node);
    } catch (error) {
      this.showNodeError(node, error);
    }
  }

  private showNodeError(node: TreeNode, error: unknown): void {
    this.clearNodeError(node);
    const badge = document.createElement("span");
    badge.className = "node-error";
    badge.textContent = describe(error);
    node.element.querySelector(".tree-row")?.appendChild(badge);
  }

  private clearNodeError(node: TreeNode): void {
    node.element.querySelector(".node-error")?.remove();
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.kind}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}
