// Tiny view plumbing shared by every screen: a context handed down from the
// shell, a lifecycle contract, and a terse element builder.

import type { GatewayApi } from "./api.js";

export interface Ctx {
  api: GatewayApi;
  navigate: (hash: string) => void;
  pollMs: number;
}

export interface View {
  el: HTMLElement;
  destroy(): void;
}

type Child = Node | string | null | undefined;

export function h(
  tag: string,
  attrs: Record<string, string | ((ev: Event) => void)> = {},
  ...children: Child[]
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, ""), value);
    } else if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(child);
  }
  return node;
}

export function errorBanner(text: string): HTMLElement {
  return h("div", { class: "error-banner", role: "alert" }, text);
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}
