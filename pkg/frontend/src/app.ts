// Application shell: hash router, role-gated navigation, auth guard.
//
// Exactly one view is mounted at a time; the previous view's destroy()
// runs before the next mounts so no poller outlives its screen.

import { GatewayApi } from "./api.js";
import { DEFAULT_POLL_MS } from "./poll.js";
import type { Ctx, View } from "./view.js";
import { h } from "./view.js";
import { alertsView } from "./views/alerts.js";
import { consultView, sessionsListView } from "./views/chat.js";
import { loginView } from "./views/login.js";
import { rosterView } from "./views/roster.js";
import { thresholdsView } from "./views/thresholds.js";
import { vitalsView } from "./views/vitals.js";

export interface AppOptions {
  api?: GatewayApi;
  pollMs?: number;
}

export class App {
  readonly api: GatewayApi;
  private readonly ctx: Ctx;
  private readonly outlet = h("main", { class: "outlet" });
  private readonly topbar = h("header", { class: "topbar" });
  private current: View | null = null;
  private routedHash: string | null = null;

  constructor(private readonly root: HTMLElement, options: AppOptions = {}) {
    this.api = options.api ?? new GatewayApi();
    this.ctx = {
      api: this.api,
      navigate: (hash) => this.navigate(hash),
      pollMs: options.pollMs ?? DEFAULT_POLL_MS,
    };
    this.api.onUnauthorized = () => {
      this.api.logout();
      this.navigate("#/login");
    };
  }

  private readonly onHashChange = (): void => this.route();

  start(): void {
    this.root.append(this.topbar, this.outlet);
    window.addEventListener("hashchange", this.onHashChange);
    this.route();
  }

  stop(): void {
    window.removeEventListener("hashchange", this.onHashChange);
    this.current?.destroy();
    this.current = null;
    this.routedHash = null;
  }

  navigate(hash: string): void {
    if (window.location.hash === hash) {
      this.route();
    } else {
      window.location.hash = hash;
      // jsdom fires hashchange asynchronously; route now so tests and
      // programmatic navigation see the new view immediately
      this.route();
    }
  }

  /** The mounted view, exposed for tests that drive it directly. */
  get view(): View | null {
    return this.current;
  }

  private renderTopbar(): void {
    this.topbar.replaceChildren();
    const brand = h("span", { class: "brand" }, "Physician Console");
    this.topbar.append(brand);
    const me = this.api.principal;
    if (!me) return;
    const nav = h(
      "nav",
      {},
      h("a", { href: "#/", class: "nav-home" }, "Directory"),
      h("a", { href: "#/chat", class: "nav-chat" }, "Consultations"),
    );
    if (me.role === "medical_expert") {
      nav.append(h("a", { href: "#/alerts", class: "nav-alerts" }, "Alerts"));
    }
    this.topbar.append(
      nav,
      h(
        "span",
        { class: "whoami" },
        `${me.name} (${me.role.replace("_", " ")})`,
      ),
      h(
        "button",
        {
          class: "secondary sign-out",
          onclick: () => {
            this.api.logout();
            this.navigate("#/login");
          },
        },
        "Sign out",
      ),
    );
  }

  private mount(view: View, hash: string): void {
    this.current?.destroy();
    this.current = view;
    this.routedHash = hash;
    this.outlet.replaceChildren(view.el);
  }

  private route(): void {
    const hash = window.location.hash || "#/";
    // navigate() routes synchronously and the hashchange event fires later;
    // a view that is already up for this hash must not be remounted (its
    // feed cursors would reset and pollers would double up)
    if (this.current && hash === this.routedHash) return;
    if (!this.api.token && hash !== "#/login") {
      this.navigate("#/login");
      return;
    }
    this.renderTopbar();
    const parts = hash.replace(/^#\//, "").split("/");
    const me = this.api.principal;
    let view: View;
    if (hash === "#/login") {
      view = loginView(this.ctx);
    } else if (parts[0] === "" || hash === "#/") {
      view = rosterView(this.ctx);
    } else if (parts[0] === "patient" && parts[1]) {
      view = vitalsView(this.ctx, parts[1]);
    } else if (parts[0] === "thresholds" && parts[1]) {
      view = thresholdsView(this.ctx, parts[1]);
    } else if (parts[0] === "alerts") {
      if (me?.role !== "medical_expert") {
        this.navigate("#/");
        return;
      }
      view = alertsView(this.ctx);
    } else if (parts[0] === "chat" && parts[1]) {
      view = consultView(this.ctx, parts[1]);
    } else if (parts[0] === "chat") {
      view = sessionsListView(this.ctx);
    } else {
      this.navigate("#/");
      return;
    }
    this.mount(view, hash);
  }
}
