// Live vitals for one patient: latest value per kind, a chart per kind with
// server-flagged out-of-range points, refreshed by cursor polling.
//
// Classification is never recomputed here: a point is flagged iff the
// gateway stored it with an abnormal status, and the bound lines come from
// the thresholds endpoint verbatim.

import { ApiError } from "../api.js";
import type { Reading, ThresholdDoc } from "../api.js";
import { buildKindChart } from "../chart.js";
import { Poller } from "../poll.js";
import type { Ctx, View } from "../view.js";
import { clear, errorBanner, h } from "../view.js";

const KIND_ORDER = ["heart_rate", "systolic_bp", "diastolic_bp"];
const KIND_LABELS: Record<string, string> = {
  heart_rate: "Heart rate",
  systolic_bp: "Systolic BP",
  diastolic_bp: "Diastolic BP",
};
const WINDOW = 120; // points kept per kind

export function vitalsView(ctx: Ctx, patientId: string): View {
  const latest = h("div", { class: "latest" });
  const charts = h("div", { class: "charts" });
  const status = h("p", { class: "meta poll-status" }, "loading…");
  const root = h(
    "div",
    {},
    h("h1", {}, `Vitals for ${patientId}`),
    status,
    latest,
    charts,
  );

  const byKind = new Map<string, Reading[]>();
  let cursor = -1;
  let thresholds: ThresholdDoc | null = null;
  let denied = false;

  function render(): void {
    clear(latest);
    clear(charts);
    for (const kind of KIND_ORDER) {
      const series = byKind.get(kind) ?? [];
      const last = series[series.length - 1];
      const bound = thresholds?.bounds[kind];
      const card = h(
        "div",
        { class: `vital ${last && last.status !== "normal" ? "abnormal" : ""}`, "data-kind": kind },
        h("div", { class: "meta" }, KIND_LABELS[kind] ?? kind),
        h(
          "div",
          { class: "value" },
          last ? `${last.value} ${bound?.unit ?? ""}` : "–",
        ),
        h(
          "div",
          { class: "bounds" },
          bound ? `normal ${bound.low}–${bound.high}` : "",
        ),
      );
      latest.append(card);
      charts.append(
        h(
          "div",
          { class: "panel" },
          h("h2", {}, KIND_LABELS[kind] ?? kind),
          buildKindChart(kind, series, bound),
        ),
      );
    }
  }

  async function tick(): Promise<void> {
    if (denied) return;
    // keep following pages until the server says the cursor is current
    for (;;) {
      const page = await ctx.api.vitals(patientId, cursor);
      for (const reading of page.items) {
        if (reading.status === "malformed" as string) continue;
        const series = byKind.get(reading.kind) ?? [];
        series.push(reading);
        if (series.length > WINDOW) series.shift();
        byKind.set(reading.kind, series);
      }
      cursor = page.next_after;
      if (page.complete) break;
    }
    status.textContent = `updated ${new Date().toLocaleTimeString()}`;
    render();
  }

  const poller = new Poller(async () => {
    try {
      if (!thresholds) thresholds = await ctx.api.thresholds(patientId);
      await tick();
    } catch (err) {
      if (err instanceof ApiError && err.status === 403) {
        denied = true;
        poller.stop();
        clear(root);
        root.append(
          h("h1", {}, "Access denied"),
          errorBanner("You are not permitted to view this patient's vitals."),
        );
        return;
      }
      throw err; // Poller records it; next tick retries
    }
  }, ctx.pollMs);
  poller.start();

  render();
  return {
    el: root,
    destroy() {
      poller.stop();
    },
  };
}
