// Per-patient alerting bounds editor.
//
// The low < high rule is checked here purely to give inline feedback
// before a round-trip; the gateway enforces the same rule and is the
// authority. Patients get a read-only rendering of their own policy.

import { ApiError } from "../api.js";
import type { ThresholdDoc } from "../api.js";
import type { Ctx, View } from "../view.js";
import { clear, errorBanner, h } from "../view.js";

const KIND_ORDER = ["heart_rate", "systolic_bp", "diastolic_bp"];

const KIND_LABELS: Record<string, string> = {
  heart_rate: "Heart rate",
  systolic_bp: "Systolic pressure",
  diastolic_bp: "Diastolic pressure",
};

interface KindRow {
  kind: string;
  low: HTMLInputElement;
  high: HTMLInputElement;
  error: HTMLElement;
}

export function thresholdsView(ctx: Ctx, patientId: string): View {
  const readOnly = ctx.api.principal?.role === "patient";
  const versionLine = h("p", { class: "meta version" }, "");
  const bannerSlot = h("div", {});
  const rowsHost = h("div", { class: "bounds" });
  const saveButton = h("button", { class: "save", type: "submit" }, "Save") as HTMLButtonElement;
  const form = h(
    "form",
    {
      onsubmit: (ev: Event) => {
        ev.preventDefault();
        if (!readOnly) void save();
      },
    },
    rowsHost,
  );
  if (!readOnly) form.append(saveButton);
  const root = h(
    "div",
    {},
    h("h1", {}, `Alert thresholds for ${patientId}`),
    versionLine,
    bannerSlot,
    form,
  );

  const rows: KindRow[] = [];

  function showDoc(doc: ThresholdDoc): void {
    versionLine.textContent = `policy version ${doc.version}`;
    clear(rowsHost);
    rows.length = 0;
    for (const kind of KIND_ORDER) {
      const bound = doc.bounds[kind];
      if (!bound) continue;
      const low = h("input", {
        type: "number",
        class: "low",
        name: `${kind}-low`,
        value: String(bound.low),
      }) as HTMLInputElement;
      const high = h("input", {
        type: "number",
        class: "high",
        name: `${kind}-high`,
        value: String(bound.high),
      }) as HTMLInputElement;
      low.disabled = readOnly;
      high.disabled = readOnly;
      const error = h("span", { class: "field-error" }, "");
      rowsHost.append(
        h(
          "div",
          { class: "bound-row", "data-kind": kind },
          h("label", {}, `${KIND_LABELS[kind] ?? kind} (${bound.unit})`),
          low,
          h("span", {}, "to"),
          high,
          error,
        ),
      );
      rows.push({ kind, low, high, error });
    }
  }

  function collect(): Record<string, { low: number; high: number }> | null {
    // returns null when any row fails the local check; nothing is sent then
    let ok = true;
    const bounds: Record<string, { low: number; high: number }> = {};
    for (const row of rows) {
      row.error.textContent = "";
      if (row.low.value.trim() === "" || row.high.value.trim() === "") {
        row.error.textContent = "Both bounds are required.";
        ok = false;
        continue;
      }
      const low = Number(row.low.value);
      const high = Number(row.high.value);
      if (!Number.isFinite(low) || !Number.isFinite(high)) {
        row.error.textContent = "Both bounds must be numbers.";
        ok = false;
        continue;
      }
      if (low >= high) {
        row.error.textContent = "The low bound must be below the high bound.";
        ok = false;
        continue;
      }
      bounds[row.kind] = { low, high };
    }
    return ok ? bounds : null;
  }

  async function save(): Promise<void> {
    clear(bannerSlot);
    const bounds = collect();
    if (bounds === null) return;
    saveButton.disabled = true;
    try {
      const doc = await ctx.api.putThresholds(patientId, bounds);
      showDoc(doc);
      bannerSlot.append(h("p", { class: "meta saved" }, "Saved."));
    } catch (err) {
      if (err instanceof ApiError) {
        bannerSlot.append(errorBanner(`Save rejected: ${err.detail || err.code}`));
      } else {
        bannerSlot.append(errorBanner("Save failed; the service is unreachable."));
      }
    } finally {
      saveButton.disabled = false;
    }
  }

  void ctx.api
    .thresholds(patientId)
    .then(showDoc)
    .catch((err) => {
      if (err instanceof ApiError && err.status === 403) {
        bannerSlot.append(errorBanner("Access denied for this patient."));
      } else {
        bannerSlot.append(errorBanner("Could not load the threshold policy."));
      }
    });

  return { el: root, destroy() {} };
}
