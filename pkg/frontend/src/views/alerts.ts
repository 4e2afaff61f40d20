// Alert inbox: open alerts, newest first, with one-click acknowledge.
//
// Acknowledge round-trips to the gateway before the row leaves the list.
// A concurrent acknowledge elsewhere surfaces as a 409; the row is simply
// dropped (the alert is no longer open either way) without an error dialog.

import { ApiError } from "../api.js";
import type { Alert } from "../api.js";
import { Poller } from "../poll.js";
import type { Ctx, View } from "../view.js";
import { clear, errorBanner, h } from "../view.js";

function alertRow(a: Alert, onAck: (id: string, row: HTMLElement) => void): HTMLElement {
  const row = h(
    "tr",
    { "data-alert-id": a.alert_id },
    h("td", {}, a.alert_id),
    h("td", {}, a.patient_id),
    h("td", {}, `${a.kind.replace("_", " ")} ${a.value} ${a.unit}`),
    h(
      "td",
      {},
      `${a.status === "above_high" ? "above" : "below"} ${a.bound_crossed}`,
    ),
    h("td", {}, new Date(a.taken_at).toLocaleString()),
  );
  const ackCell = h("td", {});
  const button = h(
    "button",
    { class: "ack", onclick: () => onAck(a.alert_id, row) },
    "Acknowledge",
  ) as HTMLButtonElement;
  ackCell.append(button);
  row.append(ackCell);
  return row;
}

export function alertsView(ctx: Ctx): View {
  const tableBody = h("tbody", {});
  const banner = h("div", {});
  const empty = h("p", { class: "meta empty-inbox" }, "No open alerts.");
  const root = h(
    "div",
    {},
    h("h1", {}, "Alert inbox"),
    banner,
    h(
      "table",
      { class: "alerts" },
      h(
        "thead",
        {},
        h(
          "tr",
          {},
          h("th", {}, "alert"),
          h("th", {}, "patient"),
          h("th", {}, "reading"),
          h("th", {}, "crossed"),
          h("th", {}, "taken at"),
          h("th", {}, ""),
        ),
      ),
      tableBody,
    ),
    empty,
  );

  function setRows(alerts: Alert[]): void {
    clear(tableBody);
    for (const a of [...alerts].reverse()) tableBody.append(alertRow(a, onAck));
    empty.style.display = alerts.length === 0 ? "" : "none";
  }

  function onAck(alertId: string, row: HTMLElement): void {
    const button = row.querySelector("button.ack") as HTMLButtonElement | null;
    if (button) button.disabled = true; // a second click must not re-fire
    void (async () => {
      try {
        await ctx.api.ack(alertId);
        row.remove();
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          row.remove(); // already acknowledged elsewhere; not an error here
        } else {
          if (button) button.disabled = false;
          clear(banner);
          banner.append(errorBanner("Acknowledge failed; try again."));
        }
      }
      if (!tableBody.querySelector("tr")) empty.style.display = "";
    })();
  }

  const poller = new Poller(async () => {
    setRows(await ctx.api.alerts("open"));
  }, ctx.pollMs);
  poller.start();

  return {
    el: root,
    destroy() {
      poller.stop();
    },
  };
}
