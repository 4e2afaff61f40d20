// Landing view after sign-in.
//
// Staff see their patient roster; a patient sees the available medical
// experts plus a link to their own chart. The directory endpoint already
// filters by role server-side, so this view only lays out what it got.

import type { Principal } from "../api.js";
import type { Ctx, View } from "../view.js";
import { errorBanner, h } from "../view.js";

function personRow(ctx: Ctx, person: Principal, isStaff: boolean): HTMLElement {
  const links = h("td", {});
  if (person.role === "patient") {
    links.append(
      h(
        "a",
        { href: `#/patient/${person.id}`, class: "vitals-link" },
        "vitals",
      ),
      " · ",
      h(
        "a",
        { href: `#/thresholds/${person.id}`, class: "thresholds-link" },
        isStaff ? "thresholds" : "thresholds (read-only)",
      ),
    );
    if (isStaff) {
      links.append(
        " · ",
        h(
          "button",
          {
            class: "secondary start-consult",
            onclick: () => void startConsult(ctx, person.id),
          },
          "consult",
        ),
      );
    }
  } else if (person.role === "medical_expert") {
    links.append(
      h(
        "button",
        {
          class: "secondary start-consult",
          onclick: () => void startConsult(ctx, person.id),
        },
        "start consultation",
      ),
    );
  }
  return h(
    "tr",
    { "data-id": person.id },
    h("td", {}, person.id),
    h("td", {}, person.name),
    h("td", {}, person.role.replace("_", " ")),
    links,
  );
}

async function startConsult(ctx: Ctx, targetId: string): Promise<void> {
  const sess = await ctx.api.openSession(targetId, "patient_physician");
  ctx.navigate(`#/chat/${sess.session_id}`);
}

export function rosterView(ctx: Ctx): View {
  const me = ctx.api.principal;
  const isStaff = me?.role === "medical_expert";
  const root = h("div", {}, h("h1", {}, isStaff ? "Patients" : "Care team"));

  void (async () => {
    try {
      const people = await ctx.api.principals();
      const wanted = isStaff
        ? people.filter((p) => p.role === "patient")
        : people.filter((p) => p.role === "medical_expert");
      if (me?.role === "patient") {
        root.append(
          h(
            "p",
            {},
            h("a", { href: `#/patient/${me.id}`, class: "own-chart" }, "My vitals chart"),
          ),
        );
      }
      if (wanted.length === 0) {
        root.append(h("p", { class: "meta empty-roster" }, "Nobody to show yet."));
        return;
      }
      const body = h("tbody", {}, ...wanted.map((p) => personRow(ctx, p, isStaff)));
      root.append(
        h(
          "table",
          { class: "roster" },
          h(
            "thead",
            {},
            h("tr", {}, h("th", {}, "id"), h("th", {}, "name"), h("th", {}, "role"), h("th", {}, "")),
          ),
          body,
        ),
      );
    } catch {
      root.append(errorBanner("Could not load the directory."));
    }
  })();

  return { el: root, destroy() {} };
}
