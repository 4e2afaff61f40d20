// Threshold editor: local validation, server round-trip, and role gating.

import { afterEach, describe, expect, it } from "vitest";

import { FakeGateway } from "./fake-gateway.js";
import { apiFor, mount, q, qa, settle, signIn, sleep } from "./helpers.js";
import type { Harness } from "./helpers.js";

let harness: Harness | null = null;
let restore: (() => void) | null = null;
afterEach(() => {
  harness?.teardown();
  harness = null;
  restore?.();
  restore = null;
});

function seeded(): FakeGateway {
  const fake = new FakeGateway();
  fake.seedExpert("EXP-0001");
  fake.seedPatient("PAT-0001", "Alex Stone", ["EXP-0001"]);
  return fake;
}

function boundRow(kind: string): {
  row: HTMLElement;
  low: HTMLInputElement;
  high: HTMLInputElement;
} {
  const row = q<HTMLElement>(`.bound-row[data-kind="${kind}"]`);
  return {
    row,
    low: row.querySelector("input.low") as HTMLInputElement,
    high: row.querySelector("input.high") as HTMLInputElement,
  };
}

function submit(): void {
  q<HTMLFormElement>("main form").dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

async function openEditor(): Promise<void> {
  harness!.app.navigate("#/thresholds/PAT-0001");
  await settle();
}

describe("threshold editing", () => {
  it("shows the stored policy with its version", async () => {
    harness = mount(seeded());
    await settle();
    await signIn("EXP-0001", harness.fake.secretFor("EXP-0001"));
    await openEditor();

    expect(q(".version").textContent).toBe("policy version 1");
    const { low, high } = boundRow("heart_rate");
    expect(low.value).toBe("50");
    expect(high.value).toBe("100");
    expect(qa(".bound-row")).toHaveLength(3);
  });

  it("rejects low >= high inline and sends nothing", async () => {
    harness = mount(seeded());
    await settle();
    await signIn("EXP-0001", harness.fake.secretFor("EXP-0001"));
    await openEditor();

    const { row, low, high } = boundRow("systolic_bp");
    low.value = "180";
    high.value = "120";
    const putsBefore = harness.fake.requests.filter((r) => r.method === "PUT").length;
    submit();
    await sleep(20);

    expect(row.querySelector(".field-error")!.textContent).toContain(
      "low bound must be below",
    );
    expect(harness.fake.requests.filter((r) => r.method === "PUT")).toHaveLength(
      putsBefore,
    );
    expect(harness.fake.thresholds.get("PAT-0001")!.version).toBe(1);
    expect(q(".version").textContent).toBe("policy version 1");
  });

  it("rejects a blank bound inline and sends nothing", async () => {
    harness = mount(seeded());
    await settle();
    await signIn("EXP-0001", harness.fake.secretFor("EXP-0001"));
    await openEditor();

    const { row, low } = boundRow("heart_rate");
    low.value = "";
    submit();
    await sleep(20);

    expect(row.querySelector(".field-error")!.textContent).toContain("required");
    expect(harness.fake.requests.filter((r) => r.method === "PUT")).toHaveLength(0);
  });

  it("saves a valid change and shows it again after a reload", async () => {
    harness = mount(seeded());
    await settle();
    await signIn("EXP-0001", harness.fake.secretFor("EXP-0001"));
    await openEditor();

    const { low, high } = boundRow("systolic_bp");
    low.value = "110";
    high.value = "150";
    submit();
    await sleep(30);

    expect(q(".version").textContent).toBe("policy version 2");
    expect(document.body.textContent).toContain("Saved.");
    const stored = harness.fake.thresholds.get("PAT-0001")!;
    expect(stored.bounds.systolic_bp.low).toBe(110);
    expect(stored.bounds.systolic_bp.high).toBe(150);
    expect(stored.updated_by).toBe("EXP-0001");

    // leave and come back: the saved policy is what loads
    harness.app.navigate("#/");
    await settle();
    await openEditor();
    const again = boundRow("systolic_bp");
    expect(again.low.value).toBe("110");
    expect(again.high.value).toBe("150");
    expect(q(".version").textContent).toBe("policy version 2");
  });

  it("renders read-only for the patient", async () => {
    harness = mount(seeded());
    await settle();
    await signIn("PAT-0001", harness.fake.secretFor("PAT-0001"));
    await openEditor();

    const { low, high } = boundRow("heart_rate");
    expect(low.disabled).toBe(true);
    expect(high.disabled).toBe(true);
    expect(document.querySelector("button.save")).toBeNull();
  });

  it("is enforced server-side too, not just in the form", async () => {
    const fake = seeded();
    restore = fake.install();
    const doc = await apiFor(fake, "EXP-0001");
    await expect(
      doc.putThresholds("PAT-0001", { heart_rate: { low: 120, high: 80 } }),
    ).rejects.toMatchObject({ status: 422 });
    const pat = await apiFor(fake, "PAT-0001");
    await expect(
      pat.putThresholds("PAT-0001", { heart_rate: { low: 40, high: 90 } }),
    ).rejects.toMatchObject({ status: 403 });
    expect(fake.thresholds.get("PAT-0001")!.version).toBe(1);
  });
});
