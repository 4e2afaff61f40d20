// Live vitals screen: polling, flagged markers, and server-authoritative
// classification.

import { afterEach, describe, expect, it } from "vitest";

import { FakeGateway } from "./fake-gateway.js";
import { mount, q, qa, settle, signIn, sleep, TEST_POLL_MS } from "./helpers.js";
import type { Harness } from "./helpers.js";

let harness: Harness | null = null;
afterEach(() => {
  harness?.teardown();
  harness = null;
});

function seeded(): FakeGateway {
  const fake = new FakeGateway();
  fake.seedExpert("EXP-0001");
  fake.seedPatient("PAT-0001", "Alex Stone", ["EXP-0001"]);
  fake.seedPatient("PAT-0002", "Sam Field", ["EXP-0001"]);
  return fake;
}

async function openChart(patientId: string): Promise<void> {
  harness!.app.navigate(`#/patient/${patientId}`);
  await settle();
}

describe("vitals view", () => {
  it("renders seeded readings and an empty state for quiet kinds", async () => {
    harness = mount(seeded());
    harness.fake.pushReading("PAT-0001", "heart_rate", 72);
    harness.fake.pushReading("PAT-0001", "heart_rate", 75);
    await settle();
    await signIn("EXP-0001", harness.fake.secretFor("EXP-0001"));
    await openChart("PAT-0001");

    expect(qa('svg[data-kind="heart_rate"] circle')).toHaveLength(2);
    expect(q('svg[data-kind="systolic_bp"] .empty-state').textContent).toContain(
      "no readings",
    );
    const card = q('.vital[data-kind="heart_rate"]');
    expect(card.classList.contains("abnormal")).toBe(false);
    expect(card.querySelector(".value")!.textContent).toContain("75 bpm");
    expect(card.querySelector(".bounds")!.textContent).toContain("50");
  });

  it("shows new readings as they arrive, one circle per reading", async () => {
    harness = mount(seeded());
    harness.fake.pushReading("PAT-0001", "heart_rate", 70);
    await settle();
    await signIn("EXP-0001", harness.fake.secretFor("EXP-0001"));
    await openChart("PAT-0001");
    expect(qa('svg[data-kind="heart_rate"] circle')).toHaveLength(1);

    harness.fake.pushReading("PAT-0001", "heart_rate", 74);
    harness.fake.pushReading("PAT-0001", "heart_rate", 78);
    await settle();

    const dots = qa('svg[data-kind="heart_rate"] circle');
    expect(dots).toHaveLength(3);
    const seqs = dots.map((dot) => dot.getAttribute("data-seq"));
    expect(new Set(seqs).size).toBe(3); // no duplicates across polls
  });

  it("flags an out-of-range reading within a poll interval", async () => {
    harness = mount(seeded());
    await settle();
    await signIn("EXP-0001", harness.fake.secretFor("EXP-0001"));
    await openChart("PAT-0001");

    harness.fake.pushReading("PAT-0001", "systolic_bp", 171);
    await sleep(TEST_POLL_MS * 3);

    const dot = q('svg[data-kind="systolic_bp"] circle.flagged');
    expect(dot.getAttribute("data-status")).toBe("above_high");
    expect(
      q('.vital[data-kind="systolic_bp"]').classList.contains("abnormal"),
    ).toBe(true);
  });

  it("renders the server verdict, never its own", async () => {
    harness = mount(seeded());
    // extreme value scripted as normal: the console must not second-guess it
    harness.fake.pushReading("PAT-0001", "heart_rate", 180, {
      status: "normal",
      alert: false,
    });
    await settle();
    await signIn("EXP-0001", harness.fake.secretFor("EXP-0001"));
    await openChart("PAT-0001");

    expect(qa('svg[data-kind="heart_rate"] circle.flagged')).toHaveLength(0);
    expect(q('svg[data-kind="heart_rate"] circle').classList.contains("normal")).toBe(
      true,
    );
    expect(
      q('.vital[data-kind="heart_rate"]').classList.contains("abnormal"),
    ).toBe(false);
  });

  it("keeps the vitals cursor monotonic across polls", async () => {
    harness = mount(seeded());
    harness.fake.pushReading("PAT-0001", "heart_rate", 70);
    await settle();
    await signIn("EXP-0001", harness.fake.secretFor("EXP-0001"));
    await openChart("PAT-0001");
    harness.fake.pushReading("PAT-0001", "heart_rate", 72);
    await settle();
    harness.fake.pushReading("PAT-0001", "heart_rate", 74);
    await settle();

    const afters = harness.fake.requests
      .filter((r) => r.path.includes("/vitals"))
      .map((r) => Number(new URL(`http://x${r.path}`).searchParams.get("after")));
    expect(afters.length).toBeGreaterThan(2);
    for (let i = 1; i < afters.length; i++) {
      expect(afters[i]).toBeGreaterThanOrEqual(afters[i - 1]);
    }
  });

  it("lets a patient watch their own chart but not another patient's", async () => {
    harness = mount(seeded());
    harness.fake.pushReading("PAT-0001", "heart_rate", 80);
    await settle();
    await signIn("PAT-0001", harness.fake.secretFor("PAT-0001"));
    await openChart("PAT-0001");
    expect(qa('svg[data-kind="heart_rate"] circle')).toHaveLength(1);

    await openChart("PAT-0002");
    expect(q("main h1").textContent).toBe("Access denied");
    const callsAtDenial = harness.fake.requests.length;
    await settle(); // the poller must have stopped
    expect(harness.fake.requests.length).toBe(callsAtDenial);
  });
});
