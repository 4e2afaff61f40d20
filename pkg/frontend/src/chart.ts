// Dependency-free SVG sparkline chart for one vital kind.
//
// Out-of-range markers come from the server's per-reading status field;
// bounds are drawn from the thresholds endpoint. The chart never
// re-derives classification client-side.

import type { BoundDoc, Reading } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const W = 640;
const H = 140;
const PAD = 10;

const KIND_COLORS: Record<string, string> = {
  heart_rate: "#1565c0",
  systolic_bp: "#6a1b9a",
  diastolic_bp: "#00838f",
};

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

export function buildKindChart(
  kind: string,
  readings: Reading[],
  bound: BoundDoc | undefined,
): SVGSVGElement {
  const svg = el("svg", {
    class: "chart",
    viewBox: `0 0 ${W} ${H}`,
    width: String(W),
    height: String(H),
  });
  svg.dataset.kind = kind;
  if (readings.length === 0) {
    const empty = el("text", { x: String(W / 2), y: String(H / 2), "text-anchor": "middle" });
    empty.textContent = "no readings yet";
    empty.classList.add("empty-state");
    svg.appendChild(empty);
    return svg;
  }

  const values = readings.map((r) => r.value);
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (bound) {
    lo = Math.min(lo, bound.low);
    hi = Math.max(hi, bound.high);
  }
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const x = (i: number) =>
    readings.length === 1 ? W / 2 : PAD + (i * (W - 2 * PAD)) / (readings.length - 1);
  const y = (v: number) => H - PAD - ((v - lo) * (H - 2 * PAD)) / (hi - lo);

  if (bound) {
    for (const edge of [bound.low, bound.high]) {
      svg.appendChild(
        el("line", {
          x1: String(PAD),
          x2: String(W - PAD),
          y1: String(y(edge)),
          y2: String(y(edge)),
          stroke: "#e0b4b4",
          "stroke-dasharray": "4 4",
        }),
      );
    }
  }

  const points = readings.map((r, i) => `${x(i).toFixed(1)},${y(r.value).toFixed(1)}`);
  svg.appendChild(
    el("polyline", {
      points: points.join(" "),
      stroke: KIND_COLORS[kind] ?? "#444",
    }),
  );

  readings.forEach((r, i) => {
    const dot = el("circle", {
      cx: x(i).toFixed(1),
      cy: y(r.value).toFixed(1),
      r: r.status === "normal" ? "2" : "4",
    });
    dot.classList.add(r.status === "normal" ? "normal" : "flagged");
    dot.dataset.seq = String(r.seq);
    dot.dataset.status = r.status;
    svg.appendChild(dot);
  });
  return svg;
}
