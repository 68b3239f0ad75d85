/**
 * SVG step chart of the stopping boundaries and the observed trajectory.
 *
 * Horizontal line at the efficacy threshold (from the first stage where
 * success is attainable), staircase along the futility bounds, and the
 * cumulative-responder path of the session on top.  Everything the tests
 * and screen readers need is exposed as data attributes and text.
 */

import type { BoundariesDoc } from "./api";

const WIDTH = 640;
const HEIGHT = 320;
const MARGIN = { top: 16, right: 16, bottom: 36, left: 40 };

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

export function buildBoundaryChart(
  boundaries: BoundariesDoc,
  outcomes: boolean[],
): SVGSVGElement {
  const { u, K } = boundaries;
  const x = (stage: number) =>
    MARGIN.left + (stage / K) * (WIDTH - MARGIN.left - MARGIN.right);
  const y = (count: number) =>
    HEIGHT - MARGIN.bottom - (count / (u + 1)) * (HEIGHT - MARGIN.top - MARGIN.bottom);

  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    role: "img",
    "aria-label":
      `Stopping boundaries: efficacy at ${u} responders, ` +
      `futility staircase from stage ${boundaries.first_futility_stage} to ${K}`,
  });
  svg.dataset.role = "boundary-chart";

  // axes
  svg.append(
    el("line", {
      x1: String(x(0)), y1: String(y(0)), x2: String(x(K)), y2: String(y(0)),
      class: "axis",
    }),
    el("line", {
      x1: String(x(0)), y1: String(y(0)), x2: String(x(0)), y2: String(y(u + 1)),
      class: "axis",
    }),
  );
  const tickEvery = K > 30 ? 10 : K > 12 ? 5 : 1;
  for (let k = 0; k <= K; k += tickEvery) {
    const label = el("text", {
      x: String(x(k)), y: String(y(0) + 16), class: "tick", "text-anchor": "middle",
    });
    label.textContent = String(k);
    svg.append(label);
  }
  for (let s = 0; s <= u; s += 1) {
    const label = el("text", {
      x: String(x(0) - 8), y: String(y(s) + 4), class: "tick", "text-anchor": "end",
    });
    label.textContent = String(s);
    svg.append(label);
  }

  // efficacy threshold: flat line from the first attainable stage
  const effLine = el("line", {
    x1: String(x(boundaries.first_efficacy_stage - 1)),
    y1: String(y(u)),
    x2: String(x(K)),
    y2: String(y(u)),
    class: "efficacy",
  });
  effLine.dataset.role = "efficacy-line";
  effLine.dataset.threshold = String(u);
  svg.append(effLine);

  // futility staircase over the stages where a stop is possible
  const steps: { k: number; bound: number }[] = [];
  boundaries.futility.forEach((bound, i) => {
    const stage = boundaries.k[i];
    if (bound !== null && stage !== undefined) steps.push({ k: stage, bound });
  });
  if (steps.length > 0) {
    const parts: string[] = [];
    for (const step of steps) {
      parts.push(`${x(step.k - 1)},${y(step.bound)}`, `${x(step.k)},${y(step.bound)}`);
    }
    const staircase = el("polyline", { points: parts.join(" "), class: "futility" });
    staircase.dataset.role = "futility-staircase";
    staircase.dataset.steps = steps.map((s) => s.bound).join(",");
    staircase.dataset.stages = steps.map((s) => s.k).join(",");
    svg.append(staircase);
  }

  // observed cumulative-responder path
  let responders = 0;
  const points = [`${x(0)},${y(0)}`];
  const trail: { k: number; s: number }[] = [{ k: 0, s: 0 }];
  outcomes.forEach((responder, i) => {
    if (responder) responders += 1;
    points.push(`${x(i + 1)},${y(responders)}`);
    trail.push({ k: i + 1, s: responders });
  });
  const path = el("polyline", { points: points.join(" "), class: "trajectory" });
  path.dataset.role = "trajectory";
  path.dataset.points = trail.map((p) => `${p.k}:${p.s}`).join(" ");
  svg.append(path);

  const last = trail[trail.length - 1];
  if (last) {
    const marker = el("circle", {
      cx: String(x(last.k)), cy: String(y(last.s)), r: "4", class: "current",
    });
    marker.dataset.role = "current-position";
    svg.append(marker);
  }
  return svg;
}
