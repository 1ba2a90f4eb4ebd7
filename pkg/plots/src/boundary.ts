/** The critical learning-rate curve over the discount factor. */

import { BOUNDARY_COLUMNS, Table, numbersIn, requireColumns } from "./csv.js";
import { el, svgDoc } from "./svg.js";

const WIDTH = 420;
const HEIGHT = 340;
const MARGIN = { left: 60, top: 30, right: 20, bottom: 50 };

export function renderBoundary(table: Table): string {
  requireColumns(table, BOUNDARY_COLUMNS, "boundary");
  const gammas = numbersIn(table, "gamma");
  const alphas = numbersIn(table, "alpha_boundary");
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const x = (g: number) => MARGIN.left + g * plotW;
  const y = (a: number) => MARGIN.top + (1 - a) * plotH;

  const parts: string[] = [];
  parts.push(
    el("rect", {
      x: MARGIN.left, y: MARGIN.top, width: plotW, height: plotH,
      fill: "none", stroke: "#333333",
    }),
  );
  for (const tick of [0, 0.5, 1]) {
    parts.push(
      el("text", { x: MARGIN.left - 6, y: y(tick) + 4, "text-anchor": "end", "font-size": 10 },
        tick.toFixed(1)),
    );
    parts.push(
      el("text", { x: x(tick), y: HEIGHT - MARGIN.bottom + 16, "text-anchor": "middle", "font-size": 10 },
        tick.toFixed(1)),
    );
  }
  const points = gammas
    .map((g, i) => (Number.isNaN(alphas[i]) ? null : `${x(g).toFixed(1)},${y(alphas[i]).toFixed(1)}`))
    .filter((p): p is string => p !== null)
    .join(" ");
  parts.push(
    el("polyline", {
      points, fill: "none", stroke: "#000000", "stroke-width": 2, "data-series": "alpha_boundary",
    }),
  );
  parts.push(
    el("text", { x: MARGIN.left + plotW / 2, y: HEIGHT - 10, "text-anchor": "middle", "font-size": 12 },
      "discount factor"),
  );
  parts.push(
    el("text", {
      x: 16, y: MARGIN.top + plotH / 2, "font-size": 12, "text-anchor": "middle",
      transform: `rotate(-90 16 ${MARGIN.top + plotH / 2})`,
    }, "critical learning rate"),
  );
  return svgDoc(WIDTH, HEIGHT, parts.join("\n"));
}
