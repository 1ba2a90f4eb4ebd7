/** Parameter-scan heatmaps: one colored cell per (axis1, axis2) grid point. */

import { HEATMAP_COLUMNS, Table, columnIndex, numbersIn, requireColumns } from "./csv.js";
import { colorBar, el, sequential, svgDoc } from "./svg.js";

const CELL = 40;
const MARGIN = { left: 70, top: 40, right: 30, bottom: 70 };

export const HEATMAP_VALUE_COLUMNS = HEATMAP_COLUMNS.slice(2);

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

export function renderHeatmap(table: Table, valueColumn: string): string {
  requireColumns(table, HEATMAP_COLUMNS, "heatmap");
  const axis1 = numbersIn(table, "axis1");
  const axis2 = numbersIn(table, "axis2");
  const values = numbersIn(table, valueColumn);
  const xs = uniqueSorted(axis1);
  const ys = uniqueSorted(axis2);

  const width = MARGIN.left + CELL * xs.length + MARGIN.right;
  const height = MARGIN.top + CELL * ys.length + MARGIN.bottom;
  const parts: string[] = [];

  for (let i = 0; i < values.length; i++) {
    const xi = xs.indexOf(axis1[i]);
    const yi = ys.indexOf(axis2[i]);
    parts.push(
      el("rect", {
        x: MARGIN.left + xi * CELL,
        y: MARGIN.top + (ys.length - 1 - yi) * CELL,
        width: CELL,
        height: CELL,
        fill: sequential(values[i]),
        stroke: "#ffffff",
        "stroke-width": 0.5,
        "data-cell": `${axis1[i]},${axis2[i]}`,
        "data-value": values[i],
      }),
    );
  }
  xs.forEach((x, i) => {
    parts.push(
      el(
        "text",
        {
          x: MARGIN.left + (i + 0.5) * CELL,
          y: MARGIN.top + ys.length * CELL + 16,
          "text-anchor": "middle",
          "font-size": 11,
        },
        x.toPrecision(3),
      ),
    );
  });
  ys.forEach((y, i) => {
    parts.push(
      el(
        "text",
        {
          x: MARGIN.left - 8,
          y: MARGIN.top + (ys.length - 1 - i + 0.62) * CELL,
          "text-anchor": "end",
          "font-size": 11,
        },
        y.toPrecision(3),
      ),
    );
  });
  parts.push(
    el("text", { x: width / 2, y: 18, "text-anchor": "middle", "font-size": 14 }, valueColumn),
  );
  const barY = MARGIN.top + ys.length * CELL + 30;
  parts.push(colorBar(MARGIN.left, barY, CELL * xs.length, 10));
  parts.push(el("text", { x: MARGIN.left, y: barY + 24, "font-size": 10 }, "0"));
  parts.push(
    el(
      "text",
      { x: MARGIN.left + CELL * xs.length, y: barY + 24, "text-anchor": "end", "font-size": 10 },
      "1",
    ),
  );
  return svgDoc(width, height, parts.join("\n"));
}
