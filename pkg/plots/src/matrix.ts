/** 9x9 consecutive-state matrices (joint, conditional, or net flow) per window. */

import { TRANSITIONS_COLUMNS, Table, columnIndex, requireColumns } from "./csv.js";
import { diverging, el, sequential, svgDoc } from "./svg.js";

const CELL = 36;
const MARGIN = { left: 64, top: 56, right: 20, bottom: 20 };

export interface WindowRows {
  start: number;
  end: number;
  /** value[i][j] for from-state i+1 to to-state j+1 */
  value: number[][];
}

export function windowsIn(table: Table, valueColumn: "joint_p" | "cond_p" | "net_flow"): WindowRows[] {
  requireColumns(table, TRANSITIONS_COLUMNS, "matrix");
  const ws = columnIndex(table, "window_start");
  const we = columnIndex(table, "window_end");
  const fs = columnIndex(table, "from_state");
  const ts = columnIndex(table, "to_state");
  const vc = columnIndex(table, valueColumn);
  const byWindow = new Map<string, WindowRows>();
  for (const row of table.rows) {
    const key = `${row[ws]}:${row[we]}`;
    if (!byWindow.has(key)) {
      byWindow.set(key, {
        start: row[ws] as number,
        end: row[we] as number,
        value: Array.from({ length: 9 }, () => new Array(9).fill(NaN)),
      });
    }
    const win = byWindow.get(key)!;
    win.value[(row[fs] as number) - 1][(row[ts] as number) - 1] = row[vc] as number;
  }
  return [...byWindow.values()].sort((a, b) => a.start - b.start);
}

export function renderMatrix(win: WindowRows, valueColumn: string): string {
  const width = MARGIN.left + 9 * CELL + MARGIN.right;
  const height = MARGIN.top + 9 * CELL + MARGIN.bottom;
  const flat = win.value.flat().filter((v) => !Number.isNaN(v));
  const maxAbs = Math.max(...flat.map(Math.abs), 1e-12);
  const isDiverging = valueColumn === "net_flow";
  const parts: string[] = [];
  parts.push(
    el(
      "text",
      { x: width / 2, y: 18, "text-anchor": "middle", "font-size": 13 },
      `${valueColumn}, rounds ${win.start} to ${win.end}`,
    ),
  );
  for (let i = 0; i < 9; i++) {
    for (let j = 0; j < 9; j++) {
      const v = win.value[i][j];
      const fill = Number.isNaN(v)
        ? "#cccccc"
        : isDiverging
          ? diverging(v, maxAbs)
          : sequential(v / maxAbs);
      parts.push(
        el("rect", {
          x: MARGIN.left + j * CELL,
          y: MARGIN.top + i * CELL,
          width: CELL,
          height: CELL,
          fill,
          stroke: "#ffffff",
          "stroke-width": 0.5,
          "data-cell": `${i + 1}-${j + 1}`,
          "data-value": Number.isNaN(v) ? "nan" : v,
        }),
      );
    }
  }
  for (let k = 0; k < 9; k++) {
    parts.push(
      el(
        "text",
        {
          x: MARGIN.left + (k + 0.5) * CELL,
          y: MARGIN.top - 8,
          "text-anchor": "middle",
          "font-size": 11,
        },
        `s${k + 1}`,
      ),
    );
    parts.push(
      el(
        "text",
        {
          x: MARGIN.left - 8,
          y: MARGIN.top + (k + 0.62) * CELL,
          "text-anchor": "end",
          "font-size": 11,
        },
        `s${k + 1}`,
      ),
    );
  }
  parts.push(
    el(
      "text",
      {
        x: 16,
        y: MARGIN.top + 4.5 * CELL,
        "font-size": 11,
        transform: `rotate(-90 16 ${MARGIN.top + 4.5 * CELL})`,
        "text-anchor": "middle",
      },
      "from",
    ),
  );
  return svgDoc(width, height, parts.join("\n"));
}
