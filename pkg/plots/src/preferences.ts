/** Q-table preference trajectories: per state, the mass of each action on
 * the row maximum over time, one 3x3 panel grid per role. */

import { PREFERENCES_COLUMNS, Table, columnIndex, requireColumns } from "./csv.js";
import { SERIES_COLORS, el, svgDoc } from "./svg.js";

const PANEL = 150;
const GAP = 26;
const MARGIN = { left: 50, top: 50 };

export function renderPreferences(table: Table, role: "proposer" | "responder"): string {
  requireColumns(table, PREFERENCES_COLUMNS, "preferences");
  const roundIdx = columnIndex(table, "round");
  const stateIdx = columnIndex(table, "state");
  const roleIdx = columnIndex(table, "role");
  const rows = table.rows.filter((row) => row[roleIdx] === role);
  if (rows.length === 0) throw new Error(`preferences: no rows for role '${role}'`);
  const rounds = [...new Set(rows.map((row) => row[roundIdx] as number))].sort((a, b) => a - b);
  const xMax = Math.max(rounds[rounds.length - 1], 1);

  const parts: string[] = [];
  parts.push(
    el(
      "text",
      { x: MARGIN.left + 1.5 * PANEL + GAP, y: 22, "text-anchor": "middle", "font-size": 14 },
      `${role} action preference (row-maximum mass)`,
    ),
  );
  for (let s = 1; s <= 9; s++) {
    const col = (s - 1) % 3;
    const rowPos = Math.floor((s - 1) / 3);
    const x0 = MARGIN.left + col * (PANEL + GAP);
    const y0 = MARGIN.top + rowPos * (PANEL + GAP);
    parts.push(
      el("rect", { x: x0, y: y0, width: PANEL, height: PANEL, fill: "none", stroke: "#999999" }),
    );
    parts.push(
      el("text", { x: x0 + 4, y: y0 + 13, "font-size": 11 }, `s${s}`),
    );
    const stateRows = rows.filter((row) => row[stateIdx] === s);
    (["mass_l", "mass_m", "mass_h"] as const).forEach((column, level) => {
      const massIdx = columnIndex(table, column);
      const points = stateRows
        .map((row) => {
          const mass = row[massIdx] as number;
          if (Number.isNaN(mass)) return null;
          const x = x0 + ((row[roundIdx] as number) / xMax) * PANEL;
          const y = y0 + (1 - mass) * PANEL;
          return `${x.toFixed(1)},${y.toFixed(1)}`;
        })
        .filter((p): p is string => p !== null)
        .join(" ");
      parts.push(
        el("polyline", {
          points,
          fill: "none",
          stroke: SERIES_COLORS[["l", "m", "h"][level]],
          "stroke-width": 1.4,
          "data-series": `s${s}:${column}`,
        }),
      );
    });
  }
  const width = MARGIN.left + 3 * PANEL + 2 * GAP + 30;
  const height = MARGIN.top + 3 * PANEL + 2 * GAP + 20;
  return svgDoc(width, height, parts.join("\n"));
}
