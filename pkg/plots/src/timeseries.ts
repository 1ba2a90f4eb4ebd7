/** Option/state fraction trajectories from a time-series CSV. */

import { TIME_SERIES_COLUMNS, Table, numbersIn, requireColumns } from "./csv.js";
import { SERIES_COLORS, el, svgDoc } from "./svg.js";

const WIDTH = 640;
const HEIGHT = 360;
const MARGIN = { left: 60, top: 30, right: 140, bottom: 45 };

const DEFAULT_SERIES = ["f_pl", "f_pm", "f_ph", "f_ql", "f_qm", "f_qh"];

function seriesStyle(name: string): { color: string; dash: string } {
  const level = name.endsWith("l") ? "l" : name.endsWith("m") ? "m" : "h";
  const responder = name.includes("q");
  return { color: SERIES_COLORS[level], dash: responder ? "6,3" : "" };
}

export function renderTimeSeries(table: Table, series: string[] = DEFAULT_SERIES): string {
  requireColumns(table, TIME_SERIES_COLUMNS, "timeseries");
  const rounds = numbersIn(table, "round");
  if (rounds.length === 0) throw new Error("timeseries: no data rows");
  const xMax = Math.max(rounds[rounds.length - 1], 1);
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const x = (round: number) => MARGIN.left + (round / xMax) * plotW;
  const y = (frac: number) => MARGIN.top + (1 - frac) * plotH;

  const parts: string[] = [];
  parts.push(
    el("rect", {
      x: MARGIN.left,
      y: MARGIN.top,
      width: plotW,
      height: plotH,
      fill: "none",
      stroke: "#333333",
    }),
  );
  for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
    parts.push(
      el("line", {
        x1: MARGIN.left,
        x2: MARGIN.left + plotW,
        y1: y(tick),
        y2: y(tick),
        stroke: "#dddddd",
      }),
    );
    parts.push(
      el(
        "text",
        { x: MARGIN.left - 6, y: y(tick) + 4, "text-anchor": "end", "font-size": 10 },
        tick.toFixed(2),
      ),
    );
  }
  series.forEach((name, i) => {
    const values = numbersIn(table, name);
    const points = rounds
      .map((r, j) => (Number.isNaN(values[j]) ? null : `${x(r).toFixed(2)},${y(values[j]).toFixed(2)}`))
      .filter((p): p is string => p !== null)
      .join(" ");
    const style = seriesStyle(name);
    parts.push(
      el("polyline", {
        points,
        fill: "none",
        stroke: style.color,
        "stroke-width": 1.5,
        ...(style.dash ? { "stroke-dasharray": style.dash } : {}),
        "data-series": name,
      }),
    );
    const ly = MARGIN.top + 14 * i;
    parts.push(
      el("line", {
        x1: WIDTH - MARGIN.right + 10,
        x2: WIDTH - MARGIN.right + 32,
        y1: ly,
        y2: ly,
        stroke: style.color,
        "stroke-width": 1.5,
        ...(style.dash ? { "stroke-dasharray": style.dash } : {}),
      }),
    );
    parts.push(
      el("text", { x: WIDTH - MARGIN.right + 38, y: ly + 4, "font-size": 11 }, name),
    );
  });
  parts.push(
    el(
      "text",
      { x: MARGIN.left + plotW / 2, y: HEIGHT - 12, "text-anchor": "middle", "font-size": 12 },
      "round",
    ),
  );
  return svgDoc(WIDTH, HEIGHT, parts.join("\n"));
}
