/** Thresholded transition-network diagrams on a fixed 3x3 state grid.
 *
 * Nodes are the nine states, laid out by (proposer level = row, responder
 * level = column) for comparability across runs; node fill encodes the
 * occupancy (row marginal of the joint matrix), directed edges encode the
 * conditional probability p(to|from) in width and color, and edges below
 * the threshold are omitted entirely.
 */

import { Table } from "./csv.js";
import { WindowRows, windowsIn } from "./matrix.js";
import { el, sequential, svgDoc } from "./svg.js";

const SIZE = 420;
const NODE_R = 26;
const GRID0 = 80;
const GRID_STEP = (SIZE - 2 * GRID0) / 2;

export interface NetworkEdge {
  from: number; // 1-based state
  to: number;
  p: number;
}

export function networkFromWindow(
  table: Table,
  windowIndex: number,
  threshold: number,
): { win: WindowRows; edges: NetworkEdge[]; occupancy: number[] } {
  const joints = windowsIn(table, "joint_p");
  const conds = windowsIn(table, "cond_p");
  if (windowIndex < 0 || windowIndex >= joints.length) {
    throw new Error(`no window with index ${windowIndex} (found ${joints.length})`);
  }
  const joint = joints[windowIndex];
  const cond = conds[windowIndex];
  const occupancy = joint.value.map((row) =>
    row.reduce((acc, v) => acc + (Number.isNaN(v) ? 0 : v), 0),
  );
  const edges: NetworkEdge[] = [];
  for (let i = 0; i < 9; i++) {
    for (let j = 0; j < 9; j++) {
      const p = cond.value[i][j];
      if (!Number.isNaN(p) && p >= threshold) {
        edges.push({ from: i + 1, to: j + 1, p });
      }
    }
  }
  return { win: joint, edges, occupancy };
}

function nodePos(state: number): { x: number; y: number } {
  const idx = state - 1;
  const row = Math.floor(idx / 3); // proposer level
  const col = idx % 3; // responder level
  return { x: GRID0 + col * GRID_STEP, y: GRID0 + row * GRID_STEP };
}

function edgePath(from: number, to: number): string {
  const a = nodePos(from);
  const b = nodePos(to);
  if (from === to) {
    const r = NODE_R * 0.72;
    return (
      `M ${a.x - r} ${a.y - NODE_R + 4} ` +
      `a ${r} ${r} 0 1 1 ${2 * r} 0`
    );
  }
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const len = Math.hypot(dx, dy);
  const ux = dx / len;
  const uy = dy / len;
  // offset start/end to the node rims, bow slightly so reverse edges split
  const sx = a.x + ux * NODE_R;
  const sy = a.y + uy * NODE_R;
  const ex = b.x - ux * (NODE_R + 6);
  const ey = b.y - uy * (NODE_R + 6);
  const mx = (sx + ex) / 2 - uy * 14;
  const my = (sy + ey) / 2 + ux * 14;
  return `M ${sx.toFixed(1)} ${sy.toFixed(1)} Q ${mx.toFixed(1)} ${my.toFixed(1)} ${ex.toFixed(1)} ${ey.toFixed(1)}`;
}

export function renderNetwork(
  edges: NetworkEdge[],
  occupancy: number[],
  title: string,
): string {
  const maxOcc = Math.max(...occupancy, 1e-12);
  const parts: string[] = [];
  parts.push(
    '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" ' +
      'markerHeight="7" orient="auto-start-reverse">' +
      '<path d="M 0 0 L 10 5 L 0 10 z" fill="#555555"/></marker></defs>',
  );
  parts.push(el("text", { x: SIZE / 2, y: 24, "text-anchor": "middle", "font-size": 13 }, title));
  for (const edge of edges) {
    parts.push(
      el("path", {
        d: edgePath(edge.from, edge.to),
        fill: "none",
        stroke: sequential(edge.p),
        "stroke-width": (1 + 5 * edge.p).toFixed(2),
        "marker-end": "url(#arrow)",
        "data-edge": `${edge.from}-${edge.to}`,
        "data-p": edge.p,
      }),
    );
  }
  for (let s = 1; s <= 9; s++) {
    const { x, y } = nodePos(s);
    parts.push(
      el("circle", {
        cx: x,
        cy: y,
        r: NODE_R,
        fill: sequential(occupancy[s - 1] / maxOcc),
        stroke: "#333333",
        "data-node": `s${s}`,
        "data-occupancy": occupancy[s - 1],
      }),
    );
    parts.push(
      el(
        "text",
        { x, y: y + 4, "text-anchor": "middle", "font-size": 12, fill: "#ffffff" },
        `s${s}`,
      ),
    );
  }
  return svgDoc(SIZE, SIZE, parts.join("\n"));
}
