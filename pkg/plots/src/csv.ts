/** Strict CSV parsing for the simulator's output schemas. */

export type Cell = number | string;

export interface Table {
  columns: string[];
  rows: Cell[][];
}

export const TIME_SERIES_COLUMNS = [
  "round",
  "f_pl", "f_pm", "f_ph", "f_ql", "f_qm", "f_qh",
  "s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9",
  "deal_rate",
  "pay_p_l", "pay_p_m", "pay_p_h", "pay_q_l", "pay_q_m", "pay_q_h",
  "succ_p_l", "succ_p_m", "succ_p_h", "succ_q_l", "succ_q_m", "succ_q_h",
];

export const HEATMAP_COLUMNS = [
  "axis1", "axis2",
  "f_pl", "f_pm", "f_ph", "f_ql", "f_qm", "f_qh",
  "s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9",
];

export const TRANSITIONS_COLUMNS = [
  "window_start", "window_end", "from_state", "to_state", "joint_p", "cond_p", "net_flow",
];

export const PREFERENCES_COLUMNS = ["round", "state", "role", "mass_l", "mass_m", "mass_h"];

export const BOUNDARY_COLUMNS = ["gamma", "alpha_boundary"];

const NUMERIC = /^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/;

function parseCell(text: string): Cell {
  if (text === "nan" || text === "-nan") return NaN;
  if (NUMERIC.test(text)) return Number(text);
  return text;
}

export function parseCsv(text: string): Table {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) throw new Error("empty CSV");
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(",").map(parseCell));
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new Error(`row has ${row.length} cells, header has ${columns.length}`);
    }
  }
  return { columns, rows };
}

/** Verify the table carries exactly the expected column set, in order. */
export function requireColumns(table: Table, expected: string[], kind: string): void {
  for (let i = 0; i < expected.length; i++) {
    if (table.columns[i] !== expected[i]) {
      throw new Error(
        `${kind}: schema mismatch at column ${i}: expected '${expected[i]}', got '${table.columns[i] ?? "<missing>"}'`,
      );
    }
  }
  if (table.columns.length !== expected.length) {
    throw new Error(
      `${kind}: schema mismatch: unexpected extra column '${table.columns[expected.length]}'`,
    );
  }
}

export function columnIndex(table: Table, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) throw new Error(`schema mismatch: no column '${name}'`);
  return idx;
}

export function numbersIn(table: Table, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row) => {
    const cell = row[idx];
    if (typeof cell !== "number") throw new Error(`column '${name}' holds non-numeric cell '${cell}'`);
    return cell;
  });
}
