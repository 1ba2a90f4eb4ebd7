/** Batch figure rendering from simulator CSVs.
 *
 * Usage:
 *   ugsim-plot --kind heatmap     --input heatmap.csv      --out DIR [--columns f_pm,f_qm]
 *   ugsim-plot --kind timeseries  --input time_series.csv  --out DIR [--columns ...]
 *   ugsim-plot --kind matrix      --input transitions.csv  --out DIR [--value joint_p|cond_p|net_flow]
 *   ugsim-plot --kind network     --input transitions.csv  --out DIR [--threshold 0.05] [--window-index 0]
 *   ugsim-plot --kind preferences --input preferences.csv  --out DIR
 *   ugsim-plot --kind boundary    --input boundary.csv     --out DIR
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { basename, join } from "node:path";
import { parseCsv } from "./csv.js";
import { renderBoundary } from "./boundary.js";
import { HEATMAP_VALUE_COLUMNS, renderHeatmap } from "./heatmap.js";
import { renderMatrix, windowsIn } from "./matrix.js";
import { networkFromWindow, renderNetwork } from "./network.js";
import { renderPreferences } from "./preferences.js";
import { renderTimeSeries } from "./timeseries.js";

export interface PlotJob {
  kind: "heatmap" | "timeseries" | "matrix" | "network" | "preferences" | "boundary";
  input: string;
  out: string;
  columns?: string[];
  value?: "joint_p" | "cond_p" | "net_flow";
  threshold: number;
  windowIndex?: number;
}

export function parseArgs(argv: string[]): PlotJob {
  const job: Partial<PlotJob> = { threshold: 0.05 };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`missing value for ${flag}`);
      return argv[i];
    };
    switch (flag) {
      case "--kind":
        job.kind = next() as PlotJob["kind"];
        break;
      case "--input":
        job.input = next();
        break;
      case "--out":
        job.out = next();
        break;
      case "--columns":
        job.columns = next().split(",");
        break;
      case "--value":
        job.value = next() as PlotJob["value"];
        break;
      case "--threshold":
        job.threshold = Number(next());
        break;
      case "--window-index":
        job.windowIndex = Number(next());
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!job.kind || !job.input || !job.out) {
    throw new Error("required: --kind, --input, --out");
  }
  if (!["heatmap", "timeseries", "matrix", "network", "preferences", "boundary"].includes(job.kind)) {
    throw new Error(`unknown kind '${job.kind}'`);
  }
  return job as PlotJob;
}

export function runJob(job: PlotJob): string[] {
  const table = parseCsv(readFileSync(job.input, "utf8"));
  mkdirSync(job.out, { recursive: true });
  const stem = basename(job.input).replace(/\.csv$/, "");
  const written: string[] = [];
  const emit = (name: string, svg: string) => {
    const path = join(job.out, name);
    writeFileSync(path, svg);
    written.push(path);
  };

  if (job.kind === "heatmap") {
    const columns = job.columns ?? HEATMAP_VALUE_COLUMNS.slice(0, 6);
    for (const column of columns) {
      emit(`${stem}_${column}.svg`, renderHeatmap(table, column));
    }
  } else if (job.kind === "timeseries") {
    emit(`${stem}.svg`, renderTimeSeries(table, job.columns));
  } else if (job.kind === "matrix") {
    const value = job.value ?? "joint_p";
    for (const win of windowsIn(table, value)) {
      emit(`${stem}_${value}_${win.start}_${win.end}.svg`, renderMatrix(win, value));
    }
  } else if (job.kind === "network") {
    const index = job.windowIndex ?? 0;
    const { win, edges, occupancy } = networkFromWindow(table, index, job.threshold);
    const svg = renderNetwork(edges, occupancy, `p(s'|s) >= ${job.threshold}, rounds ${win.start} to ${win.end}`);
    emit(`${stem}_network_${win.start}_${win.end}.svg`, svg);
  } else if (job.kind === "preferences") {
    for (const role of ["proposer", "responder"] as const) {
      emit(`${stem}_${role}.svg`, renderPreferences(table, role));
    }
  } else {
    emit(`${stem}.svg`, renderBoundary(table));
  }
  return written;
}

export function main(argv: string[]): number {
  try {
    const files = runJob(parseArgs(argv));
    process.stdout.write(JSON.stringify({ files }) + "\n");
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : err}\n`);
    return 1;
  }
}

if (process.argv[1] && basename(process.argv[1]).startsWith("cli")) {
  process.exit(main(process.argv.slice(2)));
}
