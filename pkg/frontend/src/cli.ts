/**
 * Figure CLI over the pipeline's CSV outputs.
 *
 * Usage:
 *   node dist/cli.js curves --in a.csv[,b.csv...] [--null band.csv] \
 *        --out grid.svg [--axis nodes|month] [--labels "t5,t19,..."] \
 *        [--overlay] [--metric fraction|count]
 *   node dist/cli.js modularity --in matrix.csv --out prefix
 *        (writes prefix_heatmap.svg and prefix_histogram.svg)
 */

import { readFileSync, writeFileSync } from "fs";
import { basename } from "path";
import { pathToFileURL } from "url";

import {
  AxisMode,
  buildCurveGrid,
  buildHeatmap,
  buildHistogram,
  buildOverlay,
} from "./charts.js";
import { readMetricCurve, readModularityMatrix, readNullBand } from "./csv.js";

interface Flags {
  [key: string]: string | boolean;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument '${arg}'`);
    const name = arg.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      flags[name] = argv[++i];
    } else {
      flags[name] = true;
    }
  }
  return flags;
}

function requireString(flags: Flags, name: string): string {
  const value = flags[name];
  if (typeof value !== "string" || !value) {
    throw new Error(`--${name} is required`);
  }
  return value;
}

function defaultLabel(file: string): string {
  return basename(file).replace(/\.csv$/, "");
}

function cmdCurves(flags: Flags): void {
  const files = requireString(flags, "in").split(",").filter(Boolean);
  const out = requireString(flags, "out");
  const axisRaw = typeof flags.axis === "string" ? flags.axis : "nodes";
  if (axisRaw !== "nodes" && axisRaw !== "month") {
    throw new Error(`--axis must be 'nodes' or 'month', got '${axisRaw}'`);
  }
  const labels =
    typeof flags.labels === "string" ? flags.labels.split(",") : files.map(defaultLabel);
  if (labels.length !== files.length) {
    throw new Error(`--labels names ${labels.length} series for ${files.length} inputs`);
  }
  const curves = files.map((file, i) => ({
    label: labels[i],
    rows: readMetricCurve(file, readFileSync(file, "utf-8")),
  }));

  if (flags.overlay) {
    const metricRaw = typeof flags.metric === "string" ? flags.metric : "fraction";
    if (metricRaw !== "fraction" && metricRaw !== "count") {
      throw new Error(`--metric must be 'fraction' or 'count', got '${metricRaw}'`);
    }
    // Lifetime overlays read more naturally against time.
    const axis: AxisMode = typeof flags.axis === "string" ? (axisRaw as AxisMode) : "month";
    writeFileSync(out, buildOverlay({ curves, axis, metric: metricRaw }));
  } else {
    const nullBand =
      typeof flags.null === "string"
        ? readNullBand(flags.null, readFileSync(flags.null, "utf-8"))
        : undefined;
    writeFileSync(out, buildCurveGrid({ curves, nullBand, axis: axisRaw }));
  }
  console.log(out);
}

function cmdModularity(flags: Flags): void {
  const file = requireString(flags, "in");
  const prefix = requireString(flags, "out");
  const matrix = readModularityMatrix(file, readFileSync(file, "utf-8"));
  const heatmapPath = `${prefix}_heatmap.svg`;
  const histogramPath = `${prefix}_histogram.svg`;
  writeFileSync(heatmapPath, buildHeatmap(matrix));
  writeFileSync(histogramPath, buildHistogram(matrix));
  console.log(heatmapPath);
  console.log(histogramPath);
}

export function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command === "curves") {
      cmdCurves(parseFlags(rest));
    } else if (command === "modularity") {
      cmdModularity(parseFlags(rest));
    } else {
      throw new Error(
        `usage: cli.js <curves|modularity> --in <csv> --out <path> [...]`
      );
    }
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (
  process.argv[1] &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exitCode = main(process.argv.slice(2));
}
