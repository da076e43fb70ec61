/**
 * Readers for the pipeline's documented CSV outputs.
 *
 * Metric curves:  month_index,year_month,n_nodes,n_edges,gcc_nodes,
 *                 gcc_fraction,mean_path_length,path_mode
 * Null bands:     bin_lo,bin_hi,mean_gcc_fraction,std_gcc_fraction,
 *                 mean_mpl,std_mpl
 * Modularity:     topic_a,topic_b,q_over_qmax  (full square, long format)
 */

export interface MetricRow {
  month: number;
  yearMonth: string;
  nNodes: number;
  nEdges: number;
  gccNodes: number;
  gccFraction: number;
  meanPathLength: number | null;
  pathMode: string;
}

export interface NullBandRow {
  binLo: number;
  binHi: number;
  meanGccFraction: number;
  stdGccFraction: number;
  meanMpl: number | null;
  stdMpl: number | null;
}

export interface ModularityMatrix {
  topics: number[];
  /** value[i][j] = score for (topics[i], topics[j]); NaN when unavailable */
  values: number[][];
}

function splitCsv(text: string): string[][] {
  return text
    .trim()
    .split("\n")
    .map((line) => line.split(","));
}

function requireColumns(file: string, header: string[], needed: string[]): number[] {
  return needed.map((name) => {
    const idx = header.indexOf(name);
    if (idx < 0) throw new Error(`${file}: missing column '${name}'`);
    return idx;
  });
}

function num(text: string): number {
  const value = Number(text);
  if (text === "" || Number.isNaN(value)) {
    throw new Error(`expected a number, got '${text}'`);
  }
  return value;
}

function optional(text: string): number | null {
  return text === "" ? null : num(text);
}

export function readMetricCurve(file: string, text: string): MetricRow[] {
  const rows = splitCsv(text);
  const cols = requireColumns(file, rows[0], [
    "month_index",
    "year_month",
    "n_nodes",
    "n_edges",
    "gcc_nodes",
    "gcc_fraction",
    "mean_path_length",
    "path_mode",
  ]);
  return rows.slice(1).map((r) => ({
    month: num(r[cols[0]]),
    yearMonth: r[cols[1]],
    nNodes: num(r[cols[2]]),
    nEdges: num(r[cols[3]]),
    gccNodes: num(r[cols[4]]),
    gccFraction: num(r[cols[5]]),
    meanPathLength: optional(r[cols[6]]),
    pathMode: r[cols[7]],
  }));
}

export function readNullBand(file: string, text: string): NullBandRow[] {
  const rows = splitCsv(text);
  const cols = requireColumns(file, rows[0], [
    "bin_lo",
    "bin_hi",
    "mean_gcc_fraction",
    "std_gcc_fraction",
    "mean_mpl",
    "std_mpl",
  ]);
  return rows.slice(1).map((r) => ({
    binLo: num(r[cols[0]]),
    binHi: num(r[cols[1]]),
    meanGccFraction: num(r[cols[2]]),
    stdGccFraction: num(r[cols[3]]),
    meanMpl: optional(r[cols[4]]),
    stdMpl: optional(r[cols[5]]),
  }));
}

export function readModularityMatrix(file: string, text: string): ModularityMatrix {
  const rows = splitCsv(text);
  const cols = requireColumns(file, rows[0], ["topic_a", "topic_b", "q_over_qmax"]);
  const entries = new Map<string, number>();
  const topicSet = new Set<number>();
  for (const r of rows.slice(1)) {
    const a = num(r[cols[0]]);
    const b = num(r[cols[1]]);
    const raw = r[cols[2]];
    const q = raw === "nan" ? Number.NaN : num(raw);
    topicSet.add(a);
    topicSet.add(b);
    entries.set(`${a},${b}`, q);
  }
  const topics = [...topicSet].sort((x, y) => x - y);
  if (entries.size !== topics.length * topics.length) {
    throw new Error(
      `${file}: not a square matrix (${entries.size} entries for ` +
        `${topics.length} topics)`
    );
  }
  const values = topics.map((a) =>
    topics.map((b) => {
      const q = entries.get(`${a},${b}`);
      if (q === undefined) {
        throw new Error(`${file}: not a square matrix (missing pair ${a},${b})`);
      }
      return q;
    })
  );
  return { topics, values };
}
