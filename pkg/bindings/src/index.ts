/**
 * Bindings over the `datashifts` command line.
 *
 * Every number returned here is computed by the Python package: arrays are
 * written to temporary CSV files, one CLI subprocess runs per call, and the
 * JSON report comes back verbatim. Nothing is re-implemented on this side,
 * so binding results match CLI results exactly.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export type Matrix = number[][];

export interface LossSpec {
  kind: "absolute_error" | "squared_error_bounded" | "cross_entropy_clamped";
  m?: number;
  a?: number;
}

export interface Lipschitz {
  lH: number;
  loss?: LossSpec;
  lLossLabel?: number;
  lLossOutput?: number;
}

export interface EstimateOptions {
  beta?: number;
  seed?: number;
  numSplits?: number;
  estimator?: "debiased" | "plugin";
  marginalTol?: number;
  maxIter?: number;
}

/** Mirrors the CLI's shift report (field names follow the JSON payload). */
export interface ShiftReport {
  s_cov: number;
  s_cpt: number | null;
  beta: number;
  n_source: number;
  n_target: number;
  estimator_kind: string;
  num_splits: number;
  seed: number;
}

/** Shift report plus the assembled error-bound decomposition. */
export interface BoundReport extends ShiftReport {
  source_error: number;
  x_term: number;
  y_term: number;
  bound: number;
  l_h: number;
  l_loss_label: number;
  l_loss_output: number;
}

const PYTHON = process.env.DATASHIFTS_PYTHON ?? "python3";

/**
 * Serialize rows to the headered CSV the CLI reads. Numbers use
 * `toString()`, the shortest round-trip decimal form, so the subprocess
 * reconstructs bit-identical doubles.
 */
export function toCsv(x: Matrix, y: number[] | null): string {
  const width = x[0]?.length ?? 0;
  const header = Array.from({ length: width }, (_, i) => `x${i + 1}`);
  if (y !== null) header.push("y");
  const lines = [header.join(",")];
  x.forEach((row, i) => {
    if (row.length !== width) {
      throw new Error(`row ${i} has ${row.length} columns, expected ${width}`);
    }
    const cells = row.map((v) => v.toString());
    if (y !== null) cells.push(y[i].toString());
    lines.push(cells.join(","));
  });
  return lines.join("\n") + "\n";
}

export function runCli(args: string[]): string {
  const proc = spawnSync(PYTHON, ["-m", "datashifts", ...args], {
    encoding: "utf8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (proc.error) throw proc.error;
  if (proc.status !== 0) {
    throw new Error(proc.stderr.trim() || `datashifts exited with ${proc.status}`);
  }
  return proc.stdout;
}

function checkShapes(x: Matrix, y: number[] | null, side: string): void {
  if (x.length === 0) throw new Error(`${side} sample must contain at least one row`);
  if (y !== null && y.length !== x.length) {
    throw new Error(
      `label rows (${y.length}) != covariate rows (${x.length})`
    );
  }
}

function commonArgs(dir: string, opts: EstimateOptions): string[] {
  const args = ["--source", join(dir, "source.csv"), "--target", join(dir, "target.csv")];
  if (opts.beta !== undefined) args.push("--beta", opts.beta.toString());
  if (opts.seed !== undefined) args.push("--seed", opts.seed.toString());
  if (opts.numSplits !== undefined) args.push("--num-splits", opts.numSplits.toString());
  if (opts.estimator !== undefined) args.push("--estimator", opts.estimator);
  if (opts.marginalTol !== undefined) args.push("--marginal-tol", opts.marginalTol.toString());
  if (opts.maxIter !== undefined) args.push("--max-iter", opts.maxIter.toString());
  return args;
}

function withSamples<T>(
  sourceX: Matrix,
  sourceY: number[] | null,
  targetX: Matrix,
  targetY: number[] | null,
  fn: (dir: string, labeled: boolean) => T
): T {
  checkShapes(sourceX, sourceY, "source");
  checkShapes(targetX, targetY, "target");
  const labeled = sourceY !== null && targetY !== null;
  const dir = mkdtempSync(join(tmpdir(), "datashifts-"));
  try {
    writeFileSync(join(dir, "source.csv"), toCsv(sourceX, labeled ? sourceY : null));
    writeFileSync(join(dir, "target.csv"), toCsv(targetX, labeled ? targetY : null));
    return fn(dir, labeled);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/**
 * Covariate shift (and concept shift when both label vectors are given)
 * between two in-memory samples.
 */
export function estimateShifts(
  sourceX: Matrix,
  sourceY: number[] | null,
  targetX: Matrix,
  targetY: number[] | null,
  opts: EstimateOptions = {}
): ShiftReport {
  return withSamples(sourceX, sourceY, targetX, targetY, (dir, labeled) => {
    const args = commonArgs(dir, opts);
    if (labeled) args.push("--label-cols", "y");
    return JSON.parse(runCli([labeled ? "yshift" : "xshift", ...args])) as ShiftReport;
  });
}

/**
 * Full pipeline: both shifts plus the error bound
 * B = source_error + l_h * l'_loss * s_cov + l_loss * s_cpt.
 */
export function datashiftsBound(
  sourceX: Matrix,
  sourceY: number[],
  targetX: Matrix,
  targetY: number[],
  lipschitz: Lipschitz,
  sourceError: number,
  opts: EstimateOptions = {}
): BoundReport {
  const fragment: Record<string, unknown> = { l_h: lipschitz.lH };
  if (lipschitz.loss !== undefined) {
    fragment.loss = lipschitz.loss;
  } else {
    fragment.l_loss_label = lipschitz.lLossLabel;
    fragment.l_loss_output = lipschitz.lLossOutput;
  }
  return withSamples(sourceX, sourceY, targetX, targetY, (dir) => {
    const args = [
      "bound",
      ...commonArgs(dir, opts),
      "--label-cols",
      "y",
      "--lipschitz",
      JSON.stringify(fragment),
      "--source-error",
      sourceError.toString(),
    ];
    return JSON.parse(runCli(args)) as BoundReport;
  });
}
