import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import {
  datashiftsBound,
  estimateShifts,
  runCli,
  toCsv,
  type BoundReport,
  type Matrix,
  type ShiftReport,
} from "../src/index.js";

// Deterministic pseudo-random fixtures (mulberry32) so the suite needs no RNG
// dependency and both sides of every parity check see identical doubles.
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussianCloud(n: number, d: number, shift: number, seed: number): Matrix {
  const rand = mulberry32(seed);
  const rows: Matrix = [];
  for (let i = 0; i < n; i++) {
    const row: number[] = [];
    for (let j = 0; j < d; j++) {
      // Box-Muller
      const u = Math.max(rand(), 1e-12);
      const v = rand();
      row.push(Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v) + (j === 0 ? shift : 0));
    }
    rows.push(row);
  }
  return rows;
}

const linearLabels = (x: Matrix, offset = 0): number[] =>
  x.map((row) => row.reduce((s, v) => s + v, offset));

const OPTS = { beta: 0.01, seed: 3, marginalTol: 1e-4 };

const scratch = mkdtempSync(join(tmpdir(), "datashifts-parity-"));
afterAll(() => rmSync(scratch, { recursive: true, force: true }));

/** Run the CLI directly on CSVs serialized exactly as the bindings do. */
function cliReference(
  sourceX: Matrix,
  sourceY: number[] | null,
  targetX: Matrix,
  targetY: number[] | null,
  subcommand: string,
  extra: string[] = []
): ShiftReport & Partial<BoundReport> {
  const src = join(scratch, `${subcommand}-src.csv`);
  const tgt = join(scratch, `${subcommand}-tgt.csv`);
  writeFileSync(src, toCsv(sourceX, sourceY));
  writeFileSync(tgt, toCsv(targetX, targetY));
  const args = [
    subcommand,
    "--source", src,
    "--target", tgt,
    "--beta", "0.01",
    "--seed", "3",
    "--marginal-tol", "0.0001",
    ...(sourceY !== null ? ["--label-cols", "y"] : []),
    ...extra,
  ];
  return JSON.parse(runCli(args));
}

function expectParity(actual: Record<string, unknown>, reference: Record<string, unknown>) {
  expect(Object.keys(actual).sort()).toEqual(Object.keys(reference).sort());
  for (const key of Object.keys(reference)) {
    const a = actual[key];
    const r = reference[key];
    if (typeof r === "number" && typeof a === "number") {
      expect(Math.abs(a - r)).toBeLessThanOrEqual(1e-12);
    } else {
      expect(a).toEqual(r);
    }
  }
}

describe("parity with the CLI on shared fixtures", () => {
  it("unlabeled covariate shift", () => {
    const sx = gaussianCloud(16, 2, 0, 1);
    const tx = gaussianCloud(16, 2, 1.5, 2);
    const report = estimateShifts(sx, null, tx, null, OPTS);
    expectParity(report, cliReference(sx, null, tx, null, "xshift"));
    expect(report.s_cov).toBeGreaterThan(0);
    expect(report.s_cpt).toBeNull();
  });

  it("labeled concept shift", () => {
    const sx = gaussianCloud(14, 3, 0, 5);
    const tx = gaussianCloud(14, 3, 1, 6);
    const sy = linearLabels(sx);
    const ty = linearLabels(tx, 0.5);
    const report = estimateShifts(sx, sy, tx, ty, OPTS);
    expectParity(report, cliReference(sx, sy, tx, ty, "yshift"));
    expect(report.s_cpt).toBeGreaterThan(0);
  });

  it("full bound report", () => {
    const sx = gaussianCloud(12, 2, 0, 9);
    const tx = gaussianCloud(12, 2, 1, 10);
    const sy = linearLabels(sx);
    const ty = linearLabels(tx, 1);
    const lipschitz = { lH: 2.0, loss: { kind: "absolute_error" as const } };
    const report = datashiftsBound(sx, sy, tx, ty, lipschitz, 0.1, OPTS);
    const reference = cliReference(sx, sy, tx, ty, "bound", [
      "--lipschitz", JSON.stringify({ l_h: 2.0, loss: { kind: "absolute_error" } }),
      "--source-error", "0.1",
    ]);
    expectParity(report, reference);
    expect(report.bound).toBeCloseTo(report.source_error + report.x_term + report.y_term, 12);
  });
});

describe("mirrored behavior", () => {
  it("a duplicated dataset has (near) zero shifts", () => {
    const x = gaussianCloud(20, 2, 0, 4);
    const y = linearLabels(x);
    const report = estimateShifts(x, y, x, y, {
      beta: 1e-4,
      estimator: "plugin",
      maxIter: 500000,
    });
    expect(report.s_cov).toBeLessThanOrEqual(1e-3);
    expect(report.s_cpt!).toBeLessThanOrEqual(1e-3);
  });

  it("invalid beta surfaces the primary diagnostic text", () => {
    const x = gaussianCloud(8, 2, 0, 7);
    expect(() => estimateShifts(x, null, x, null, { beta: -1 })).toThrow(
      /beta must be >= 0/
    );
  });

  it("dimension mismatch surfaces the primary diagnostic text", () => {
    const sx = gaussianCloud(8, 2, 0, 7);
    const tx = gaussianCloud(8, 3, 0, 8);
    expect(() => estimateShifts(sx, null, tx, null, OPTS)).toThrow(
      /dimensions differ/
    );
  });

  it("label/covariate row mismatch is rejected before any subprocess runs", () => {
    const x = gaussianCloud(8, 2, 0, 7);
    expect(() => estimateShifts(x, [1, 2], x, linearLabels(x), OPTS)).toThrow(
      /label rows \(2\) != covariate rows \(8\)/
    );
  });
});
