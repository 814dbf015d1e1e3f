import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { cachedTraining, tradeoffCsv, tradeoffCurve } from "../src/tradeoff.js";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "tradeoff-test-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

// tiny model: plumbing check, not the benchmark
const SHORT = { epochs: 40, perClass: 300, minAccuracy: 0, maxAttempts: 1, arch: [2, 16, 16, 2] };

describe("trade-off sweep", () => {
  it("zero penalty keeps both paths at the original accuracy with all cross edges", () => {
    const points = tradeoffCurve([0], [41], { workDir: tmp, ftEpochs: 0, trainOpts: SHORT });
    expect(points).toHaveLength(1);
    const p = points[0];
    const original = cachedTraining(41, SHORT).testAccuracy;
    expect(p.crossFrac).toBe(1.0); // dense model occupies every cross position
    expect(p.accRp).toBe(original); // permutation alone cannot change decisions
    expect(p.accSparse).toBe(original);
    expect(p.accRpFt).toBe(p.accRp); // 0 fine-tune epochs
  });

  it("larger penalties prune monotonically more cross edges", () => {
    const points = tradeoffCurve([0, 0.1, 0.5], [41], {
      workDir: tmp,
      ftEpochs: 0,
      trainOpts: SHORT,
    });
    const fracs = points.map((p) => p.crossFrac);
    expect(fracs[0]).toBeGreaterThanOrEqual(fracs[1]);
    expect(fracs[1]).toBeGreaterThanOrEqual(fracs[2]);
  });

  it("emits the pinned CSV columns, one row per penalty", () => {
    const points = tradeoffCurve([0, 0.2], [41], { workDir: tmp, ftEpochs: 0, trainOpts: SHORT });
    const csv = tradeoffCsv(points);
    const lines = csv.trim().split("\n");
    expect(lines[0]).toBe("eta2,cross_frac,acc_rp,acc_rp_ft,acc_sparse");
    expect(lines).toHaveLength(3);
    for (const line of lines.slice(1)) expect(line.split(",")).toHaveLength(5);
  });
});
