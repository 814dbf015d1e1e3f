import * as fs from "node:fs";
import * as path from "node:path";

import { finetuneMasked } from "./finetune.js";
import { accuracy } from "./mlp.js";
import {
  crossPositions,
  repurposeModel,
  sparsifyModel,
  twoWorkerPartition,
  writePartition,
} from "./primary.js";
import { readModel, readRepurposeInfo } from "./rpm.js";
import { TrainSpiralOptions, TrainSpiralResult, exportModel, trainSpiral } from "./train.js";

export interface TradeoffPoint {
  eta2: number;
  seed: number;
  crossFrac: number;
  accRp: number;
  accRpFt: number;
  accSparse: number;
}

export interface TradeoffOptions {
  workDir: string;
  ftEpochs?: number;
  trainOpts?: TrainSpiralOptions;
}

const trainCache = new Map<string, TrainSpiralResult>();

/** Train once per (seed, options) and reuse across sweep points and tests. */
export function cachedTraining(seed: number, opts: TrainSpiralOptions = {}): TrainSpiralResult {
  const key = `${seed}:${JSON.stringify(opts)}`;
  let hit = trainCache.get(key);
  if (!hit) {
    hit = trainSpiral(seed, opts);
    trainCache.set(key, hit);
  }
  return hit;
}

/**
 * Sweep the cross-edge penalty for both restructuring paths.
 *
 * For every (seed, eta2): restructure, measure the surviving cross-edge
 * fraction and raw accuracy, fine-tune with the mask frozen, and evaluate the
 * no-permutation sparsification baseline (no fine-tuning, matching the
 * comparison this curve is meant to expose).
 */
export function tradeoffCurve(
  etas: number[],
  seeds: number[],
  opts: TradeoffOptions
): TradeoffPoint[] {
  const points: TradeoffPoint[] = [];
  for (const seed of seeds) {
    const trained = cachedTraining(seed, opts.trainOpts ?? {});
    const seedDir = path.join(opts.workDir, `seed${seed}`);
    const modelDir = path.join(seedDir, "model");
    exportModel(trained, modelDir);
    const partition = twoWorkerPartition(trained.params.widths);
    const partitionFile = path.join(seedDir, "partition.json");
    writePartition(partitionFile, partition);
    const positions = crossPositions(partition);
    for (const eta2 of etas) {
      const tag = eta2.toString().replace(".", "p");
      const rpDir = repurposeModel(modelDir, partitionFile, eta2, path.join(seedDir, `rp-${tag}`));
      const info = readRepurposeInfo(rpDir);
      const crossFrac = info.cross_edges_after.reduce((a, v) => a + v, 0) / positions;
      const labelMap = Int32Array.from(info.permutations[info.permutations.length - 1]);
      const accRp = accuracy(readModel(rpDir), trained.testData, labelMap);
      const ft = finetuneMasked({
        modelDir: rpDir,
        trainData: trained.trainData,
        testData: trained.testData,
        epochs: opts.ftEpochs ?? 100,
        seed: seed + 17,
      });
      const spDir = sparsifyModel(modelDir, partitionFile, eta2, path.join(seedDir, `sp-${tag}`));
      const accSparse = accuracy(readModel(spDir), trained.testData);
      points.push({
        eta2,
        seed,
        crossFrac,
        accRp,
        accRpFt: ft.testAccuracy,
        accSparse,
      });
    }
  }
  return points;
}

/** CSV with one row per eta2, averaged across seeds. */
export function tradeoffCsv(points: TradeoffPoint[]): string {
  const byEta = new Map<number, TradeoffPoint[]>();
  for (const p of points) {
    const bucket = byEta.get(p.eta2) ?? [];
    bucket.push(p);
    byEta.set(p.eta2, bucket);
  }
  const lines = ["eta2,cross_frac,acc_rp,acc_rp_ft,acc_sparse"];
  const mean = (xs: number[]) => xs.reduce((a, v) => a + v, 0) / xs.length;
  for (const eta2 of [...byEta.keys()].sort((a, b) => a - b)) {
    const bucket = byEta.get(eta2)!;
    lines.push(
      [
        eta2,
        mean(bucket.map((p) => p.crossFrac)),
        mean(bucket.map((p) => p.accRp)),
        mean(bucket.map((p) => p.accRpFt)),
        mean(bucket.map((p) => p.accSparse)),
      ].join(",")
    );
  }
  return lines.join("\n") + "\n";
}

export function writeTradeoffCsv(points: TradeoffPoint[], file: string): void {
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, tradeoffCsv(points));
}

export interface MatchedComparison {
  seed: number;
  rpEta2: number;
  rpFrac: number;
  accRpFt: number;
  spEta2: number;
  spFrac: number;
  accSparse: number;
}

/**
 * For each seed, walk the penalty grid until each path's surviving
 * cross-edge fraction is at or below ``budget`` and compare accuracies
 * there (fine-tuned restructuring vs raw sparsification).
 */
export function matchedBudgetComparison(
  seeds: number[],
  budget: number,
  opts: TradeoffOptions,
  grid: number[] = [0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.8, 1.2, 2.0, 4.0]
): MatchedComparison[] {
  const results: MatchedComparison[] = [];
  for (const seed of seeds) {
    const trained = cachedTraining(seed, opts.trainOpts ?? {});
    const seedDir = path.join(opts.workDir, `match${seed}`);
    const modelDir = path.join(seedDir, "model");
    exportModel(trained, modelDir);
    const partition = twoWorkerPartition(trained.params.widths);
    const partitionFile = path.join(seedDir, "partition.json");
    writePartition(partitionFile, partition);
    const positions = crossPositions(partition);

    let rp: { eta2: number; frac: number; acc: number } | null = null;
    for (const eta2 of grid) {
      const dir = repurposeModel(modelDir, partitionFile, eta2, path.join(seedDir, "rp"));
      const info = readRepurposeInfo(dir);
      const frac = info.cross_edges_after.reduce((a, v) => a + v, 0) / positions;
      if (frac <= budget) {
        const ft = finetuneMasked({
          modelDir: dir,
          trainData: trained.trainData,
          testData: trained.testData,
          epochs: opts.ftEpochs ?? 100,
          seed: seed + 17,
        });
        rp = { eta2, frac, acc: ft.testAccuracy };
        break;
      }
    }
    let sp: { eta2: number; frac: number; acc: number } | null = null;
    for (const eta2 of grid) {
      const dir = sparsifyModel(modelDir, partitionFile, eta2, path.join(seedDir, "sp"));
      const info = readRepurposeInfo(dir);
      const frac = info.cross_edges_after.reduce((a, v) => a + v, 0) / positions;
      if (frac <= budget) {
        sp = { eta2, frac, acc: accuracy(readModel(dir), trained.testData) };
        break;
      }
    }
    if (!rp || !sp) throw new Error(`seed ${seed}: no grid point reached budget ${budget}`);
    results.push({
      seed,
      rpEta2: rp.eta2,
      rpFrac: rp.frac,
      accRpFt: rp.acc,
      spEta2: sp.eta2,
      spFrac: sp.frac,
      accSparse: sp.acc,
    });
  }
  return results;
}
