import * as path from "node:path";

import { finetuneMasked, saveFinetuned } from "./finetune.js";
import {
  crossPositions,
  repurposeModel,
  twoWorkerPartition,
  writePartition,
} from "./primary.js";
import { readRepurposeInfo } from "./rpm.js";
import { exportModel, trainSpiral } from "./train.js";
import { matchedBudgetComparison, tradeoffCurve, writeTradeoffCsv } from "./tradeoff.js";

function flag(args: string[], name: string, fallback: string): string {
  const i = args.indexOf(`--${name}`);
  return i >= 0 && i + 1 < args.length ? args[i + 1] : fallback;
}

function cmdTrain(args: string[]): number {
  const seed = parseInt(flag(args, "seed", "1"), 10);
  const out = flag(args, "out", "spiral-model");
  const epochs = parseInt(flag(args, "epochs", "0"), 10) || undefined;
  const result = trainSpiral(seed, { epochs });
  exportModel(result, out);
  console.log(`test accuracy ${result.testAccuracy.toFixed(4)} (seed ${result.seedUsed})`);
  console.log(`exported to ${out}`);
  return 0;
}

function cmdPipeline(args: string[]): number {
  const seed = parseInt(flag(args, "seed", "1"), 10);
  const eta2 = parseFloat(flag(args, "eta2", "0.1"));
  const out = flag(args, "out", "spiral-pipeline");
  const ftEpochs = parseInt(flag(args, "ft-epochs", "100"), 10);
  const epochs = parseInt(flag(args, "epochs", "0"), 10) || undefined;

  const trained = trainSpiral(seed, { epochs });
  const modelDir = path.join(out, "model");
  exportModel(trained, modelDir);
  const partition = twoWorkerPartition(trained.params.widths);
  const partitionFile = path.join(out, "partition.json");
  writePartition(partitionFile, partition);
  console.log(`trained: accuracy ${trained.testAccuracy.toFixed(4)}`);

  const rpDir = repurposeModel(modelDir, partitionFile, eta2, path.join(out, "restructured"));
  const info = readRepurposeInfo(rpDir);
  const frac = info.cross_edges_after.reduce((a, v) => a + v, 0) / crossPositions(partition);
  console.log(
    `restructured at eta2=${eta2}: cross edges ${info.cross_edges_before} -> ` +
      `${info.cross_edges_after} (${(100 * frac).toFixed(2)}% of cross positions)`
  );

  const ft = finetuneMasked({
    modelDir: rpDir,
    trainData: trained.trainData,
    testData: trained.testData,
    epochs: ftEpochs,
    seed: seed + 17,
  });
  saveFinetuned(ft, path.join(out, "finetuned"));
  console.log(
    `fine-tuned: accuracy ${ft.testAccuracy.toFixed(4)} ` +
      `(gap ${(100 * (trained.testAccuracy - ft.testAccuracy)).toFixed(2)} points, ` +
      `${ft.frozenZeros} frozen zeros)`
  );
  return 0;
}

function cmdTradeoff(args: string[]): number {
  const seeds = flag(args, "seeds", "1,2,3").split(",").map((s) => parseInt(s, 10));
  const etas = flag(args, "etas", "0,0.05,0.1,0.2,0.5").split(",").map(parseFloat);
  const out = flag(args, "out", "tradeoff");
  const ftEpochs = parseInt(flag(args, "ft-epochs", "100"), 10);
  const points = tradeoffCurve(etas, seeds, { workDir: out, ftEpochs });
  writeTradeoffCsv(points, path.join(out, "tradeoff.csv"));
  console.log(`wrote ${path.join(out, "tradeoff.csv")} (${points.length} points)`);
  return 0;
}

function cmdMatch(args: string[]): number {
  const seeds = flag(args, "seeds", "1,2,3,4,5").split(",").map((s) => parseInt(s, 10));
  const budget = parseFloat(flag(args, "budget", "0.01"));
  const out = flag(args, "out", "matched");
  const rows = matchedBudgetComparison(seeds, budget, { workDir: out });
  let rpSum = 0;
  let spSum = 0;
  for (const r of rows) {
    rpSum += r.accRpFt;
    spSum += r.accSparse;
    console.log(
      `seed ${r.seed}: fine-tuned restructuring ${r.accRpFt.toFixed(4)} ` +
        `(frac ${(100 * r.rpFrac).toFixed(2)}%) vs sparsify ${r.accSparse.toFixed(4)} ` +
        `(frac ${(100 * r.spFrac).toFixed(2)}%)`
    );
  }
  console.log(
    `means at <=${100 * budget}% cross edges: ` +
      `${(rpSum / rows.length).toFixed(4)} vs ${(spSum / rows.length).toFixed(4)}`
  );
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  switch (command) {
    case "train":
      return cmdTrain(rest);
    case "pipeline":
      return cmdPipeline(rest);
    case "tradeoff":
      return cmdTradeoff(rest);
    case "match":
      return cmdMatch(rest);
    default:
      console.error("usage: cli.js {train|pipeline|tradeoff|match} [--flags]");
      return 2;
  }
}

process.exit(main(process.argv.slice(2)));
