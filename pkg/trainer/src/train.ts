import * as fs from "node:fs";
import * as path from "node:path";

import { Dataset, SPIRAL_DEFAULTS, SpiralOptions, spiralDataset } from "./data.js";
import { MlpParams, TrainOptions, accuracy, initMlp, train } from "./mlp.js";
import { Rng } from "./rng.js";
import { writeModel } from "./rpm.js";

export const ARCH = [2, 96, 96, 2];

export const RECIPE: Required<Pick<TrainOptions, "epochs" | "lr" | "batch" | "l1Hidden">> & {
  clipFirstLast: number;
} = {
  epochs: 300,
  lr: 5e-3,
  batch: 128,
  l1Hidden: 7e-4,
  clipFirstLast: 0.3,
};

export interface TrainSpiralOptions {
  epochs?: number;
  perClass?: number;
  testPerClass?: number;
  minAccuracy?: number;
  maxAttempts?: number;
  arch?: number[];
}

export interface TrainSpiralResult {
  params: MlpParams;
  testAccuracy: number;
  trainData: Dataset;
  testData: Dataset;
  seedUsed: number;
  attempts: { seed: number; accuracy: number }[];
}

/**
 * Train the two-sensor spiral classifier.  Training is stochastic: a run
 * below the accuracy floor is reported and retried with a derived seed.
 */
export function trainSpiral(seed: number, opts: TrainSpiralOptions = {}): TrainSpiralResult {
  const epochs = opts.epochs ?? RECIPE.epochs;
  const minAccuracy = opts.minAccuracy ?? 0.93;
  const maxAttempts = opts.maxAttempts ?? 3;
  const arch = opts.arch ?? ARCH;
  const attempts: { seed: number; accuracy: number }[] = [];
  let best: TrainSpiralResult | null = null;
  for (let attempt = 0; attempt < maxAttempts; attempt++) {
    const attemptSeed = seed + attempt * 1000;
    const rng = new Rng(attemptSeed);
    const spiralOpts: SpiralOptions = {
      ...SPIRAL_DEFAULTS,
      perClass: opts.perClass ?? SPIRAL_DEFAULTS.perClass,
    };
    const trainData = spiralDataset(rng, spiralOpts);
    const testData = spiralDataset(rng, {
      ...spiralOpts,
      perClass: opts.testPerClass ?? 750,
    });
    const params = initMlp(rng, arch);
    train(params, trainData, rng, {
      epochs,
      lr: RECIPE.lr,
      batch: RECIPE.batch,
      l1Hidden: RECIPE.l1Hidden,
      clipFirstLast: RECIPE.clipFirstLast,
      lrDecayAt: 0.8,
      lrDecayFactor: 0.3,
    });
    const acc = accuracy(params, testData);
    attempts.push({ seed: attemptSeed, accuracy: acc });
    const result: TrainSpiralResult = {
      params,
      testAccuracy: acc,
      trainData,
      testData,
      seedUsed: attemptSeed,
      attempts,
    };
    if (best === null || acc > best.testAccuracy) best = result;
    if (acc >= minAccuracy) return result;
    console.error(`training attempt seed=${attemptSeed} reached only ${acc.toFixed(4)}; retrying`);
  }
  if (best === null || best.testAccuracy < 0.9) {
    throw new Error(
      `training failure: best accuracy ${best?.testAccuracy ?? 0} after ${maxAttempts} attempts`
    );
  }
  return best;
}

/** Export the trained model plus a reproducibility record. */
export function exportModel(result: TrainSpiralResult, dir: string): void {
  writeModel(dir, result.params);
  fs.writeFileSync(
    path.join(dir, "training.json"),
    JSON.stringify(
      {
        seed: result.seedUsed,
        arch: result.params.widths,
        dataset: SPIRAL_DEFAULTS,
        recipe: RECIPE,
        test_accuracy: result.testAccuracy,
        attempts: result.attempts,
      },
      null,
      2
    )
  );
}
