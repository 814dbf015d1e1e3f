import * as fs from "node:fs";
import * as path from "node:path";

import { Dataset } from "./data.js";
import { MlpParams, accuracy, cloneParams, train } from "./mlp.js";
import { Rng } from "./rng.js";
import { readModel, readRepurposeInfo, writeModel } from "./rpm.js";

export interface FineTuneJob {
  /** restructured model directory (RPM v1 + repurpose.json) */
  modelDir: string;
  trainData: Dataset;
  testData: Dataset;
  epochs: number;
  lr?: number;
  seed: number;
}

export interface FineTuneResult {
  params: MlpParams;
  testAccuracy: number;
  labelMap: Int32Array;
  masks: Uint8Array[];
  frozenZeros: number;
}

/**
 * Retrain a restructured model with its zero pattern frozen.
 *
 * The mask is the exact zero set of the pruned weights; gradients may move
 * every surviving weight and every bias, and masked entries are re-zeroed
 * after each optimizer step (projection onto the fixed support).  Because the
 * restructuring permuted the output neurons, class c is read from output
 * position permutations[last][c].
 */
export function finetuneMasked(job: FineTuneJob): FineTuneResult {
  const params = readModel(job.modelDir);
  const info = readRepurposeInfo(job.modelDir);
  const finalPerm = info.permutations[info.permutations.length - 1];
  const labelMap = Int32Array.from(finalPerm);
  const masks = params.W.map((w) => {
    const mask = new Uint8Array(w.length);
    for (let i = 0; i < w.length; i++) if (w[i] === 0) mask[i] = 1;
    return mask;
  });
  const tuned = cloneParams(params);
  if (job.epochs > 0) {
    train(tuned, job.trainData, new Rng(job.seed), {
      epochs: job.epochs,
      lr: job.lr ?? 5e-3,
      masks,
      labelMap,
    });
  }
  let frozenZeros = 0;
  for (let l = 0; l < tuned.W.length; l++) {
    for (let i = 0; i < tuned.W[l].length; i++) {
      if (masks[l][i]) {
        frozenZeros++;
        if (tuned.W[l][i] !== 0) throw new Error(`mask violated at layer ${l} index ${i}`);
      }
    }
  }
  return {
    params: tuned,
    testAccuracy: accuracy(tuned, job.testData, labelMap),
    labelMap,
    masks,
    frozenZeros,
  };
}

/** Save the fine-tuned model plus the frozen-mask record next to it. */
export function saveFinetuned(result: FineTuneResult, dir: string): void {
  writeModel(dir, result.params);
  const layers = result.masks.map((mask, l) => {
    const zeros: number[] = [];
    for (let i = 0; i < mask.length; i++) if (mask[i]) zeros.push(i);
    return {
      layer: l,
      shape: [result.params.widths[l], result.params.widths[l + 1]],
      zero_positions: zeros,
    };
  });
  fs.writeFileSync(path.join(dir, "mask.json"), JSON.stringify({ layers }, null, 2));
}
