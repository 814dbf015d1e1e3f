import { Dataset } from "./data.js";
import { Rng } from "./rng.js";

/**
 * Three-dense-layer classifier (tanh, tanh, linear logits) with weights kept
 * in the same orientation as the interchange format: shape (fanIn, fanOut),
 * row-major, column j holding output neuron j's fan-in.
 *
 * Training is Adam on softmax cross-entropy with two pruning-oriented
 * touches: an L1 pull on the hidden-hidden layer (so unimportant cross
 * candidates shrink below the hard-threshold scale) and a hard magnitude cap
 * on the sensor-adjacent layers (first and last), which bounds those weights
 * under the pruning threshold entirely; the restructured model then pays for
 * communication only in the hidden layer.
 */

export interface MlpParams {
  widths: number[];
  W: Float64Array[];
  b: Float64Array[];
  activations: string[];
}

export interface TrainOptions {
  epochs: number;
  lr?: number;
  batch?: number;
  l1Hidden?: number;
  clipFirstLast?: number | null;
  /** per layer: 1 marks a frozen-zero weight position */
  masks?: Uint8Array[] | null;
  /** labelMap[c] = output index carrying class c (after restructuring) */
  labelMap?: Int32Array | null;
  /** multiply lr by lrDecayFactor once this fraction of the epochs is done */
  lrDecayAt?: number;
  lrDecayFactor?: number;
}

export function initMlp(rng: Rng, widths: number[]): MlpParams {
  const W: Float64Array[] = [];
  const b: Float64Array[] = [];
  for (let l = 0; l < widths.length - 1; l++) {
    const fanIn = widths[l];
    const fanOut = widths[l + 1];
    const scale = Math.sqrt(2.0 / (fanIn + fanOut));
    const w = new Float64Array(fanIn * fanOut);
    for (let i = 0; i < w.length; i++) w[i] = scale * rng.normal();
    W.push(w);
    b.push(new Float64Array(fanOut));
  }
  const activations = widths.slice(1).map((_, l) => (l < widths.length - 2 ? "tanh" : "identity"));
  return { widths, W, b, activations };
}

export function cloneParams(p: MlpParams): MlpParams {
  return {
    widths: [...p.widths],
    W: p.W.map((w) => new Float64Array(w)),
    b: p.b.map((b) => new Float64Array(b)),
    activations: [...p.activations],
  };
}

/** Forward pass over a row-major batch (m x widths[0]); returns all activations. */
export function forwardBatch(p: MlpParams, x: Float64Array, m: number): Float64Array[] {
  const acts: Float64Array[] = [x];
  let cur = x;
  for (let l = 0; l < p.W.length; l++) {
    const fanIn = p.widths[l];
    const fanOut = p.widths[l + 1];
    const W = p.W[l];
    const bias = p.b[l];
    const out = new Float64Array(m * fanOut);
    for (let i = 0; i < m; i++) {
      const xi = i * fanIn;
      const oi = i * fanOut;
      for (let j = 0; j < fanOut; j++) out[oi + j] = bias[j];
      for (let k = 0; k < fanIn; k++) {
        const a = cur[xi + k];
        if (a === 0) continue;
        const wk = k * fanOut;
        for (let j = 0; j < fanOut; j++) out[oi + j] += a * W[wk + j];
      }
    }
    if (p.activations[l] === "tanh") {
      for (let i = 0; i < out.length; i++) out[i] = Math.tanh(out[i]);
    }
    acts.push(out);
    cur = out;
  }
  return acts;
}

export function accuracy(p: MlpParams, data: Dataset, labelMap: Int32Array | null = null): number {
  const logits = forwardBatch(p, data.x, data.n);
  const out = logits[logits.length - 1];
  const classes = p.widths[p.widths.length - 1];
  let correct = 0;
  for (let i = 0; i < data.n; i++) {
    let best = 0;
    for (let j = 1; j < classes; j++) if (out[i * classes + j] > out[i * classes + best]) best = j;
    const target = labelMap ? labelMap[data.y[i]] : data.y[i];
    if (best === target) correct++;
  }
  return correct / data.n;
}

export interface Gradients {
  gW: Float64Array[];
  gB: Float64Array[];
}

/** Mean softmax cross-entropy over a row-major batch. */
export function crossEntropy(
  p: MlpParams,
  x: Float64Array,
  y: Uint8Array,
  m: number,
  labelMap: Int32Array | null = null
): number {
  const acts = forwardBatch(p, x, m);
  const logits = acts[acts.length - 1];
  const classes = p.widths[p.widths.length - 1];
  let total = 0;
  for (let i = 0; i < m; i++) {
    const oi = i * classes;
    let maxv = -Infinity;
    for (let j = 0; j < classes; j++) maxv = Math.max(maxv, logits[oi + j]);
    let sum = 0;
    for (let j = 0; j < classes; j++) sum += Math.exp(logits[oi + j] - maxv);
    const target = labelMap ? labelMap[y[i]] : y[i];
    total += -(logits[oi + target] - maxv - Math.log(sum));
  }
  return total / m;
}

/** Backprop of the mean cross-entropy through every layer. */
export function lossGradients(
  p: MlpParams,
  x: Float64Array,
  y: Uint8Array,
  m: number,
  labelMap: Int32Array | null = null
): Gradients {
  const L = p.W.length;
  const classes = p.widths[L];
  const acts = forwardBatch(p, x, m);
  const logits = acts[L];
  let g = new Float64Array(m * classes);
  for (let i = 0; i < m; i++) {
    const oi = i * classes;
    let maxv = -Infinity;
    for (let j = 0; j < classes; j++) maxv = Math.max(maxv, logits[oi + j]);
    let sum = 0;
    for (let j = 0; j < classes; j++) {
      g[oi + j] = Math.exp(logits[oi + j] - maxv);
      sum += g[oi + j];
    }
    const target = labelMap ? labelMap[y[i]] : y[i];
    for (let j = 0; j < classes; j++) {
      g[oi + j] = (g[oi + j] / sum - (j === target ? 1 : 0)) / m;
    }
  }
  const gW: Float64Array[] = new Array(L);
  const gB: Float64Array[] = new Array(L);
  for (let l = L - 1; l >= 0; l--) {
    const fanIn = p.widths[l];
    const fanOut = p.widths[l + 1];
    const below = acts[l];
    gW[l] = new Float64Array(fanIn * fanOut);
    gB[l] = new Float64Array(fanOut);
    for (let i = 0; i < m; i++) {
      const xi = i * fanIn;
      const oi = i * fanOut;
      for (let j = 0; j < fanOut; j++) gB[l][j] += g[oi + j];
      for (let k = 0; k < fanIn; k++) {
        const a = below[xi + k];
        if (a === 0) continue;
        const wk = k * fanOut;
        for (let j = 0; j < fanOut; j++) gW[l][wk + j] += a * g[oi + j];
      }
    }
    if (l > 0) {
      const gPrev = new Float64Array(m * fanIn);
      const W = p.W[l];
      for (let i = 0; i < m; i++) {
        const oi = i * fanOut;
        const xi = i * fanIn;
        for (let k = 0; k < fanIn; k++) {
          let acc = 0;
          const wk = k * fanOut;
          for (let j = 0; j < fanOut; j++) acc += g[oi + j] * W[wk + j];
          const a = below[xi + k];
          gPrev[xi + k] = acc * (1 - a * a);
        }
      }
      g = gPrev;
    }
  }
  return { gW, gB };
}

export function train(p: MlpParams, data: Dataset, rng: Rng, opts: TrainOptions): void {
  const lr = opts.lr ?? 5e-3;
  const batch = opts.batch ?? 128;
  const l1 = opts.l1Hidden ?? 0;
  const clip = opts.clipFirstLast ?? null;
  const masks = opts.masks ?? null;
  const labelMap = opts.labelMap ?? null;
  const L = p.W.length;

  const mW = p.W.map((w) => new Float64Array(w.length));
  const vW = p.W.map((w) => new Float64Array(w.length));
  const mB = p.b.map((b) => new Float64Array(b.length));
  const vB = p.b.map((b) => new Float64Array(b.length));
  const beta1 = 0.9;
  const beta2 = 0.999;
  const eps = 1e-8;
  let step = 0;

  const xBatch = new Float64Array(batch * p.widths[0]);
  const yBatch = new Uint8Array(batch);
  const decayAt = Math.floor((opts.lrDecayAt ?? 1.0) * opts.epochs);
  const decayFactor = opts.lrDecayFactor ?? 1.0;

  for (let epoch = 0; epoch < opts.epochs; epoch++) {
    const curLr = epoch >= decayAt ? lr * decayFactor : lr;
    const order = rng.permutation(data.n);
    for (let start = 0; start < data.n; start += batch) {
      const m = Math.min(batch, data.n - start);
      for (let i = 0; i < m; i++) {
        const src = order[start + i];
        xBatch[i * 2] = data.x[src * 2];
        xBatch[i * 2 + 1] = data.x[src * 2 + 1];
        yBatch[i] = data.y[src];
      }
      const { gW, gB } = lossGradients(p, xBatch, yBatch, m, labelMap);
      step++;
      const c1 = 1 - Math.pow(beta1, step);
      const c2 = 1 - Math.pow(beta2, step);
      for (let l = L - 1; l >= 0; l--) {
        const fanOut = p.widths[l + 1];
        const W = p.W[l];
        const bias = p.b[l];
        const applyL1 = l1 > 0 && l > 0 && l < L - 1;
        for (let i = 0; i < W.length; i++) {
          let grad = gW[l][i];
          if (applyL1) grad += l1 * Math.sign(W[i]);
          mW[l][i] = beta1 * mW[l][i] + (1 - beta1) * grad;
          vW[l][i] = beta2 * vW[l][i] + (1 - beta2) * grad * grad;
          W[i] -= (curLr * (mW[l][i] / c1)) / (Math.sqrt(vW[l][i] / c2) + eps);
        }
        for (let j = 0; j < fanOut; j++) {
          mB[l][j] = beta1 * mB[l][j] + (1 - beta1) * gB[l][j];
          vB[l][j] = beta2 * vB[l][j] + (1 - beta2) * gB[l][j] * gB[l][j];
          bias[j] -= (curLr * (mB[l][j] / c1)) / (Math.sqrt(vB[l][j] / c2) + eps);
        }
        if (clip !== null && (l === 0 || l === L - 1)) {
          for (let i = 0; i < W.length; i++) {
            if (W[i] > clip) W[i] = clip;
            else if (W[i] < -clip) W[i] = -clip;
          }
        }
        if (masks) {
          const mask = masks[l];
          for (let i = 0; i < W.length; i++) if (mask[i]) W[i] = 0;
        }
      }
    }
  }
}
