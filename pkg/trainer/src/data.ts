import { Rng } from "./rng.js";

export interface Dataset {
  /** Row-major (n x 2): each row is one point, column i is sensor i's reading. */
  x: Float64Array;
  y: Uint8Array;
  n: number;
}

export interface SpiralOptions {
  perClass: number;
  noise: number;
  radius: number;
  turns: number;
}

/**
 * Two interleaved spirals; sensor 1 observes the first coordinate, sensor 2
 * the second.  Class counts are exactly balanced.  The radius is deliberately
 * large (default 8) so that trained first-layer weights stay small, which
 * keeps them prunable at the documented cross-edge penalty scale.
 */
export const SPIRAL_DEFAULTS: SpiralOptions = {
  perClass: 1500,
  noise: 0.45,
  radius: 8.0,
  turns: 1.5,
};

export function spiralDataset(rng: Rng, opts: SpiralOptions = SPIRAL_DEFAULTS): Dataset {
  const n = 2 * opts.perClass;
  const rawX = new Float64Array(n * 2);
  const rawY = new Uint8Array(n);
  let idx = 0;
  for (let c = 0; c < 2; c++) {
    for (let i = 0; i < opts.perClass; i++) {
      const t = rng.next();
      const theta = opts.turns * 2 * Math.PI * t + c * Math.PI;
      const r = opts.radius * t;
      rawX[idx * 2] = r * Math.cos(theta) + opts.noise * rng.normal();
      rawX[idx * 2 + 1] = r * Math.sin(theta) + opts.noise * rng.normal();
      rawY[idx] = c;
      idx++;
    }
  }
  const order = rng.permutation(n);
  const x = new Float64Array(n * 2);
  const y = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    x[i * 2] = rawX[order[i] * 2];
    x[i * 2 + 1] = rawX[order[i] * 2 + 1];
    y[i] = rawY[order[i]];
  }
  return { x, y, n };
}
