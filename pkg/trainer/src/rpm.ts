import * as fs from "node:fs";
import * as path from "node:path";

import { MlpParams } from "./mlp.js";

/**
 * Reader/writer for the RPM v1 model directory format: manifest.json plus
 * one raw tensor file per weight/bias, little-endian float32, row-major,
 * headerless.
 */

interface ManifestLayer {
  kind: string;
  in: number;
  out: number;
  activation: string;
  weight: string;
  bias: string;
  dtype: string;
  layout: string;
  shape: number[];
}

function writeTensorLE(file: string, values: Float64Array): void {
  const buf = Buffer.alloc(values.length * 4);
  for (let i = 0; i < values.length; i++) buf.writeFloatLE(Math.fround(values[i]), i * 4);
  fs.writeFileSync(file, buf);
}

function readTensorLE(file: string, count: number): Float64Array {
  const buf = fs.readFileSync(file);
  if (buf.length !== count * 4) {
    throw new Error(`${file}: expected ${count * 4} bytes, found ${buf.length}`);
  }
  const out = new Float64Array(count);
  for (let i = 0; i < count; i++) out[i] = buf.readFloatLE(i * 4);
  return out;
}

export function writeModel(dir: string, params: MlpParams): void {
  fs.mkdirSync(dir, { recursive: true });
  const layers: ManifestLayer[] = [];
  for (let l = 0; l < params.W.length; l++) {
    const fanIn = params.widths[l];
    const fanOut = params.widths[l + 1];
    const weightFile = `layer${String(l).padStart(2, "0")}.weight.bin`;
    const biasFile = `layer${String(l).padStart(2, "0")}.bias.bin`;
    writeTensorLE(path.join(dir, weightFile), params.W[l]);
    writeTensorLE(path.join(dir, biasFile), params.b[l]);
    layers.push({
      kind: "dense",
      in: fanIn,
      out: fanOut,
      activation: params.activations[l],
      weight: weightFile,
      bias: biasFile,
      dtype: "f32",
      layout: "row-major",
      shape: [fanIn, fanOut],
    });
  }
  fs.writeFileSync(
    path.join(dir, "manifest.json"),
    JSON.stringify({ format_version: 1, layers }, null, 2)
  );
}

export function readModel(dir: string): MlpParams {
  const manifest = JSON.parse(fs.readFileSync(path.join(dir, "manifest.json"), "utf8"));
  if (manifest.format_version !== 1) {
    throw new Error(`unsupported format_version ${manifest.format_version}`);
  }
  const widths: number[] = [manifest.layers[0].in];
  const W: Float64Array[] = [];
  const b: Float64Array[] = [];
  const activations: string[] = [];
  for (const layer of manifest.layers as ManifestLayer[]) {
    if (layer.kind !== "dense") throw new Error(`unsupported layer kind ${layer.kind}`);
    widths.push(layer.out);
    W.push(readTensorLE(path.join(dir, layer.weight), layer.in * layer.out));
    b.push(readTensorLE(path.join(dir, layer.bias), layer.out));
    activations.push(layer.activation);
  }
  return { widths, W, b, activations };
}

export interface RepurposeInfo {
  permutations: number[][];
  per_layer_deviation: number[];
  cross_edges_before: number[];
  cross_edges_after: number[];
  eta1: number;
  eta2: number;
  certificate?: { tau: number; B: number; epsilon: number; bound: number };
}

export function readRepurposeInfo(dir: string): RepurposeInfo {
  return JSON.parse(fs.readFileSync(path.join(dir, "repurpose.json"), "utf8"));
}
