import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";

/**
 * Bridge to the restructuring toolkit.  The trainer only ever talks to it
 * through its public surfaces: the CLI, RPM v1 directories, partition JSON
 * and repurpose.json.
 */

export interface PartitionCounts {
  workers: number;
  counts: number[][];
}

export function twoWorkerPartition(widths: number[]): PartitionCounts {
  return {
    workers: 2,
    counts: widths.map((w) => [Math.ceil(w / 2), Math.floor(w / 2)]),
  };
}

export function writePartition(file: string, partition: PartitionCounts): void {
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, JSON.stringify(partition, null, 2));
}

export function crossPositions(partition: PartitionCounts): number {
  let total = 0;
  for (let b = 0; b + 1 < partition.counts.length; b++) {
    const ins = partition.counts[b];
    const outs = partition.counts[b + 1];
    const all = ins.reduce((a, v) => a + v, 0) * outs.reduce((a, v) => a + v, 0);
    const diag = ins.reduce((a, v, k) => a + v * outs[k], 0);
    total += all - diag;
  }
  return total;
}

export function runPrimary(args: string[]): { status: number; stdout: string; stderr: string } {
  const proc = spawnSync("python3", ["-m", "repurpose", ...args], { encoding: "utf8" });
  if (proc.error) throw proc.error;
  return { status: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr };
}

export function runPrimaryOrThrow(args: string[]): string {
  const res = runPrimary(args);
  if (res.status !== 0) {
    throw new Error(`repurpose ${args[0]} failed (exit ${res.status}): ${res.stderr}`);
  }
  return res.stdout;
}

/** Restructure a model directory; returns the output directory. */
export function repurposeModel(
  modelDir: string,
  partitionFile: string,
  eta2: number,
  outDir: string
): string {
  runPrimaryOrThrow([
    "repurpose",
    modelDir,
    "--partition",
    partitionFile,
    "--eta2",
    String(eta2),
    "--out",
    outDir,
    "--quiet",
  ]);
  return outDir;
}

/** Prune without rearranging (baseline); returns the output directory. */
export function sparsifyModel(
  modelDir: string,
  partitionFile: string,
  eta2: number,
  outDir: string
): string {
  runPrimaryOrThrow([
    "sparsify",
    modelDir,
    "--partition",
    partitionFile,
    "--eta2",
    String(eta2),
    "--out",
    outDir,
    "--quiet",
  ]);
  return outDir;
}

/** Total cross-edge count of a model directory under a partition. */
export function crossEdgeTotal(modelDir: string, partitionFile: string): number {
  const out = runPrimaryOrThrow(["stats", modelDir, "--partition", partitionFile, "--quiet"]);
  return parseInt(out.trim(), 10);
}
