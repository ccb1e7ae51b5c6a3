/**
 * Thin wrapper over the `medoids` CLI: writes the data to a temp file, runs
 * `medoids fit`, and returns the parsed JSON payload. No clustering logic
 * lives here; field names and values match the CLI output exactly.
 *
 * The CLI command defaults to `medoids` on PATH and can be overridden with
 * the MEDOIDS_CLI environment variable (whitespace-separated argv prefix).
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface FitOptions {
  metric?: "l1" | "l2" | "cosine" | "tree-edit";
  algo?: "pam" | "fastpam1" | "banditpam" | "voronoi";
  seed?: number;
  batchSize?: number;
  delta?: number;
  ciMult?: number | "inf";
  maxSwaps?: number;
  verifySwaps?: boolean;
}

export interface FitOutput {
  medoid_indices: number[];
  labels: number[];
  loss: number;
  distance_evals: number;
  swap_count: number;
}

/** Raised when the CLI exits nonzero; carries its exit code and message. */
export class MedoidsCliError extends Error {
  constructor(message: string, public readonly exitCode: number) {
    super(message);
    this.name = "MedoidsCliError";
  }
}

function cliCommand(): string[] {
  const override = process.env.MEDOIDS_CLI;
  if (override && override.trim().length > 0) {
    return override.trim().split(/\s+/);
  }
  return ["medoids"];
}

function runCli(args: string[]): string {
  const [cmd, ...prefix] = cliCommand();
  const proc = spawnSync(cmd, [...prefix, ...args], { encoding: "utf-8" });
  if (proc.error) {
    throw new MedoidsCliError(`failed to launch ${cmd}: ${proc.error.message}`, -1);
  }
  if (proc.status !== 0) {
    const detail = (proc.stderr || proc.stdout || "").trim();
    throw new MedoidsCliError(detail || `medoids exited with ${proc.status}`, proc.status ?? -1);
  }
  return proc.stdout;
}

function writeDataFile(dir: string, data: number[][] | string[]): { path: string; format: string } {
  if (data.length === 0) {
    throw new Error("data must be non-empty");
  }
  if (typeof data[0] === "string") {
    const trees = data as string[];
    const path = join(dir, "data.trees");
    writeFileSync(path, trees.join("\n") + "\n");
    return { path, format: "trees" };
  }
  const rows = data as number[][];
  const width = rows[0].length;
  if (width === 0) {
    throw new Error("numeric rows must have at least one column");
  }
  for (const [index, row] of rows.entries()) {
    if (!Array.isArray(row) || row.length !== width) {
      throw new Error(`ragged rows: row ${index} has ${row?.length} cells, expected ${width}`);
    }
  }
  const path = join(dir, "data.csv");
  writeFileSync(path, rows.map((row) => row.join(",")).join("\n") + "\n");
  return { path, format: "csv" };
}

/**
 * Cluster the given points (numeric rows, or tree expressions like
 * "a(b,c(d))") into k medoids via the primary CLI.
 */
export function fit(
  data: number[][] | string[],
  k: number,
  options: FitOptions = {},
): FitOutput {
  if (!Number.isInteger(k) || k < 1) {
    throw new Error(`k must be a positive integer, got ${k}`);
  }
  const dir = mkdtempSync(join(tmpdir(), "medoids-"));
  try {
    const { path, format } = writeDataFile(dir, data);
    const outPath = join(dir, "fit.json");
    const metric = options.metric ?? (format === "trees" ? "tree-edit" : "l2");
    const args = [
      "fit",
      "--data", path,
      "--format", format,
      "--metric", metric,
      "--k", String(k),
      "--algo", options.algo ?? "banditpam",
      "--seed", String(options.seed ?? 0),
      "--out", outPath,
      "--out-format", "json",
    ];
    if (options.batchSize !== undefined) args.push("--batch-size", String(options.batchSize));
    if (options.delta !== undefined) args.push("--delta", String(options.delta));
    if (options.ciMult !== undefined) args.push("--ci-mult", String(options.ciMult));
    if (options.maxSwaps !== undefined) args.push("--max-swaps", String(options.maxSwaps));
    if (options.verifySwaps !== undefined) {
      args.push("--verify-swaps", options.verifySwaps ? "on" : "off");
    }
    runCli(args);
    const payload = JSON.parse(readFileSync(outPath, "utf-8"));
    return {
      medoid_indices: payload.medoid_indices,
      labels: payload.labels,
      loss: payload.loss,
      distance_evals: payload.distance_evals,
      swap_count: payload.swap_count,
    };
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

let cachedVersion: string | undefined;

/** Version of the underlying CLI (and therefore of these bindings). */
export function version(): string {
  if (cachedVersion === undefined) {
    const out = runCli(["--version"]);
    const match = out.match(/(\d+\.\d+\.\d+)/);
    if (!match) {
      throw new MedoidsCliError(`cannot parse version from ${JSON.stringify(out)}`, -1);
    }
    cachedVersion = match[1];
  }
  return cachedVersion;
}
