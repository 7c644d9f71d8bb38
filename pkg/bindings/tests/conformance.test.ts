/**
 * Cross-component conformance: every binding call must reproduce, record
 * for record, what the claimuq CLI writes when run by hand on the same
 * corpus. The corpus is 1,000 deterministic fixtures from the package's
 * synthetic generator, so the suite needs an installed claimuq but no
 * dataset.
 */
import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import {
  aggregate,
  type ClaimScoreRecord,
  maxLikelihood,
  type PartitionRecord,
  type SampleRecord,
  segmentSamples,
  tokenEntropy,
  tokenLikelihood,
  type TokenScoreRecord,
} from "../src/index.js";

const FIXTURE_COUNT = 1000;
const SEED = 7;

/** Run the reference CLI, honoring the same override as the binding. */
function cli(args: string[]): void {
  const parts = (process.env.CLAIMUQ_BIN ?? "claimuq").split(" ");
  execFileSync(parts[0], [...parts.slice(1), ...args], {
    encoding: "utf8",
    maxBuffer: 1 << 26,
  });
}

/** Independent of the binding's own JSONL reader on purpose. */
function parseJsonl<T>(path: string): T[] {
  return readFileSync(path, "utf8")
    .split("\n")
    .filter((line) => line.length > 0)
    .map((line) => JSON.parse(line) as T);
}

/** Ids of rows that are not JSON-identical between the two runs. */
function mismatchedIds(
  got: Array<{ sample_id: string }>,
  want: Array<{ sample_id: string }>,
): string[] {
  expect(got).toHaveLength(want.length);
  const out: string[] = [];
  for (let i = 0; i < got.length; i += 1) {
    if (JSON.stringify(got[i]) !== JSON.stringify(want[i])) {
      out.push(got[i].sample_id);
    }
  }
  return out;
}

let work: string;
let samples: SampleRecord[];

const oracle = {} as {
  partitions: PartitionRecord[];
  tokenLikelihood: TokenScoreRecord[];
  maxLikelihood: TokenScoreRecord[];
  entropy10: TokenScoreRecord[];
  product: ClaimScoreRecord[];
  mean: ClaimScoreRecord[];
};

const binding = {} as typeof oracle;

beforeAll(() => {
  work = mkdtempSync(join(tmpdir(), "claimuq-conformance-"));
  const p = (name: string) => join(work, name);
  const samplesPath = p("samples.jsonl");

  execFileSync("python3", [
    "-m", "claimuq._synth",
    "--count", String(FIXTURE_COUNT),
    "--seed", String(SEED),
    "--out", samplesPath,
  ], { encoding: "utf8" });

  cli(["segment", "--input", samplesPath, "--output", p("partitions.jsonl")]);
  cli(["score", "--input", samplesPath, "--output", p("tl.jsonl"),
       "--scorer", "token_likelihood"]);
  cli(["score", "--input", samplesPath, "--output", p("ml.jsonl"),
       "--scorer", "max_likelihood"]);
  cli(["score", "--input", samplesPath, "--output", p("ent10.jsonl"),
       "--scorer", "token_entropy", "--entropy-top-k", "10"]);
  cli(["aggregate", "--scores", p("tl.jsonl"),
       "--partitions", p("partitions.jsonl"), "--output", p("product.jsonl"),
       "--agg", "product", "--input", samplesPath]);
  cli(["aggregate", "--scores", p("tl.jsonl"),
       "--partitions", p("partitions.jsonl"), "--output", p("mean.jsonl"),
       "--agg", "mean", "--input", samplesPath]);

  oracle.partitions = parseJsonl(p("partitions.jsonl"));
  oracle.tokenLikelihood = parseJsonl(p("tl.jsonl"));
  oracle.maxLikelihood = parseJsonl(p("ml.jsonl"));
  oracle.entropy10 = parseJsonl(p("ent10.jsonl"));
  oracle.product = parseJsonl(p("product.jsonl"));
  oracle.mean = parseJsonl(p("mean.jsonl"));

  // The binding side starts from parsed records, so any loss in its
  // serialize/parse round trip shows up as a mismatch below.
  samples = parseJsonl<SampleRecord>(samplesPath);
  binding.partitions = segmentSamples(samples);
  binding.tokenLikelihood = tokenLikelihood(samples);
  binding.maxLikelihood = maxLikelihood(samples);
  binding.entropy10 = tokenEntropy(samples, 10);
  binding.product = aggregate(binding.tokenLikelihood, binding.partitions, {
    samples,
  });
  binding.mean = aggregate(binding.tokenLikelihood, binding.partitions, {
    samples,
    aggregator: "mean",
  });
});

afterAll(() => {
  rmSync(work, { recursive: true, force: true });
});

describe("cross-component conformance", () => {
  it("works the full fixture corpus", () => {
    expect(samples).toHaveLength(FIXTURE_COUNT);
  });

  it("partitions every fixture identically", () => {
    expect(mismatchedIds(binding.partitions, oracle.partitions)).toEqual([]);
  });

  it("reproduces token likelihood scores exactly", () => {
    expect(mismatchedIds(binding.tokenLikelihood, oracle.tokenLikelihood))
      .toEqual([]);
  });

  it("reproduces max likelihood scores exactly", () => {
    expect(mismatchedIds(binding.maxLikelihood, oracle.maxLikelihood))
      .toEqual([]);
  });

  it("reproduces top-10 entropy scores exactly", () => {
    expect(mismatchedIds(binding.entropy10, oracle.entropy10)).toEqual([]);
  });

  it("reproduces product-aggregated claim scores exactly", () => {
    expect(mismatchedIds(binding.product, oracle.product)).toEqual([]);
  });

  it("reproduces mean-aggregated claim scores exactly", () => {
    expect(mismatchedIds(binding.mean, oracle.mean)).toEqual([]);
  });
});
