/**
 * Node bindings for the claimuq command line tool.
 *
 * Each function wraps one CLI subcommand: input records are written to
 * temp files, the CLI runs as a child process, and its output artifacts
 * are parsed back into plain objects. Record fields keep the on-disk
 * JSONL key names so the wire format stays visible at the boundary, and
 * because both runtimes print IEEE doubles in shortest round-trip form,
 * values survive the hop bit for bit.
 *
 * The `claimuq` console script must be on PATH (or set CLAIMUQ_BIN).
 * This package reimplements nothing; the CLI is the contract.
 */
import { join } from "node:path";

import {
  ClaimuqError,
  readJson,
  readJsonl,
  runCli,
  withWorkDir,
  writeJsonl,
} from "./runner.js";

export { ClaimuqError } from "./runner.js";

export const FORMAT_VERSION = "much-io/1";

export interface TokenRecord {
  surface: string;
  /** Code-point offsets into generation_text (not UTF-16 units). */
  char_start: number;
  char_end: number;
  sampled_rank: number;
  /** [token_id, logit] pairs sorted by descending logit, 24 of them. */
  candidates: Array<[number, number]>;
  is_eos?: boolean;
}

export interface SampleRecord {
  format: string;
  id: string;
  language: string;
  model: string;
  temperature: number;
  question: string;
  generation_text: string;
  tokens: TokenRecord[];
}

export interface PartitionRecord {
  sample_id: string;
  /** Token index lists, one per claim; the EOS claim comes last. */
  claims: number[][];
  has_eos: boolean;
}

export interface TokenScoreRecord {
  sample_id: string;
  scorer: string;
  values: number[];
  higher_is_more_uncertain: boolean;
}

export type Aggregator = "mean" | "max" | "geomean" | "product";

export interface ClaimScoreRecord {
  sample_id: string;
  scorer: string;
  aggregator: Aggregator;
  values: number[];
  higher_is_more_uncertain: boolean;
}

export interface MaskRecord {
  sample_id: string;
  /** One flag per token; true keeps the token's score. */
  mask: boolean[];
}

export interface AgreementReport {
  kappa: number;
  observed_agreement: number;
  expected_agreement: number;
  /** Rows are the first labeller, columns the second, in label order [-1, +1]. */
  confusion: number[][];
}

/**
 * JavaScript strings count UTF-16 units but the CLI counts code points,
 * so every offset this module computes goes through here.
 */
function codePointLength(s: string): number {
  let n = 0;
  for (const _ of s) {
    n += 1;
  }
  return n;
}

// Filler distribution for synthesized samples. Segmentation never reads
// logits, but the rows still have to parse: 24 candidates, descending.
const FILLER_CANDIDATES: Array<[number, number]> = Array.from(
  { length: 24 },
  (_, i) => [i, -i],
);

function sampleFromSurfaces(
  generationText: string,
  tokenSurfaces: string[],
  tokenOffsets: number[],
): SampleRecord {
  const textLength = codePointLength(generationText);
  const tokens: TokenRecord[] = tokenSurfaces.map((surface, i) => ({
    surface,
    char_start: tokenOffsets[i],
    char_end: i + 1 < tokenOffsets.length ? tokenOffsets[i + 1] : textLength,
    sampled_rank: 0,
    candidates: FILLER_CANDIDATES,
    is_eos: false,
  }));
  tokens.push({
    surface: "",
    char_start: textLength,
    char_end: textLength,
    sampled_rank: 0,
    candidates: FILLER_CANDIDATES,
    is_eos: true,
  });
  return {
    format: FORMAT_VERSION,
    id: "b00000",
    language: "EN",
    model: "binding",
    temperature: 0.0,
    question: "",
    generation_text: generationText,
    tokens,
  };
}

/**
 * Partition one generation into claims.
 *
 * `tokenOffsets` holds each token's starting code-point offset; surfaces
 * must tile the text exactly, or the CLI rejects the sample with the
 * violation it found. The end-of-sequence token is appended here, so the
 * returned partition has one final single-index claim beyond the inputs
 * (`[[0]]` for an empty token list).
 */
export function segmentText(
  generationText: string,
  tokenSurfaces: string[],
  tokenOffsets: number[],
): number[][] {
  if (tokenSurfaces.length !== tokenOffsets.length) {
    throw new TypeError(
      `got ${tokenSurfaces.length} surfaces but ${tokenOffsets.length} offsets`,
    );
  }
  const sample = sampleFromSurfaces(generationText, tokenSurfaces, tokenOffsets);
  return segmentSamples([sample])[0].claims;
}

export interface SegmentOptions {
  /** Reject samples on any validation violation, not just offset problems. */
  strict?: boolean;
}

/** Partition full sample records in one CLI run, in input order. */
export function segmentSamples(
  samples: SampleRecord[],
  options: SegmentOptions = {},
): PartitionRecord[] {
  return withWorkDir((dir) => {
    const input = join(dir, "samples.jsonl");
    const output = join(dir, "partitions.jsonl");
    writeJsonl(input, samples);
    const args = ["segment", "--input", input, "--output", output];
    if (options.strict) {
      args.push("--strict");
    }
    runCli(args);
    return readJsonl<PartitionRecord>(output);
  });
}

function scoreSamples(
  samples: SampleRecord[],
  scorer: string,
  extra: string[] = [],
): TokenScoreRecord[] {
  return withWorkDir((dir) => {
    const input = join(dir, "samples.jsonl");
    const output = join(dir, "scores.jsonl");
    writeJsonl(input, samples);
    runCli([
      "score", "--input", input, "--output", output, "--scorer", scorer,
      ...extra,
    ]);
    return readJsonl<TokenScoreRecord>(output);
  });
}

/** Probability of the sampled candidate at each position (confidence). */
export function tokenLikelihood(samples: SampleRecord[]): TokenScoreRecord[] {
  return scoreSamples(samples, "token_likelihood");
}

/** Probability of the top-ranked candidate at each position (confidence). */
export function maxLikelihood(samples: SampleRecord[]): TokenScoreRecord[] {
  return scoreSamples(samples, "max_likelihood");
}

/**
 * Shannon entropy of the candidate distribution at each position
 * (uncertainty), renormalized over the `topK` strongest candidates.
 */
export function tokenEntropy(
  samples: SampleRecord[],
  topK = 24,
): TokenScoreRecord[] {
  return scoreSamples(samples, "token_entropy", [
    "--entropy-top-k", String(topK),
  ]);
}

export interface AggregateOptions {
  /** Samples the stopword masks are derived from. */
  samples?: SampleRecord[];
  /** Precomputed masks; mutually exclusive with `samples`. */
  masks?: MaskRecord[];
  aggregator?: Aggregator;
}

/**
 * Reduce token scores to one value per non-EOS claim.
 *
 * Exactly one of `options.samples` and `options.masks` decides which
 * tokens count; the default aggregator is "product".
 */
export function aggregate(
  scores: TokenScoreRecord[],
  partitions: PartitionRecord[],
  options: AggregateOptions,
): ClaimScoreRecord[] {
  const { samples, masks, aggregator = "product" } = options;
  if ((samples === undefined) === (masks === undefined)) {
    throw new TypeError("pass exactly one of options.samples or options.masks");
  }
  return withWorkDir((dir) => {
    const scoresPath = join(dir, "scores.jsonl");
    const partitionsPath = join(dir, "partitions.jsonl");
    const output = join(dir, "claim_scores.jsonl");
    writeJsonl(scoresPath, scores);
    writeJsonl(partitionsPath, partitions);
    const args = [
      "aggregate", "--scores", scoresPath, "--partitions", partitionsPath,
      "--output", output, "--agg", aggregator,
    ];
    if (samples !== undefined) {
      const samplesPath = join(dir, "samples.jsonl");
      writeJsonl(samplesPath, samples);
      args.push("--input", samplesPath);
    } else {
      const masksPath = join(dir, "masks.jsonl");
      writeJsonl(masksPath, masks as MaskRecord[]);
      args.push("--masks", masksPath);
    }
    runCli(args);
    return readJsonl<ClaimScoreRecord>(output);
  });
}

function detectionReport(
  scores: number[],
  labels: number[],
  higherIsMoreUncertain: boolean,
): { roc_auc: number; pr_auc: number } {
  if (scores.length !== labels.length) {
    throw new TypeError(
      `got ${scores.length} scores but ${labels.length} labels`,
    );
  }
  return withWorkDir((dir) => {
    const scoresPath = join(dir, "claim_scores.jsonl");
    const annotationsPath = join(dir, "annotations.jsonl");
    const reportPath = join(dir, "report.json");
    writeJsonl(scoresPath, [{
      sample_id: "m00000",
      scorer: "external",
      aggregator: "product",
      values: scores,
      higher_is_more_uncertain: higherIsMoreUncertain,
    }]);
    writeJsonl(annotationsPath, [
      { sample_id: "m00000", annotator: "a", labels },
    ]);
    runCli([
      "evaluate", "--claim-scores", scoresPath,
      "--annotations", annotationsPath, "--output", reportPath,
    ]);
    return readJson<{ roc_auc: number; pr_auc: number }>(reportPath);
  });
}

/**
 * Area under the ROC curve for telling hallucinated claims (label -1,
 * the positive class) from supported ones. Labels are -1 or +1; both
 * classes must appear. `higherIsMoreUncertain` says how to orient the
 * scores and defaults to true.
 */
export function rocAuc(
  scores: number[],
  labels: number[],
  higherIsMoreUncertain = true,
): number {
  return detectionReport(scores, labels, higherIsMoreUncertain).roc_auc;
}

/** Average precision under the same conventions as rocAuc. */
export function prAuc(
  scores: number[],
  labels: number[],
  higherIsMoreUncertain = true,
): number {
  return detectionReport(scores, labels, higherIsMoreUncertain).pr_auc;
}

/** Cohen's kappa between two aligned -1/+1 label sequences. */
export function cohenKappa(
  labelsA: number[],
  labelsB: number[],
): AgreementReport {
  if (labelsA.length !== labelsB.length) {
    throw new TypeError(
      `got ${labelsA.length} labels for a but ${labelsB.length} for b`,
    );
  }
  return withWorkDir((dir) => {
    const aPath = join(dir, "annotations_a.jsonl");
    const bPath = join(dir, "annotations_b.jsonl");
    const reportPath = join(dir, "report.json");
    writeJsonl(aPath, [{ sample_id: "m00000", annotator: "a", labels: labelsA }]);
    writeJsonl(bPath, [{ sample_id: "m00000", annotator: "b", labels: labelsB }]);
    runCli([
      "evaluate", "--annotations", aPath, "--agreement-with", bPath,
      "--output", reportPath,
    ]);
    return readJson<AgreementReport>(reportPath);
  });
}
