/**
 * Subprocess plumbing shared by every binding function.
 *
 * The CLI is the only interface to the Python package: rows go into a
 * throwaway directory as JSONL, `claimuq <subcommand>` runs over them, and
 * the output artifacts are read back. Nothing in this module knows what
 * the rows mean.
 */
import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** A claimuq invocation that exited nonzero. */
export class ClaimuqError extends Error {
  /** Exit status of the child process. */
  readonly exitCode: number;
  /** Error class reported by the CLI ("DataError", "IngestError", ...),
   * "UsageError" for exit 2, or "SubprocessError" when stderr carried no
   * machine-readable report. */
  readonly kind: string;

  constructor(message: string, exitCode: number, kind: string) {
    super(message);
    this.name = "ClaimuqError";
    this.exitCode = exitCode;
    this.kind = kind;
  }
}

/**
 * Command that invokes the CLI. `CLAIMUQ_BIN` overrides the default
 * `claimuq` console script and is split on spaces, so values like
 * `python3 -m claimuq` work.
 */
function cliCommand(): string[] {
  const raw = process.env.CLAIMUQ_BIN ?? "claimuq";
  const parts = raw.split(" ").filter((p) => p.length > 0);
  if (parts.length === 0) {
    throw new TypeError("CLAIMUQ_BIN is set but empty");
  }
  return parts;
}

export function runCli(args: string[]): string {
  const [cmd, ...prefix] = cliCommand();
  try {
    return execFileSync(cmd, [...prefix, ...args], {
      encoding: "utf8",
      maxBuffer: 1 << 26,
    });
  } catch (err) {
    throw asClaimuqError(err);
  }
}

/**
 * Exit 1 leaves a one-line {"error", "detail"} JSON report on stderr and
 * exit 2 leaves argparse usage text; map both onto ClaimuqError. Anything
 * without an exit status (spawn failures, for one) is rethrown as is.
 */
function asClaimuqError(err: unknown): unknown {
  if (!(err instanceof Error) || !("status" in err)) {
    return err;
  }
  const status = (err as { status?: number | null }).status ?? -1;
  const stderr = String((err as { stderr?: unknown }).stderr ?? "");
  for (const line of stderr.trim().split("\n").reverse()) {
    if (!line.startsWith("{")) {
      continue;
    }
    try {
      const report = JSON.parse(line) as { error?: string; detail?: string };
      if (typeof report.error === "string") {
        return new ClaimuqError(
          `${report.error}: ${report.detail ?? ""}`,
          status,
          report.error,
        );
      }
    } catch {
      // not the report line; keep scanning
    }
  }
  const kind = status === 2 ? "UsageError" : "SubprocessError";
  const message = stderr.trim() || `claimuq exited with status ${status}`;
  return new ClaimuqError(message, status, kind);
}

/** Run `fn` with a fresh temp directory, removing it afterwards. */
export function withWorkDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "claimuq-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

export function writeJsonl(path: string, rows: unknown[]): void {
  const body = rows.map((row) => JSON.stringify(row)).join("\n");
  writeFileSync(path, body + "\n");
}

export function readJsonl<T>(path: string): T[] {
  return readFileSync(path, "utf8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as T);
}

export function readJson<T>(path: string): T {
  return JSON.parse(readFileSync(path, "utf8")) as T;
}
