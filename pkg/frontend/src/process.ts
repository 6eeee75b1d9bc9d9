import { spawnSync } from "node:child_process";

/** Error surfaced from the engine process, carrying its diagnostics. */
export class EngineError extends Error {
  readonly exitCode: number | null;
  readonly stderr: string;

  constructor(message: string, exitCode: number | null, stderr: string) {
    super(message);
    this.name = "EngineError";
    this.exitCode = exitCode;
    this.stderr = stderr;
  }
}

export interface RunResult {
  code: number;
  stdout: string;
  stderr: string;
}

/**
 * Resolve the engine launcher. Defaults to the installed `refmetrics`
 * console script; REFMETRICS_CLI overrides it (whitespace-separated,
 * e.g. "python3 -m refmetrics.cli").
 */
export function launcher(): string[] {
  const override = process.env.REFMETRICS_CLI;
  if (override && override.trim()) {
    return override.trim().split(/\s+/);
  }
  return ["refmetrics"];
}

/** Run one engine subcommand and capture its streams. */
export function runEngine(args: string[]): RunResult {
  const [command, ...prefix] = launcher();
  const result = spawnSync(command, [...prefix, ...args], {
    encoding: "utf8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (result.error) {
    throw new EngineError(
      `failed to launch engine '${command}': ${result.error.message}`,
      null,
      "",
    );
  }
  return { code: result.status ?? -1, stdout: result.stdout, stderr: result.stderr };
}

/** Run a subcommand that must succeed; map failures to EngineError. */
export function runEngineOrThrow(args: string[]): RunResult {
  const result = runEngine(args);
  if (result.code !== 0) {
    const detail = result.stderr.trim() || result.stdout.trim() || "no diagnostics";
    throw new EngineError(
      `engine exited with status ${result.code}: ${detail}`,
      result.code,
      result.stderr,
    );
  }
  return result;
}
