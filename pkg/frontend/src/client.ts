import { spawn, type ChildProcessByStdio } from "node:child_process";
import { createInterface, type Interface } from "node:readline";
import type { Readable, Writable } from "node:stream";

/** Core version this binding was written against. */
export const CORE_VERSION = "0.1.0";

/** Error reply from the core, surfaced as an exception. */
export class CoreError extends Error {}

/** Handshake refusal; the message carries both version strings. */
export class VersionMismatchError extends CoreError {}

interface Reply {
  id: number | null;
  ok: boolean;
  value?: unknown;
  error?: string;
}

interface Pending {
  resolve: (value: unknown) => void;
  reject: (error: Error) => void;
}

export interface ConnectOptions {
  /** Interpreter that hosts the core; defaults to python3 on PATH. */
  pythonBin?: string;
  /** Override the version sent in the handshake (tests only). */
  expectVersion?: string;
}

/**
 * One core process speaking line-delimited JSON over stdio.
 *
 * Requests are answered in order; each call resolves with the reply's
 * value or rejects with a CoreError. The process outlives any failed
 * request, so a rejected call never invalidates the client.
 */
export class CoreClient {
  private readonly proc: ChildProcessByStdio<Writable, Readable, null>;
  private readonly lines: Interface;
  private readonly pending = new Map<number, Pending>();
  private nextId = 1;

  private constructor(pythonBin: string) {
    this.proc = spawn(pythonBin, ["-m", "hyqnet.userlevel"], {
      stdio: ["pipe", "pipe", "inherit"],
    });
    this.lines = createInterface({ input: this.proc.stdout });
    this.lines.on("line", (line) => this.dispatch(line));
  }

  /** Spawn the core and perform the version handshake. */
  static async connect(options: ConnectOptions = {}): Promise<CoreClient> {
    const client = new CoreClient(options.pythonBin ?? "python3");
    try {
      await client.request("hello", {
        version: options.expectVersion ?? CORE_VERSION,
      });
    } catch (error) {
      client.close();
      if (error instanceof CoreError && /version mismatch/.test(error.message)) {
        throw new VersionMismatchError(error.message);
      }
      throw error;
    }
    return client;
  }

  request(op: string, payload: Record<string, unknown> = {}): Promise<any> {
    const id = this.nextId;
    this.nextId += 1;
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.proc.stdin.write(JSON.stringify({ id, op, ...payload }) + "\n");
    });
  }

  private dispatch(line: string): void {
    const reply = JSON.parse(line) as Reply;
    if (reply.id === null || reply.id === undefined) return;
    const entry = this.pending.get(reply.id);
    if (entry === undefined) return;
    this.pending.delete(reply.id);
    if (reply.ok) {
      entry.resolve(reply.value);
    } else {
      entry.reject(new CoreError(reply.error ?? "unspecified core error"));
    }
  }

  /** Reseed the core's global generator. */
  async seed(value: number): Promise<void> {
    await this.request("seed", { value });
  }

  async free(handle: number): Promise<void> {
    await this.request("free", { handle });
  }

  close(): void {
    for (const entry of this.pending.values()) {
      entry.reject(new CoreError("client closed"));
    }
    this.pending.clear();
    this.lines.close();
    this.proc.stdin.end();
    this.proc.kill();
  }
}
