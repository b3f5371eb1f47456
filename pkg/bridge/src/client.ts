import { ChildProcessWithoutNullStreams, spawn } from 'node:child_process';
import readline from 'node:readline';

export interface ServeParams {
  mu?: number;
  eta?: number;
  beta?: number;
  nu?: number;
  temporal_agg?: 'semantic' | 'pointwise';
  normalize?: boolean;
  domains?: Record<string, [number, number]>;
}

interface Response {
  ok: boolean;
  horizon?: number;
  rho?: number | null;
  error?: string;
}

interface Pending {
  resolve: (res: Response) => void;
  reject: (err: Error) => void;
}

/**
 * Line-protocol client for a `... serve` subprocess: one JSON request per
 * line on its stdin, one JSON response per line on its stdout. Requests are
 * answered strictly in order, so a FIFO of pending promises is enough.
 */
export class MonitorClient {
  private proc: ChildProcessWithoutNullStreams;
  private pending: Pending[] = [];
  private lastLine = '';
  private exited = false;

  constructor(command: string[]) {
    const [cmd, ...args] = command;
    this.proc = spawn(cmd, [...args, 'serve'], {
      stdio: ['pipe', 'pipe', 'pipe'],
    });
    const rl = readline.createInterface({ input: this.proc.stdout });
    rl.on('line', (line) => {
      this.lastLine = line;
      const waiter = this.pending.shift();
      if (!waiter) return;
      let res: Response;
      try {
        res = JSON.parse(line);
      } catch {
        waiter.reject(new Error(`unparseable server response: ${line}`));
        return;
      }
      if (res.ok) {
        waiter.resolve(res);
      } else {
        waiter.reject(new Error(res.error ?? 'unspecified server error'));
      }
    });
    const fail = () => {
      this.exited = true;
      const err = new Error(
        `server exited; last protocol line: ${this.lastLine || '<none>'}`
      );
      for (const waiter of this.pending.splice(0)) waiter.reject(err);
    };
    this.proc.on('close', fail);
    this.proc.on('error', fail);
  }

  private send(req: object): Promise<Response> {
    if (this.exited) {
      return Promise.reject(
        new Error(
          `server already exited; last protocol line: ${this.lastLine || '<none>'}`
        )
      );
    }
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.proc.stdin.write(JSON.stringify(req) + '\n');
    });
  }

  async init(
    formula: string,
    semantics?: string,
    params?: ServeParams
  ): Promise<number> {
    const req: Record<string, unknown> = { cmd: 'init', formula };
    if (semantics !== undefined) req.semantics = semantics;
    if (params !== undefined) req.params = params;
    const res = await this.send(req);
    return res.horizon as number;
  }

  /** Feed one sample; null while the monitor is still warming up. */
  async step(values: Record<string, number>): Promise<number | null> {
    const res = await this.send({ cmd: 'step', values });
    return res.rho === undefined ? null : res.rho;
  }

  async reset(): Promise<void> {
    await this.send({ cmd: 'reset' });
  }

  /** Ask the server to quit and reap the subprocess. */
  async close(): Promise<void> {
    if (!this.exited) {
      try {
        await this.send({ cmd: 'quit' });
      } catch {
        // already going down; the kill below is the fallback
      }
    }
    this.proc.kill();
  }
}
