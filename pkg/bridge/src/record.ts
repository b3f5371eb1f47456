import { spawnSync } from 'node:child_process';
import fs from 'node:fs';
import os from 'node:os';
import path from 'node:path';

import { BridgeConfig, wrap } from './bridge';
import { Env } from './env';

export interface Mismatch {
  t: number;
  bridge: number | null;
  monitor: number | null;
}

export interface CheckReport {
  steps: number;
  mismatches: Mismatch[];
  ok: boolean;
}

export interface Episode {
  /** one row per step, in signalIndex column order */
  rows: number[][];
  rhos: (number | null)[];
}

/** Roll the wrapped env and record the observation rows the server scored. */
export async function recordEpisode<A>(
  env: Env<A>,
  cfg: BridgeConfig,
  nSteps: number,
  policy: (t: number) => A
): Promise<Episode> {
  const bridge = await wrap(env, cfg);
  const names = Object.keys(cfg.signalIndex);
  const rows: number[][] = [];
  const rhos: (number | null)[] = [];
  try {
    await bridge.reset();
    for (let t = 0; t < nSteps; t++) {
      const result = await bridge.step(policy(t));
      rows.push(names.map((n) => result.obs[cfg.signalIndex[n]]));
      rhos.push(result.rho);
      if (result.done) break;
    }
  } finally {
    await bridge.close();
  }
  return { rows, rhos };
}

export function traceCsv(cfg: BridgeConfig, rows: number[][]): string {
  const header = Object.keys(cfg.signalIndex).join(',');
  const body = rows.map((row) => row.map(String).join(',')).join('\n');
  return `${header}\n${body}\n`;
}

function monitorArgs(cfg: BridgeConfig, tracePath: string): string[] {
  const args = [...cfg.command.slice(1), 'monitor', '-f', cfg.formula];
  args.push('--trace', tracePath);
  if (cfg.semantics) args.push('--semantics', cfg.semantics);
  const p = cfg.params ?? {};
  if (p.mu !== undefined) args.push('--mu', String(p.mu));
  if (p.eta !== undefined) args.push('--eta', String(p.eta));
  if (p.temporal_agg) args.push('--temporal-agg', p.temporal_agg);
  if (p.normalize) args.push('--normalize');
  if (p.domains) {
    const lines = Object.entries(p.domains).map(
      ([name, [lo, hi]]) => `${name},${lo},${hi}`
    );
    const domainsPath = path.join(
      path.dirname(tracePath),
      'domains.csv'
    );
    fs.writeFileSync(domainsPath, `signal,lo,hi\n${lines.join('\n')}\n`);
    args.push('--domains', domainsPath);
  }
  return args;
}

/**
 * Re-run the offline monitor CLI on a recorded trace and compare its rho
 * stream against the one the bridge saw, value by value. Warm-up must line
 * up with warm-up and every number must match bitwise; the server and the
 * CLI share one evaluator, so any drift means the recording is unfaithful.
 */
export function checkTrace(
  cfg: BridgeConfig,
  tracePath: string,
  rhos: (number | null)[]
): CheckReport {
  const proc = spawnSync(cfg.command[0], monitorArgs(cfg, tracePath), {
    encoding: 'utf8',
  });
  if (proc.status !== 0) {
    throw new Error(`monitor CLI failed (${proc.status}): ${proc.stderr}`);
  }
  const monitorRhos: (number | null)[] = proc.stdout
    .split('\n')
    .filter((line) => line.length > 0)
    .map((line) => {
      const value = line.slice(line.indexOf(',') + 1);
      return value === '' ? null : Number(value);
    });

  const mismatches: Mismatch[] = [];
  const n = Math.max(rhos.length, monitorRhos.length);
  for (let t = 0; t < n; t++) {
    const bridge = t < rhos.length ? rhos[t] : null;
    const monitor = t < monitorRhos.length ? monitorRhos[t] : null;
    const equal =
      bridge === null || monitor === null
        ? bridge === monitor
        : Object.is(bridge, monitor);
    if (!equal) mismatches.push({ t, bridge, monitor });
  }
  if (rhos.length !== monitorRhos.length) {
    mismatches.push({ t: -1, bridge: null, monitor: null });
  }
  return { steps: rhos.length, mismatches, ok: mismatches.length === 0 };
}

/**
 * Roll n steps, dump the observations to a CSV trace, re-run the monitor
 * CLI on it and report any reward the bridge delivered that the offline
 * monitor does not reproduce. An empty episode trivially checks out.
 */
export async function recordAndCheck<A>(
  env: Env<A>,
  cfg: BridgeConfig,
  nSteps: number,
  policy: (t: number) => A
): Promise<CheckReport> {
  const { rows, rhos } = await recordEpisode(env, cfg, nSteps, policy);
  if (rows.length === 0) {
    return { steps: 0, mismatches: [], ok: true };
  }
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'stl-bridge-'));
  try {
    const tracePath = path.join(dir, 'episode.csv');
    fs.writeFileSync(tracePath, traceCsv(cfg, rows));
    return checkTrace(cfg, tracePath, rhos);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}
