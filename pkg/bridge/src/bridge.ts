import { MonitorClient, ServeParams } from './client';
import { Env } from './env';

export interface BridgeConfig {
  /** argv of the monitoring CLI, e.g. ["python3", "-m", "stlmon"] */
  command: string[];
  formula: string;
  semantics?: string;
  params?: ServeParams;
  /**
   * Observation index for each signal name the formula mentions. Must cover
   * every signal; a gap surfaces as a "missing signals" error on the first
   * step, since the server validates each sample.
   */
  signalIndex: Record<string, number>;
}

export interface SteppedReward {
  obs: number[];
  /** robustness when available, otherwise 0.0 (see warmUp) */
  reward: number;
  done: boolean;
  /** raw server value; null while the monitor is warming up */
  rho: number | null;
  warmUp: boolean;
  /** the reward the wrapped environment produced, kept for reference */
  envReward: number;
}

export function valuesFromObs(
  obs: number[],
  signalIndex: Record<string, number>
): Record<string, number> {
  const values: Record<string, number> = {};
  for (const [name, idx] of Object.entries(signalIndex)) {
    values[name] = obs[idx];
  }
  return values;
}

/**
 * Environment wrapper that substitutes each step's reward with the online
 * robustness of cfg.formula over the observation stream. Rewards become
 * meaningful once horizon + 1 observations have been fed; before that the
 * server answers null and the bridge maps it to 0.0 with warmUp set, since
 * RL update rules need a number every step and 0 is neutral under reward
 * summation. The observation returned by reset() is not fed to the monitor;
 * the scored trace is exactly the sequence of step() observations.
 */
export class RewardBridge<A = number> {
  readonly client: MonitorClient;
  horizon = 0;

  constructor(private env: Env<A>, private cfg: BridgeConfig) {
    this.client = new MonitorClient(cfg.command);
  }

  async start(): Promise<void> {
    this.horizon = await this.client.init(
      this.cfg.formula,
      this.cfg.semantics,
      this.cfg.params
    );
  }

  async reset(): Promise<number[]> {
    const obs = this.env.reset();
    await this.client.reset();
    return obs;
  }

  async step(action: A): Promise<SteppedReward> {
    const { obs, reward, done } = this.env.step(action);
    const rho = await this.client.step(
      valuesFromObs(obs, this.cfg.signalIndex)
    );
    return {
      obs,
      reward: rho ?? 0.0,
      done,
      rho,
      warmUp: rho === null,
      envReward: reward,
    };
  }

  async close(): Promise<void> {
    await this.client.close();
  }
}

/** Spawn the server, perform the init handshake, return the wrapped env. */
export async function wrap<A>(
  env: Env<A>,
  cfg: BridgeConfig
): Promise<RewardBridge<A>> {
  const bridge = new RewardBridge(env, cfg);
  await bridge.start();
  return bridge;
}
