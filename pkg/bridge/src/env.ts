/** Minimal synchronous environment contract the bridge can wrap. */
export interface Env<A = number> {
  reset(): number[];
  step(action: A): { obs: number[]; reward: number; done: boolean };
}

// mulberry32: tiny deterministic PRNG so episodes replay exactly
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Seeded one-dimensional random walk with momentum. Observation is
 * [position, velocity]; the native reward is the negated distance from the
 * origin, which the bridge is expected to replace.
 */
export class RandomWalkEnv implements Env<number> {
  x = 0;
  v = 0;
  private rand: () => number;

  constructor(private seed: number = 1) {
    this.rand = mulberry32(seed);
  }

  reset(): number[] {
    this.rand = mulberry32(this.seed);
    this.x = 0;
    this.v = 0;
    return [this.x, this.v];
  }

  step(action: number) {
    this.v = 0.8 * this.v + 0.1 * action + 0.05 * (this.rand() * 2 - 1);
    this.x += this.v;
    return { obs: [this.x, this.v], reward: -Math.abs(this.x), done: false };
  }
}
