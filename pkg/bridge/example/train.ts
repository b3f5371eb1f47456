// Reward-shaped policy search on the toy random walk: score a handful of
// constant-drift policies by their summed online robustness and keep the
// best. Nothing here asserts a training outcome; it only demonstrates the
// bridge as a drop-in reward source.
import { BridgeConfig, RandomWalkEnv, wrap } from '../src';

const cfg: BridgeConfig = {
  command: ['python3', '-m', 'stlmon'],
  formula: 'alw[0:3](x in [-1, 1]) and ev[0:6](v > 0.02)',
  semantics: 'sss',
  signalIndex: { x: 0, v: 1 },
};

async function episodeReturn(drift: number): Promise<number> {
  const bridge = await wrap(new RandomWalkEnv(42), cfg);
  try {
    await bridge.reset();
    let total = 0;
    for (let t = 0; t < 40; t++) {
      const r = await bridge.step(drift);
      total += r.reward; // warm-up contributes 0
    }
    return total;
  } finally {
    await bridge.close();
  }
}

async function main() {
  const candidates = [-1, -0.5, 0, 0.25, 0.5, 1];
  let best = { drift: NaN, ret: -Infinity };
  for (const drift of candidates) {
    const ret = await episodeReturn(drift);
    console.log(`drift ${drift.toString().padStart(5)}  return ${ret.toFixed(4)}`);
    if (ret > best.ret) best = { drift, ret };
  }
  console.log(`best drift: ${best.drift} (return ${best.ret.toFixed(4)})`);
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
