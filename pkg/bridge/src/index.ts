export { MonitorClient, ServeParams } from './client';
export { Env, RandomWalkEnv } from './env';
export {
  BridgeConfig,
  RewardBridge,
  SteppedReward,
  valuesFromObs,
  wrap,
} from './bridge';
export {
  CheckReport,
  Episode,
  Mismatch,
  checkTrace,
  recordAndCheck,
  recordEpisode,
  traceCsv,
} from './record';
