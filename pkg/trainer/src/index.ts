export { Rng } from "./rng.js";
export { Dataset, SPIRAL_DEFAULTS, SpiralOptions, spiralDataset } from "./data.js";
export {
  Gradients,
  MlpParams,
  TrainOptions,
  accuracy,
  cloneParams,
  crossEntropy,
  forwardBatch,
  initMlp,
  lossGradients,
  train,
} from "./mlp.js";
export { RepurposeInfo, readModel, readRepurposeInfo, writeModel } from "./rpm.js";
export {
  PartitionCounts,
  crossEdgeTotal,
  crossPositions,
  repurposeModel,
  runPrimary,
  runPrimaryOrThrow,
  sparsifyModel,
  twoWorkerPartition,
  writePartition,
} from "./primary.js";
export { ARCH, RECIPE, TrainSpiralOptions, TrainSpiralResult, exportModel, trainSpiral } from "./train.js";
export { FineTuneJob, FineTuneResult, finetuneMasked, saveFinetuned } from "./finetune.js";
export {
  MatchedComparison,
  TradeoffOptions,
  TradeoffPoint,
  cachedTraining,
  matchedBudgetComparison,
  tradeoffCsv,
  tradeoffCurve,
  writeTradeoffCsv,
} from "./tradeoff.js";
