export {
  CORE_VERSION,
  CoreClient,
  CoreError,
  VersionMismatchError,
  type ConnectOptions,
} from "./client.js";
export {
  decodePayload,
  encodeArray,
  type Dtype,
  type TensorData,
  type TensorPayload,
} from "./protocol.js";
export { UserTensor, type CreateOptions } from "./tensor.js";
export {
  BoundModule,
  type LayerKind,
  type ModelKind,
  type ParameterInfo,
} from "./layers.js";
export {
  BoundDataset,
  BoundOptimizer,
  softmaxCrossEntropy,
  trainHqcnnEpoch,
  type Batch,
  type BatchOptions,
  type EpochOptions,
  type OptimizerKind,
  type SyntheticOptions,
} from "./train.js";
