import { CoreClient } from "./client.js";
import { BoundModule } from "./layers.js";
import type { HandleReply } from "./protocol.js";
import { UserTensor } from "./tensor.js";

export type OptimizerKind = "adam" | "sgd";

export class BoundOptimizer {
  private constructor(
    private readonly client: CoreClient,
    readonly handle: number,
  ) {}

  /** Collects the parameters of every listed module, core-side. */
  static async create(
    client: CoreClient,
    kind: OptimizerKind,
    modules: BoundModule[],
    config: Record<string, unknown> = {},
  ): Promise<BoundOptimizer> {
    const reply = await client.request("optimizer", {
      kind,
      modules: modules.map((m) => m.handle),
      config,
    });
    return new BoundOptimizer(client, (reply as HandleReply).handle);
  }

  static adam(
    client: CoreClient,
    modules: BoundModule[],
    lr: number,
  ): Promise<BoundOptimizer> {
    return BoundOptimizer.create(client, "adam", modules, { lr });
  }

  async step(): Promise<void> {
    await this.client.request("opt_step", { handle: this.handle });
  }

  async zeroGrad(): Promise<void> {
    await this.client.request("opt_zero_grad", { handle: this.handle });
  }

  async free(): Promise<void> {
    await this.client.free(this.handle);
  }
}

export async function softmaxCrossEntropy(
  client: CoreClient,
  targets: UserTensor,
  logits: UserTensor,
): Promise<UserTensor> {
  const reply = await client.request("softmax_xent", {
    targets: targets.handle,
    logits: logits.handle,
  });
  return new UserTensor(client, reply as HandleReply);
}

export interface SyntheticOptions {
  count: number;
  numClasses?: number;
  rows?: number;
  cols?: number;
  seed?: number;
}

export interface BatchOptions {
  batchSize: number;
  shuffle?: boolean;
  seed?: number;
  numClasses?: number;
}

export interface Batch {
  x: UserTensor;
  y: UserTensor;
}

/** Handle to a core image/label dataset. */
export class BoundDataset {
  private constructor(
    private readonly client: CoreClient,
    readonly handle: number,
    readonly count: number,
  ) {}

  static async synthetic(
    client: CoreClient,
    options: SyntheticOptions,
  ): Promise<BoundDataset> {
    const reply = await client.request("synthetic", {
      count: options.count,
      num_classes: options.numClasses ?? 10,
      rows: options.rows ?? 28,
      cols: options.cols ?? 28,
      seed: options.seed ?? 0,
    });
    return new BoundDataset(client, reply.handle, reply.count);
  }

  async filterDigits(digits: number[]): Promise<BoundDataset> {
    const reply = await this.client.request("filter_digits", {
      handle: this.handle,
      digits,
    });
    return new BoundDataset(this.client, reply.handle, reply.count);
  }

  /** Materialize normalized image batches with one-hot labels. */
  async batches(options: BatchOptions): Promise<Batch[]> {
    const reply = await this.client.request("batches", {
      handle: this.handle,
      batch_size: options.batchSize,
      shuffle: options.shuffle ?? false,
      seed: options.seed ?? 0,
      num_classes: options.numClasses ?? null,
    });
    return (reply as { x: HandleReply; y: HandleReply }[]).map((pair) => ({
      x: new UserTensor(this.client, pair.x),
      y: new UserTensor(this.client, pair.y),
    }));
  }

  async free(): Promise<void> {
    await this.client.free(this.handle);
  }
}

export interface EpochOptions {
  sampleCount?: number;
  batchSize?: number;
  lr?: number;
  seed?: number;
}

/**
 * One training epoch of the hybrid classifier on synthetic two-class
 * data, written exactly like a native loop: forward, loss, backward,
 * optimizer step. Returns the per-batch loss values.
 */
export async function trainHqcnnEpoch(
  client: CoreClient,
  options: EpochOptions = {},
): Promise<number[]> {
  const seed = options.seed ?? 0;
  await client.seed(seed);
  const model = await BoundModule.model(client, "hqcnn", {
    machine_type: "exact_prob",
    seed,
  });
  const data = await BoundDataset.synthetic(client, {
    count: options.sampleCount ?? 16,
    numClasses: 2,
    seed,
  });
  const batches = await data.batches({
    batchSize: options.batchSize ?? 8,
    numClasses: 2,
  });
  const optimizer = await BoundOptimizer.adam(
    client,
    [model],
    options.lr ?? 1e-3,
  );

  const losses: number[] = [];
  for (const { x, y } of batches) {
    await optimizer.zeroGrad();
    const logits = await model.forward(x);
    const loss = await softmaxCrossEntropy(client, y, logits);
    await loss.backward();
    await optimizer.step();
    losses.push(await loss.item());
  }
  return losses;
}
