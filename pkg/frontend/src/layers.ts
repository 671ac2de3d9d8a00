import { CoreClient } from "./client.js";
import {
  decodePayload,
  type HandleReply,
  type TensorData,
  type TensorPayload,
} from "./protocol.js";
import { UserTensor } from "./tensor.js";

export type LayerKind =
  | "linear"
  | "conv2d"
  | "maxpool2d"
  | "relu"
  | "batchnorm";

export type ModelKind = "cnn" | "hqcnn";

export interface ParameterInfo {
  name: string;
  shape: number[];
  dtype: string;
}

/** Handle to a core Module: a single layer or a full reference model. */
export class BoundModule {
  protected constructor(
    protected readonly client: CoreClient,
    readonly handle: number,
  ) {}

  static async layer(
    client: CoreClient,
    kind: LayerKind,
    config: Record<string, unknown> = {},
  ): Promise<BoundModule> {
    const reply = await client.request("layer", { kind, config });
    return new BoundModule(client, (reply as HandleReply).handle);
  }

  static async model(
    client: CoreClient,
    kind: ModelKind,
    config: Record<string, unknown> = {},
  ): Promise<BoundModule> {
    const reply = await client.request("model", { kind, config });
    return new BoundModule(client, (reply as HandleReply).handle);
  }

  static linear(
    client: CoreClient,
    inFeatures: number,
    outFeatures: number,
  ): Promise<BoundModule> {
    return BoundModule.layer(client, "linear", {
      in: inFeatures,
      out: outFeatures,
    });
  }

  static conv2d(
    client: CoreClient,
    inChannels: number,
    outChannels: number,
    kernel: [number, number],
    stride: [number, number] = [1, 1],
    padding: "valid" | "same" = "valid",
  ): Promise<BoundModule> {
    return BoundModule.layer(client, "conv2d", {
      in: inChannels,
      out: outChannels,
      kernel,
      stride,
      padding,
    });
  }

  static maxPool2d(
    client: CoreClient,
    pool: [number, number],
    stride?: [number, number],
  ): Promise<BoundModule> {
    return BoundModule.layer(client, "maxpool2d", { pool, stride });
  }

  static relu(client: CoreClient): Promise<BoundModule> {
    return BoundModule.layer(client, "relu", {});
  }

  async forward(x: UserTensor): Promise<UserTensor> {
    const reply = await this.client.request("forward", {
      module: this.handle,
      x: x.handle,
    });
    return new UserTensor(this.client, reply as HandleReply);
  }

  async parameterInfo(): Promise<ParameterInfo[]> {
    return (await this.client.request("module_params", {
      module: this.handle,
    })) as ParameterInfo[];
  }

  async readParameter(name: string): Promise<TensorData> {
    const payload = await this.client.request("param_read", {
      module: this.handle,
      param: name,
    });
    return decodePayload(payload as TensorPayload);
  }

  async parameterGrad(name: string): Promise<TensorData | null> {
    const payload = await this.client.request("param_grad", {
      module: this.handle,
      param: name,
    });
    return payload === null ? null : decodePayload(payload as TensorPayload);
  }

  async setTraining(mode: boolean): Promise<void> {
    await this.client.request("train_mode", { module: this.handle, mode });
  }

  async free(): Promise<void> {
    await this.client.free(this.handle);
  }
}
