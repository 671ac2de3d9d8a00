import { CoreClient } from "./client.js";
import {
  decodePayload,
  encodeArray,
  type Dtype,
  type HandleReply,
  type TensorData,
  type TensorPayload,
} from "./protocol.js";

export interface CreateOptions {
  dtype?: Dtype;
  requiresGrad?: boolean;
}

/**
 * Handle to a core tensor. Every operation happens in the core; this
 * class only marshals arguments and results.
 */
export class UserTensor {
  readonly handle: number;
  readonly shape: number[];
  readonly dtype: string;

  constructor(
    private readonly client: CoreClient,
    reply: HandleReply,
  ) {
    this.handle = reply.handle;
    this.shape = reply.shape ?? [];
    this.dtype = reply.dtype ?? "float64";
  }

  static async create(
    client: CoreClient,
    values: ArrayLike<number>,
    shape: number[],
    options: CreateOptions = {},
  ): Promise<UserTensor> {
    const payload = encodeArray(values, shape, options.dtype ?? "float64");
    return UserTensor.fromPayload(client, payload, options);
  }

  static async fromPayload(
    client: CoreClient,
    payload: TensorPayload,
    options: CreateOptions = {},
  ): Promise<UserTensor> {
    const reply = await client.request("tensor", {
      ...payload,
      requires_grad: options.requiresGrad ?? false,
    });
    return new UserTensor(client, reply as HandleReply);
  }

  private async binary(
    name: string,
    other: UserTensor | number,
  ): Promise<UserTensor> {
    const operand =
      typeof other === "number" ? { b_scalar: other } : { b: other.handle };
    const reply = await this.client.request("binary", {
      name,
      a: this.handle,
      ...operand,
    });
    return new UserTensor(this.client, reply as HandleReply);
  }

  add(other: UserTensor | number): Promise<UserTensor> {
    return this.binary("add", other);
  }

  sub(other: UserTensor | number): Promise<UserTensor> {
    return this.binary("sub", other);
  }

  mul(other: UserTensor | number): Promise<UserTensor> {
    return this.binary("mul", other);
  }

  div(other: UserTensor | number): Promise<UserTensor> {
    return this.binary("div", other);
  }

  matmul(other: UserTensor): Promise<UserTensor> {
    return this.binary("matmul", other);
  }

  async reshape(shape: number[]): Promise<UserTensor> {
    const reply = await this.client.request("reshape", {
      handle: this.handle,
      shape,
    });
    return new UserTensor(this.client, reply as HandleReply);
  }

  async flattenFrom(startAxis = 1): Promise<UserTensor> {
    const reply = await this.client.request("flatten", {
      handle: this.handle,
      start_axis: startAxis,
    });
    return new UserTensor(this.client, reply as HandleReply);
  }

  async sum(): Promise<UserTensor> {
    const reply = await this.client.request("sum", { handle: this.handle });
    return new UserTensor(this.client, reply as HandleReply);
  }

  async mean(): Promise<UserTensor> {
    const reply = await this.client.request("mean", { handle: this.handle });
    return new UserTensor(this.client, reply as HandleReply);
  }

  async backward(retainGraph = false): Promise<void> {
    await this.client.request("backward", {
      handle: this.handle,
      retain_graph: retainGraph,
    });
  }

  async read(): Promise<TensorData> {
    const payload = await this.client.request("tensor_read", {
      handle: this.handle,
    });
    return decodePayload(payload as TensorPayload);
  }

  async grad(): Promise<TensorData | null> {
    const payload = await this.client.request("tensor_grad", {
      handle: this.handle,
    });
    return payload === null ? null : decodePayload(payload as TensorPayload);
  }

  /** Read a scalar tensor's single value. */
  async item(): Promise<number> {
    const data = await this.read();
    if (data.values.length !== 1) {
      throw new Error(`item() on tensor of ${data.values.length} values`);
    }
    return data.values[0];
  }

  async free(): Promise<void> {
    await this.client.free(this.handle);
  }
}
