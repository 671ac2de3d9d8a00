/** Wire-level payload shapes shared by every binding call. */

export type Dtype = "float32" | "float64";

/** Tensor contents as carried on the wire: raw buffer, base64. */
export interface TensorPayload {
  shape: number[];
  dtype: Dtype;
  b64: string;
}

export interface TensorData {
  shape: number[];
  dtype: Dtype;
  values: Float64Array | Float32Array;
}

export interface HandleReply {
  handle: number;
  shape?: number[];
  dtype?: string;
}

export function encodeArray(
  values: ArrayLike<number>,
  shape: number[],
  dtype: Dtype,
): TensorPayload {
  const typed =
    dtype === "float64" ? Float64Array.from(values) : Float32Array.from(values);
  const expected = shape.reduce((a, b) => a * b, 1);
  if (typed.length !== expected) {
    throw new Error(
      `value count ${typed.length} does not fill shape [${shape.join(", ")}]`,
    );
  }
  const b64 = Buffer.from(
    typed.buffer,
    typed.byteOffset,
    typed.byteLength,
  ).toString("base64");
  return { shape, dtype, b64 };
}

export function decodePayload(payload: TensorPayload): TensorData {
  // copy out of the pooled Buffer so the typed view is aligned and owned
  const bytes = Uint8Array.from(Buffer.from(payload.b64, "base64"));
  const values =
    payload.dtype === "float64"
      ? new Float64Array(bytes.buffer)
      : new Float32Array(bytes.buffer);
  return { shape: payload.shape, dtype: payload.dtype, values };
}
