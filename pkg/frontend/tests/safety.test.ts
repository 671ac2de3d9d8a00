import { describe, expect, it } from "vitest";

import { CoreClient, CoreError, VersionMismatchError } from "../src/client.js";
import { BoundModule } from "../src/layers.js";
import { UserTensor } from "../src/tensor.js";

describe("handle safety", () => {
  it("a freed handle raises while the core keeps serving", async () => {
    const client = await CoreClient.connect();
    try {
      const t = await UserTensor.create(client, [1, 2], [2]);
      await t.free();
      await expect(t.read()).rejects.toThrow(/unknown or freed handle/);
      await expect(t.free()).rejects.toThrow(/unknown or freed handle/);

      const again = await UserTensor.create(client, [5], [1]);
      expect(await again.item()).toBe(5);
    } finally {
      client.close();
    }
  });

  it("a module handle is rejected where a tensor is expected", async () => {
    const client = await CoreClient.connect();
    try {
      const act = await BoundModule.relu(client);
      await expect(client.request("tensor_read", { handle: act.handle })).rejects.toThrow(
        /expected Tensor/,
      );

      const t = await UserTensor.create(client, [1], [1]);
      expect(await t.item()).toBe(1);
    } finally {
      client.close();
    }
  });

  it("an unknown parameter name raises without killing the session", async () => {
    const client = await CoreClient.connect();
    try {
      const dense = await BoundModule.linear(client, 3, 2);
      await expect(dense.readParameter("missing")).rejects.toThrow(/no parameter named/);
      const weight = await dense.readParameter("weight");
      expect(weight.shape).toEqual([2, 3]);
      expect(weight.values.length).toBe(6);
    } finally {
      client.close();
    }
  });

  it("errors are typed CoreError instances", async () => {
    const client = await CoreClient.connect();
    try {
      await expect(client.request("free", { handle: 9999 })).rejects.toBeInstanceOf(CoreError);
    } finally {
      client.close();
    }
  });
});

describe("version handshake", () => {
  it("a mismatch fails the connect and names both versions", async () => {
    let caught: unknown;
    try {
      await CoreClient.connect({ expectVersion: "9.9.9" });
    } catch (error) {
      caught = error;
    }
    expect(caught).toBeInstanceOf(VersionMismatchError);
    const message = (caught as Error).message;
    expect(message).toContain("9.9.9");
    expect(message).toContain("0.1.0");
  });

  it("the matching version connects and reports itself", async () => {
    const client = await CoreClient.connect();
    client.close();
  });
});
