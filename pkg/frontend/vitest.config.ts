import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // every test drives a spawned core process, so give it headroom
    testTimeout: 180_000,
    hookTimeout: 60_000,
  },
});
