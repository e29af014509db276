import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    // fixture construction runs a real campaign through child processes
    testTimeout: 120_000,
    hookTimeout: 120_000,
    fileParallelism: false,
  },
});
