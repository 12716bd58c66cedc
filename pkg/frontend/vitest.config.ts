import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    fileParallelism: false,
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // the round-trip suite boots the real scheduling service once
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
