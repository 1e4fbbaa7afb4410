import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // acceptance tests shell out to the simulation engine and run full cycles
    testTimeout: 180_000,
    hookTimeout: 180_000,
    // let the per-criterion pass/fail lines reach the terminal
    disableConsoleIntercept: true,
  },
});
