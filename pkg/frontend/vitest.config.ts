import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    projects: [
      {
        test: {
          name: "unit",
          environment: "jsdom",
          include: ["tests/**/*.test.ts"],
          exclude: ["tests/e2e.test.ts"],
        },
      },
      {
        test: {
          name: "e2e",
          environment: "jsdom",
          include: ["tests/e2e.test.ts"],
          testTimeout: 120_000,
          hookTimeout: 60_000,
          fileParallelism: false,
        },
      },
    ],
  },
});
