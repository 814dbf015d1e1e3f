import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 120_000,
    // training runs are CPU-bound and share a per-seed cache
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
