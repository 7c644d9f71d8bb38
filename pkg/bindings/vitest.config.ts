import { defineConfig } from "vitest/config";

// Every test drives the claimuq CLI as a child process, and the conformance
// suite first generates a 1,000-sample corpus, so the defaults are too tight.
export default defineConfig({
  test: {
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
