import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    proxy: {
      "/query": "http://127.0.0.1:8000",
      "/feedback": "http://127.0.0.1:8000",
      "/pages": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "jsdom",
    pool: "forks",
  },
});
