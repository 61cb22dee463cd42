import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    proxy: {
      // point the dev server at a locally running session service
      "/v1": "http://127.0.0.1:8080",
      "/healthz": "http://127.0.0.1:8080",
    },
  },
  test: {
    environment: "jsdom",
  },
});
