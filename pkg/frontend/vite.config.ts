/// <reference types="vitest" />
import { defineConfig } from "vite";

// dev server proxies straight to a locally running `surfink serve`
export default defineConfig({
  server: {
    proxy: {
      "/meshes": "http://127.0.0.1:8787",
      "/ws": { target: "ws://127.0.0.1:8787", ws: true },
    },
  },
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    testTimeout: 120000,
    hookTimeout: 120000,
  },
});
