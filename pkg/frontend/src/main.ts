import { App } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new App(root);
  app.start().catch((e) => {
    root.textContent = `failed to start: ${e instanceof Error ? e.message : e}`;
  });
}
