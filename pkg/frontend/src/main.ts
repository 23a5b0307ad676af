/**
 * Entry point: read config (query string first, then localStorage), mount
 * the console for the requested problem.
 *
 *   index.html?api=http://127.0.0.1:8601&token=...&problem=P7
 */

import { ApiClient } from "./api.js";
import { ProblemConsole } from "./ui.js";

function configValue(key: string, fallback: string): string {
  const fromQuery = new URLSearchParams(window.location.search).get(key);
  if (fromQuery) {
    window.localStorage.setItem(`probeable.${key}`, fromQuery);
    return fromQuery;
  }
  return window.localStorage.getItem(`probeable.${key}`) ?? fallback;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app mount point");
  }
  const api = new ApiClient(
    configValue("api", "http://127.0.0.1:8601"),
    configValue("token", ""),
  );
  const console_ = new ProblemConsole(root, api, configValue("problem", "P7"));
  try {
    await console_.init();
  } catch (error) {
    root.textContent = `Could not load the problem: ${String(error)}. ` +
      `Check the api/token/problem settings in the URL.`;
  }
}

void boot();
