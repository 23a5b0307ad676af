/**
 * UI contract suite: the real console DOM driven against a live service.
 *
 * A probeable service process is spawned on a scratch bank/log/token set;
 * the console is mounted in a headless DOM and driven through clicks and
 * input events exactly as a student would use it.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ProblemConsole } from "../src/ui.js";

const INCLUSIVE_P7 = [
  "def count_between(arr, n, a, b):",
  "    lo, hi = min(a, b), max(a, b)",
  "    return sum(1 for v in arr if lo <= v <= hi)",
  "",
].join("\n");

const CORRECT_P7 = [
  "def count_between(arr, n, a, b):",
  "    lo, hi = min(a, b), max(a, b)",
  "    return sum(1 for v in arr if lo < v < hi)",
  "",
].join("\n");

let service: ChildProcess | null = null;
let base = "";
let token = "";

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "probeable-ui-"));
  const roster = join(dir, "roster.csv");
  writeFileSync(roster, "student_id,letter_grade\ns1,A\n");
  const tokens = join(dir, "tokens.csv");

  const minted = spawnSync(
    "python3",
    ["-m", "probeable.cli", "token", "--tokens", tokens, "--roster", roster, "--student-id", "s1"],
    { encoding: "utf8" },
  );
  if (minted.status !== 0) {
    throw new Error(`token minting failed: ${minted.stderr}`);
  }
  token = minted.stdout.trim();

  const port = 18000 + Math.floor(Math.random() * 2000);
  base = `http://127.0.0.1:${port}`;
  service = spawn(
    "python3",
    [
      "-m", "probeable.cli", "serve",
      "--log", join(dir, "log.jsonl"),
      "--tokens", tokens,
      "--bind", `127.0.0.1:${port}`,
    ],
    { stdio: "ignore" },
  );

  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      const response = await fetch(`${base}/healthz`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      throw new Error("service did not become healthy");
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
});

afterAll(() => {
  service?.kill("SIGTERM");
});

async function mountConsole(problemId: string): Promise<ProblemConsole> {
  document.body.innerHTML = '<main id="app"></main>';
  const app = new ProblemConsole(
    document.getElementById("app")!,
    new ApiClient(base, token),
    problemId,
  );
  await app.init();
  return app;
}

function q<T extends Element>(selector: string): T {
  const node = document.querySelector(selector);
  if (!node) {
    throw new Error(`missing element ${selector}`);
  }
  return node as T;
}

function setSlot(param: string, value: string): void {
  const input = q<HTMLInputElement>(`input[data-param="${param}"]`);
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

function setSource(value: string): void {
  const area = q<HTMLTextAreaElement>("#source");
  area.value = value;
  area.dispatchEvent(new Event("input", { bubbles: true }));
}

describe("probe console", () => {
  it('round-trips "pear" to the clarification "a"', async () => {
    const app = await mountConsole("P9");
    setSlot("s", "pear");
    q<HTMLButtonElement>("#probe-btn").click();
    await app.settled();

    expect(q("#clarification-output").textContent).toBe("a");
    expect(document.querySelector("#default-badge")).toBeNull();
    expect(q("#probe-count").textContent).toContain("1");
    expect(q(".history-entry").textContent).toContain('("pear") → a');
  });

  it("renders the default-probe badge for every bundled default", async () => {
    const defaults: Array<[string, Record<string, string>, string]> = [
      ["P9", { s: "apple" }, "a"],
      ["P7", { arr: "[1, 2, 3]", n: "3", a: "0", b: "5" }, "3"],
      ["P8", { arr: "[50, 25, 2, 30, 45]", n: "5" }, "2"],
    ];
    for (const [problem, slots, expected] of defaults) {
      const app = await mountConsole(problem);
      for (const [param, value] of Object.entries(slots)) {
        setSlot(param, value);
      }
      q<HTMLButtonElement>("#probe-btn").click();
      await app.settled();

      expect(q("#clarification-output").textContent).toBe(expected);
      const badge = q("#default-badge");
      expect(badge.textContent).toContain("default probe");
      expect(badge.textContent).toContain("does not reveal an ambiguity");
    }
  });

  it("keeps history newest first across probes", async () => {
    const app = await mountConsole("P9");
    setSlot("s", "cat");
    q<HTMLButtonElement>("#probe-btn").click();
    await app.settled();
    setSlot("s", "Mmmm");
    q<HTMLButtonElement>("#probe-btn").click();
    await app.settled();

    const entries = Array.from(document.querySelectorAll(".history-entry"));
    expect(entries).toHaveLength(2);
    expect(entries[0]!.textContent).toContain('("Mmmm") → -');
    expect(entries[1]!.textContent).toContain('("cat") → a');
  });

  it("rejects malformed slots inline without any network call", async () => {
    const app = await mountConsole("P7");
    const realFetch = globalThis.fetch;
    let calls = 0;
    globalThis.fetch = ((...args: Parameters<typeof fetch>) => {
      calls += 1;
      return realFetch(...args);
    }) as typeof fetch;
    try {
      setSlot("arr", "[1, 2]");
      setSlot("n", "5");
      setSlot("a", "0");
      setSlot("b", "5");
      q<HTMLButtonElement>("#probe-btn").click();
      await app.settled();
    } finally {
      globalThis.fetch = realFetch;
    }
    expect(calls).toBe(0);
    expect(q('.slot-error[data-param="n"]').textContent).toContain(
      "n must equal the length of arr",
    );
    expect(q("#clarification-output").textContent).toBe("");
  });
});

describe("submission view", () => {
  it("warns about the penalty, then shows exactly the first failing test and 95%", async () => {
    const app = await mountConsole("P7");
    expect(q("#score").textContent).toContain("100%");
    expect(q<HTMLButtonElement>("#submit-btn").disabled).toBe(true);

    setSource(INCLUSIVE_P7);
    expect(q<HTMLButtonElement>("#submit-btn").disabled).toBe(false);
    q<HTMLButtonElement>("#submit-btn").click();

    const warning = q("#penalty-warning");
    expect(warning.textContent).toContain("5 percentage points");
    q<HTMLButtonElement>("#confirm-btn").click();
    await app.settled();

    expect(q("#failure-input").textContent).toBe("count_between([0, 5, 3], 3, 0, 5)");
    expect(q("#failure-expected").textContent).toBe("1");
    expect(q("#failure-actual").textContent).toBe("3");
    expect(q("#failure-status").textContent).toBe("wrong-output");
    expect(q("#score").textContent).toContain("95%");
    expect(q("#failing-count").textContent).toContain("1");

    // exactly one test disclosed anywhere in the page
    const calls = document.body.textContent!.match(/count_between\(/g) ?? [];
    expect(calls).toHaveLength(1);

    // a later passing submission keeps the penalty and shows the banner
    setSource(CORRECT_P7);
    q<HTMLButtonElement>("#submit-btn").click();
    await app.settled();
    expect(q("#success-banner").textContent).toContain("tests passed");
    expect(q("#score").textContent).toContain("95%");
    expect(document.querySelector("#first-failure")).toBeNull();
  });

  it("states that no penalty applies when grading is unavailable", async () => {
    // unreachable server: the client reports an infrastructure notice and
    // leaves the score exactly as the API last reported it
    document.body.innerHTML = '<main id="app"></main>';
    const healthyApp = await mountConsole("P7");
    const scoreBefore = q("#score").textContent;
    setSource(CORRECT_P7);
    // swap the fetch out from under the app to simulate an outage
    const realFetch = globalThis.fetch;
    globalThis.fetch = (() => Promise.reject(new TypeError("connect ECONNREFUSED"))) as typeof fetch;
    try {
      q<HTMLButtonElement>("#submit-btn").click();
      q<HTMLButtonElement>("#confirm-btn").click();
      await healthyApp.settled();
    } finally {
      globalThis.fetch = realFetch;
    }
    const notice = q("#notice");
    expect(notice.textContent).toContain("no penalty");
    expect(q("#score").textContent).toBe(scoreBefore);
    expect(document.querySelector("#outcome")).toBeNull();
  });
});
