/**
 * DOM console for one problem: probe editor on top, clarification below,
 * then the code submission view with its live score tracker.
 *
 * The app builds its own DOM under the mount point, so tests and the
 * production page share one rendering path. One request per action type is
 * in flight at a time; the submit button stays disabled while a grade is
 * pending (the server enforces the same rule with 409).
 */

import {
  ApiClient,
  ApiRequestError,
  NetworkError,
  type ProbeArg,
  type ProblemView,
} from "./api.js";
import { argsFromSlots, renderArgs, SlotError } from "./signature.js";
import {
  formatScore,
  initialProbeState,
  initialSubmissionState,
  probeRejected,
  probeSucceeded,
  probeUnreachable,
  submissionBlocked,
  submissionGraded,
  type ProbeConsoleState,
  type SubmissionViewState,
} from "./state.js";

const DEFAULT_PROBE_HINT = "default probe — does not reveal an ambiguity";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export class ProblemConsole {
  private problem!: ProblemView;
  private probeState!: ProbeConsoleState;
  private submissionState!: SubmissionViewState;
  private inflight: Promise<void> = Promise.resolve();
  private lastProbeArgs: ProbeArg[] | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly problemId: string,
  ) {}

  /** Resolves when the current chain of user actions has finished. */
  settled(): Promise<void> {
    return this.inflight.then(
      () => undefined,
      () => undefined,
    );
  }

  async init(): Promise<void> {
    this.problem = await this.api.getProblem(this.problemId);
    this.probeState = initialProbeState(
      this.problem.signature.params.length,
      this.problem.probe_count,
    );
    this.submissionState = initialSubmissionState(this.problem.score);
    this.render();
  }

  // --- rendering -------------------------------------------------------------

  private render(): void {
    this.root.textContent = "";
    this.root.append(this.renderStatement(), this.renderProbeConsole(), this.renderSubmissionView());
  }

  private renderStatement(): HTMLElement {
    const section = el("section", { id: "statement" });
    for (const paragraph of this.problem.statement.split("\n\n")) {
      section.append(el("p", {}, paragraph));
    }
    return section;
  }

  private renderProbeConsole(): HTMLElement {
    const section = el("section", { id: "probe-console" });
    section.append(el("h2", {}, "Ask the client: probe the requirements"));

    const editor = el("div", { id: "probe-editor", class: "pane upper-pane" });
    this.problem.signature.params.forEach((param, index) => {
      const row = el("div", { class: "slot-row" });
      const label = el("label", { for: `slot-${param.name}` }, `${param.name} (${param.kind})`);
      const input = el("input", {
        id: `slot-${param.name}`,
        class: "slot",
        "data-param": param.name,
        value: this.probeState.slots[index] ?? "",
      });
      input.addEventListener("input", () => {
        this.probeState.slots[index] = input.value;
      });
      const error = el("span", { class: "slot-error", "data-param": param.name });
      error.textContent = this.probeState.slotErrors[param.name] ?? "";
      row.append(label, input, error);
      editor.append(row);
    });

    const probeButton = el("button", { id: "probe-btn" }, "Submit probe (free)");
    probeButton.disabled = this.probeState.pending;
    probeButton.addEventListener("click", () => this.startProbe());
    editor.append(probeButton);

    if (this.probeState.networkError) {
      const bar = el("div", { id: "network-error", role: "alert" });
      bar.append(el("span", {}, "Could not reach the server."));
      const retry = el("button", { id: "retry-btn" }, "Retry");
      retry.addEventListener("click", () => this.retryProbe());
      bar.append(retry);
      editor.append(bar);
    }
    section.append(editor);

    const output = el("div", { id: "clarification-pane", class: "pane lower-pane" });
    output.append(el("h3", {}, "Expected output"));
    output.append(
      el("pre", { id: "clarification-output" }, this.probeState.clarification ?? ""),
    );
    if (this.probeState.isDefault) {
      output.append(el("span", { id: "default-badge", class: "badge" }, DEFAULT_PROBE_HINT));
    }
    output.append(
      el("div", { id: "probe-count" }, `probes submitted: ${this.probeState.probeCount}`),
    );
    section.append(output);

    const history = el("ol", { id: "probe-history" });
    for (const entry of this.probeState.history) {
      const item = el("li", { class: "history-entry" });
      item.append(el("code", {}, `(${renderArgs(entry.args)}) → ${entry.output}`));
      if (entry.isDefault) {
        item.append(el("span", { class: "badge" }, "default probe"));
      }
      history.append(item);
    }
    section.append(history);
    return section;
  }

  private renderSubmissionView(): HTMLElement {
    const section = el("section", { id: "submission-view" });
    section.append(el("h2", {}, "Submit your solution"));
    section.append(
      el(
        "div",
        { id: "score" },
        `current score: ${formatScore(this.submissionState.score)}`,
      ),
    );
    section.append(
      el(
        "div",
        { id: "failing-count" },
        `failing submissions: ${this.submissionState.failingCount}`,
      ),
    );

    const source = el("textarea", { id: "source", rows: "12" });
    source.value = this.submissionState.source;
    source.addEventListener("input", () => {
      this.submissionState.source = source.value;
      this.syncSubmitDisabled();
    });
    section.append(source);

    const submit = el("button", { id: "submit-btn" }, "Submit code");
    submit.addEventListener("click", () => this.startSubmission());
    section.append(submit);

    if (this.submissionState.confirming) {
      const confirmPanel = el("div", { id: "confirm-panel", role: "alertdialog" });
      confirmPanel.append(
        el(
          "p",
          { id: "penalty-warning" },
          `Probes are free, but each failing code submission costs ` +
            `${Math.round(this.problem.penalty_increment * 100)} percentage points ` +
            `from your score for this problem. Submit anyway?`,
        ),
      );
      const confirm = el("button", { id: "confirm-btn" }, "Submit for grading");
      confirm.addEventListener("click", () => this.confirmSubmission());
      const cancel = el("button", { id: "cancel-btn" }, "Cancel");
      cancel.addEventListener("click", () => {
        this.submissionState.confirming = false;
        this.render();
      });
      confirmPanel.append(confirm, cancel);
      section.append(confirmPanel);
    }

    if (this.submissionState.infrastructureNotice) {
      section.append(
        el(
          "div",
          { id: "notice", role: "alert" },
          this.submissionState.infrastructureNotice,
        ),
      );
    }

    const outcome = this.submissionState.outcome;
    if (outcome) {
      const panel = el("div", { id: "outcome" });
      if (outcome.verdict === "pass") {
        panel.append(
          el(
            "div",
            { id: "success-banner", class: "banner pass" },
            `All ${outcome.tests_total} tests passed. Final score ` +
              `${formatScore(outcome.score)}.`,
          ),
        );
      } else {
        panel.append(el("div", { class: "banner fail" }, "Your solution failed a test."));
        const failure = outcome.first_failure!;
        const detail = el("dl", { id: "first-failure" });
        detail.append(
          el("dt", {}, "input"),
          el("dd", { id: "failure-input" }, failure.input),
          el("dt", {}, "expected"),
          el("dd", { id: "failure-expected" }, failure.expected),
          el("dt", {}, "actual"),
          el("dd", { id: "failure-actual" }, failure.actual),
          el("dt", {}, "status"),
          el("dd", { id: "failure-status" }, failure.status),
        );
        panel.append(detail);
        panel.append(
          el(
            "div",
            { id: "tests-summary" },
            `${outcome.tests_passed} of ${outcome.tests_total} tests passed`,
          ),
        );
      }
      section.append(panel);
    }

    this.rootSubmitButton = submit;
    this.syncSubmitDisabled();
    return section;
  }

  private rootSubmitButton: HTMLButtonElement | null = null;

  private syncSubmitDisabled(): void {
    if (this.rootSubmitButton) {
      this.rootSubmitButton.disabled =
        this.submissionState.pending || this.submissionState.source.trim() === "";
    }
  }

  // --- actions ----------------------------------------------------------------

  private startProbe(): void {
    if (this.probeState.pending) {
      return;
    }
    let args: ProbeArg[];
    try {
      args = argsFromSlots(this.problem.signature.params, this.probeState.slots);
    } catch (error) {
      if (error instanceof SlotError) {
        // invalid input never leaves the page
        this.probeState = probeRejected(this.probeState, error.param, error.message);
        this.render();
        return;
      }
      throw error;
    }
    this.runProbe(args);
  }

  private retryProbe(): void {
    if (this.lastProbeArgs && !this.probeState.pending) {
      this.runProbe(this.lastProbeArgs);
    }
  }

  private runProbe(args: ProbeArg[]): void {
    this.lastProbeArgs = args;
    this.probeState = { ...this.probeState, pending: true };
    this.inflight = this.inflight.then(async () => {
      try {
        const clarification = await this.api.submitProbe(this.problemId, args);
        this.probeState = probeSucceeded(this.probeState, args, clarification);
      } catch (error) {
        if (error instanceof NetworkError) {
          this.probeState = probeUnreachable(this.probeState);
        } else if (error instanceof ApiRequestError && error.code === "signature_violation") {
          const detail = error.detail as { param?: string } | undefined;
          const param =
            detail?.param ?? this.problem.signature.params[0]?.name ?? "";
          this.probeState = probeRejected(this.probeState, param, error.message);
        } else {
          this.probeState = probeUnreachable(this.probeState);
        }
      }
      this.render();
    });
  }

  private startSubmission(): void {
    if (this.submissionState.pending || this.submissionState.source.trim() === "") {
      return;
    }
    if (!this.submissionState.penaltyWarned) {
      this.submissionState = {
        ...this.submissionState,
        confirming: true,
        penaltyWarned: true,
      };
      this.render();
      return;
    }
    this.confirmSubmission();
  }

  private confirmSubmission(): void {
    if (this.submissionState.pending) {
      return;
    }
    this.submissionState = { ...this.submissionState, pending: true, confirming: false };
    this.syncSubmitDisabled();
    const source = this.submissionState.source;
    this.inflight = this.inflight.then(async () => {
      try {
        const outcome = await this.api.submitCode(this.problemId, source);
        this.submissionState = submissionGraded(this.submissionState, outcome);
      } catch (error) {
        if (error instanceof ApiRequestError && error.status === 503) {
          this.submissionState = submissionBlocked(
            this.submissionState,
            "Grading is temporarily unavailable; your submission was not " +
              "graded and no penalty was applied.",
          );
        } else if (error instanceof NetworkError) {
          this.submissionState = submissionBlocked(
            this.submissionState,
            "Could not reach the server; your submission was not graded and " +
              "no penalty was applied.",
          );
        } else {
          this.submissionState = { ...this.submissionState, pending: false };
          throw error;
        }
      }
      this.render();
    });
  }
}
