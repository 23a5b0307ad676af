/**
 * Pure state for the two console views.
 *
 * Every transition that involves the server takes the server's response as
 * input; nothing here predicts a score or fabricates an outcome. Probe
 * history is session-local presentation ordered newest first — the server
 * log stays the source of truth.
 */

import type { Clarification, FirstFailure, ProbeArg, SubmissionOutcome } from "./api.js";

export interface ProbeHistoryEntry {
  args: ProbeArg[];
  output: string;
  isDefault: boolean;
}

export interface ProbeConsoleState {
  slots: string[];
  clarification: string | null;
  isDefault: boolean;
  history: ProbeHistoryEntry[];
  probeCount: number;
  slotErrors: Record<string, string>;
  networkError: boolean;
  pending: boolean;
}

export function initialProbeState(slotCount: number, probeCount: number): ProbeConsoleState {
  return {
    slots: new Array(slotCount).fill(""),
    clarification: null,
    isDefault: false,
    history: [],
    probeCount,
    slotErrors: {},
    networkError: false,
    pending: false,
  };
}

export function probeSucceeded(
  state: ProbeConsoleState,
  args: ProbeArg[],
  clarification: Clarification,
): ProbeConsoleState {
  return {
    ...state,
    clarification: clarification.output,
    isDefault: clarification.is_default,
    history: [
      { args, output: clarification.output, isDefault: clarification.is_default },
      ...state.history,
    ],
    probeCount: clarification.probe_count,
    slotErrors: {},
    networkError: false,
    pending: false,
  };
}

export function probeRejected(state: ProbeConsoleState, param: string, message: string): ProbeConsoleState {
  return { ...state, slotErrors: { [param]: message }, networkError: false, pending: false };
}

export function probeUnreachable(state: ProbeConsoleState): ProbeConsoleState {
  return { ...state, networkError: true, pending: false };
}

export interface SubmissionViewState {
  source: string;
  outcome: SubmissionOutcome | null;
  score: number;
  failingCount: number;
  pending: boolean;
  confirming: boolean;
  penaltyWarned: boolean;
  infrastructureNotice: string | null;
}

export function initialSubmissionState(score: number): SubmissionViewState {
  return {
    source: "",
    outcome: null,
    score,
    failingCount: 0,
    pending: false,
    confirming: false,
    penaltyWarned: false,
    infrastructureNotice: null,
  };
}

export function submissionGraded(
  state: SubmissionViewState,
  outcome: SubmissionOutcome,
): SubmissionViewState {
  return {
    ...state,
    outcome,
    score: outcome.score,
    failingCount: state.failingCount + (outcome.verdict === "fail" ? 1 : 0),
    pending: false,
    confirming: false,
    infrastructureNotice: null,
  };
}

export function submissionBlocked(state: SubmissionViewState, notice: string): SubmissionViewState {
  // infrastructure fault: nothing was graded, nothing logged, score untouched
  return { ...state, pending: false, confirming: false, infrastructureNotice: notice };
}

export function firstFailureOf(state: SubmissionViewState): FirstFailure | null {
  return state.outcome?.first_failure ?? null;
}

export function formatScore(score: number): string {
  return `${Math.round(score * 100)}%`;
}
