/**
 * Typed client for the probeable service HTTP API.
 *
 * The UI talks to the server exclusively through this module; it never
 * reaches into problem banks or logs, and it never invents data the API
 * did not return.
 */

export type ParamKind = "int" | "int-array" | "string";

export interface ParamSpec {
  name: string;
  kind: ParamKind;
  min_value?: number;
  max_value?: number;
  max_length?: number;
  equals_length_of?: string;
}

export type ProbeArg = number | number[] | string;

export interface ProblemView {
  id: string;
  statement: string;
  signature: { params: ParamSpec[] };
  default_probe: ProbeArg[];
  entry_point: string;
  penalty_increment: number;
  probe_count: number;
  score: number;
}

export interface Clarification {
  output: string;
  is_default: boolean;
  probe_count: number;
}

export interface FirstFailure {
  input: string;
  expected: string;
  actual: string;
  status: string;
}

export interface SubmissionOutcome {
  verdict: "pass" | "fail";
  tests_passed: number;
  tests_total: number;
  score: number;
  first_failure: FirstFailure | null;
}

interface ErrorEnvelope {
  error: { code: string; message: string; detail?: unknown };
}

/** Server-reported error, carrying the envelope's machine-readable code. */
export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

/** The request never reached the server (offline, refused, aborted). */
export class NetworkError extends Error {
  constructor(readonly cause: unknown) {
    super("could not reach the server");
    this.name = "NetworkError";
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    readonly token: string,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers: {
          Authorization: `Bearer ${this.token}`,
          ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
        },
        body: body !== undefined ? JSON.stringify(body) : undefined,
      });
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok) {
      let envelope: ErrorEnvelope | null = null;
      try {
        envelope = (await response.json()) as ErrorEnvelope;
      } catch {
        // non-envelope error body; fall through with generic message
      }
      throw new ApiRequestError(
        response.status,
        envelope?.error.code ?? "bad_request",
        envelope?.error.message ?? `request failed with status ${response.status}`,
        envelope?.error.detail,
      );
    }
    return (await response.json()) as T;
  }

  getProblem(problemId: string): Promise<ProblemView> {
    return this.request<ProblemView>("GET", `/problems/${problemId}`);
  }

  submitProbe(problemId: string, args: ProbeArg[]): Promise<Clarification> {
    return this.request<Clarification>("POST", `/problems/${problemId}/probes`, { args });
  }

  submitCode(problemId: string, source: string): Promise<SubmissionOutcome> {
    return this.request<SubmissionOutcome>("POST", `/problems/${problemId}/submissions`, {
      source,
    });
  }
}
