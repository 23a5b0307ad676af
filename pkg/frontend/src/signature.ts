/**
 * Client-side mirror of the server's probe-signature rules.
 *
 * Catching arity/kind/bound mistakes locally saves a round trip and lets
 * errors render inline next to the offending slot, but the server remains
 * authoritative: anything that slips through still gets a 422.
 */

import type { ParamSpec, ProbeArg } from "./api.js";

export class SlotError extends Error {
  constructor(
    readonly param: string,
    message: string,
  ) {
    super(message);
    this.name = "SlotError";
  }
}

const INT_RE = /^[+-]?\d+$/;

function parseInt10(raw: string, param: string): number {
  const trimmed = raw.trim();
  if (!INT_RE.test(trimmed)) {
    throw new SlotError(param, `${param} must be an integer`);
  }
  return Number(trimmed);
}

/**
 * Turn one slot's raw text into a typed argument.
 *
 * Arrays accept `1, 2, 3`, `1 2 3` or `[1, 2, 3]`; an empty slot is the
 * empty array. String slots pass through verbatim (no quoting).
 */
export function parseSlot(spec: ParamSpec, raw: string): ProbeArg {
  if (spec.kind === "int") {
    return parseInt10(raw, spec.name);
  }
  if (spec.kind === "int-array") {
    let body = raw.trim();
    if (body.startsWith("[") && body.endsWith("]")) {
      body = body.slice(1, -1);
    }
    if (body.trim() === "") {
      return [];
    }
    return body
      .split(/[,\s]+/)
      .filter((token) => token !== "")
      .map((token) => parseInt10(token, spec.name));
  }
  return raw;
}

function isPrintableAscii(text: string): boolean {
  for (let i = 0; i < text.length; i++) {
    const code = text.charCodeAt(i);
    if (code < 32 || code > 126) {
      return false;
    }
  }
  return true;
}

/** Validate a full argument tuple against the problem signature. */
export function validateArgs(params: ParamSpec[], args: ProbeArg[]): void {
  if (params.length !== args.length) {
    throw new SlotError(
      params[0]?.name ?? "",
      `expected ${params.length} arguments, got ${args.length}`,
    );
  }
  const byName = new Map<string, ProbeArg>();
  params.forEach((spec, i) => byName.set(spec.name, args[i]!));

  params.forEach((spec, i) => {
    const value = args[i]!;
    if (spec.kind === "int") {
      const n = value as number;
      if (typeof n !== "number" || !Number.isInteger(n)) {
        throw new SlotError(spec.name, `${spec.name} must be an integer`);
      }
      if (spec.min_value !== undefined && n < spec.min_value) {
        throw new SlotError(spec.name, `${spec.name} must be at least ${spec.min_value}`);
      }
      if (spec.max_value !== undefined && n > spec.max_value) {
        throw new SlotError(spec.name, `${spec.name} must be at most ${spec.max_value}`);
      }
      if (spec.equals_length_of !== undefined) {
        const arr = byName.get(spec.equals_length_of);
        if (Array.isArray(arr) && n !== arr.length) {
          throw new SlotError(
            spec.name,
            `${spec.name} must equal the length of ${spec.equals_length_of} (${arr.length})`,
          );
        }
      }
    } else if (spec.kind === "int-array") {
      const arr = value as number[];
      if (!Array.isArray(arr)) {
        throw new SlotError(spec.name, `${spec.name} must be an integer array`);
      }
      if (spec.max_length !== undefined && arr.length > spec.max_length) {
        throw new SlotError(spec.name, `${spec.name} holds at most ${spec.max_length} values`);
      }
      for (const element of arr) {
        if (!Number.isInteger(element)) {
          throw new SlotError(spec.name, `${spec.name} must contain only integers`);
        }
        if (spec.min_value !== undefined && element < spec.min_value) {
          throw new SlotError(spec.name, `values in ${spec.name} must be at least ${spec.min_value}`);
        }
        if (spec.max_value !== undefined && element > spec.max_value) {
          throw new SlotError(spec.name, `values in ${spec.name} must be at most ${spec.max_value}`);
        }
      }
    } else {
      const text = value as string;
      if (typeof text !== "string") {
        throw new SlotError(spec.name, `${spec.name} must be a string`);
      }
      if (spec.max_length !== undefined && text.length > spec.max_length) {
        throw new SlotError(spec.name, `${spec.name} holds at most ${spec.max_length} characters`);
      }
      if (!isPrintableAscii(text)) {
        throw new SlotError(spec.name, `${spec.name} must be printable ASCII`);
      }
    }
  });
}

/** Parse every slot, then validate the tuple; first failure wins. */
export function argsFromSlots(params: ParamSpec[], slots: string[]): ProbeArg[] {
  const args = params.map((spec, i) => parseSlot(spec, slots[i] ?? ""));
  validateArgs(params, args);
  return args;
}

/** Render one argument in the human-facing call syntax reports use. */
export function renderArg(value: ProbeArg): string {
  if (Array.isArray(value)) {
    return `[${value.join(", ")}]`;
  }
  if (typeof value === "string") {
    return JSON.stringify(value);
  }
  return String(value);
}

export function renderArgs(args: ProbeArg[]): string {
  return args.map(renderArg).join(", ");
}

/** Structural equality against the problem's published default probe. */
export function isDefaultArgs(args: ProbeArg[], defaults: ProbeArg[]): boolean {
  if (args.length !== defaults.length) {
    return false;
  }
  return args.every((value, i) => {
    const other = defaults[i]!;
    if (Array.isArray(value) && Array.isArray(other)) {
      return value.length === other.length && value.every((v, j) => v === other[j]);
    }
    return value === other;
  });
}
