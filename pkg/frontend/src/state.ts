import type { RiskPayload, RiskRequest } from "./types.js";

/** Client-side session: the planner's current selection and the last answer. */
export interface SessionState {
  selected: Set<number>;
  y0: number;
  beta: number;
  budget: number;
  lastResponse: RiskPayload | null;
  pending: boolean;
  offline: boolean;
  error: string | null;
}

export function initialState(budget = 4): SessionState {
  return {
    selected: new Set(),
    y0: 0,
    beta: 0.95,
    budget,
    lastResponse: null,
    pending: false,
    offline: false,
    error: null,
  };
}

export function toggleComponent(state: SessionState, id: number): SessionState {
  const selected = new Set(state.selected);
  if (selected.has(id)) {
    selected.delete(id);
  } else {
    selected.add(id);
  }
  return { ...state, selected };
}

export function replaceSelection(state: SessionState, ids: number[]): SessionState {
  return { ...state, selected: new Set(ids) };
}

export function overBudget(state: SessionState): boolean {
  return state.selected.size > state.budget;
}

export function riskRequest(state: SessionState): RiskRequest {
  return {
    maintained: [...state.selected].sort((a, b) => a - b),
    y0: state.y0,
    beta: state.beta,
  };
}

interface QueueHooks {
  onResult: (req: RiskRequest, payload: RiskPayload) => void;
  onError: (req: RiskRequest, err: unknown) => void;
  debounceMs?: number;
}

/**
 * Coalesces rapid selection changes into single service calls.
 *
 * - requests are debounced (default 150 ms), so a burst of toggles costs
 *   one POST;
 * - at most one request is in flight; a newer request issued meanwhile is
 *   parked and fired when the flight settles;
 * - responses that are not for the newest request are dropped (latest wins).
 */
export class RiskQueryQueue {
  private readonly debounceMs: number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private parked: RiskRequest | null = null;
  private seq = 0;

  constructor(
    private readonly run: (req: RiskRequest) => Promise<RiskPayload>,
    private readonly hooks: QueueHooks,
  ) {
    this.debounceMs = hooks.debounceMs ?? 150;
  }

  request(req: RiskRequest): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.launch(req);
    }, this.debounceMs);
  }

  /** Fire immediately, skipping the debounce (used on first load). */
  launch(req: RiskRequest): void {
    if (this.inFlight) {
      this.parked = req;
      return;
    }
    const ticket = ++this.seq;
    this.inFlight = true;
    this.run(req).then(
      (payload) => this.settle(ticket, req, payload, null),
      (err: unknown) => this.settle(ticket, req, null, err),
    );
  }

  private settle(
    ticket: number,
    req: RiskRequest,
    payload: RiskPayload | null,
    err: unknown,
  ): void {
    this.inFlight = false;
    const parked = this.parked;
    this.parked = null;
    if (parked !== null) {
      // a newer selection superseded this answer
      this.launch(parked);
      return;
    }
    if (ticket !== this.seq) return; // stale
    if (payload !== null) {
      this.hooks.onResult(req, payload);
    } else {
      this.hooks.onError(req, err);
    }
  }
}

export interface OptimizeFormInput {
  alg: string;
  m_max: number;
  m_k: number | null;
}

/** Inline validation; a non-null return means: show it, send nothing. */
export function validateOptimizeForm(input: OptimizeFormInput, kStar: number): string | null {
  if (input.alg !== "enum" && input.alg !== "one" && input.alg !== "two") {
    return `unknown algorithm ${input.alg}`;
  }
  if (!Number.isInteger(input.m_max) || input.m_max < 1) {
    return "budget must be a positive integer";
  }
  if (input.m_max > kStar) {
    return `budget exceeds the ${kStar} maintainable components`;
  }
  if (input.alg === "one") {
    if (input.m_k === null || !Number.isInteger(input.m_k)) {
      return "shortlist size M_k is required for the shortlist algorithm";
    }
    if (input.m_k < input.m_max) {
      return "shortlist size M_k must be at least the budget";
    }
    if (input.m_k > kStar) {
      return `shortlist size M_k exceeds the ${kStar} maintainable components`;
    }
  }
  return null;
}
