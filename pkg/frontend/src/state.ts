// Client view state, validated against /v1/stocks before any query.

import type { StocksPayload } from "./types";

export type Method = "portfolio" | "fic" | "both";

export interface ViewState {
  date: string | null; // null = service default (latest usable day)
  eta: number;
  method: Method;
  universe: string[]; // selected subset; empty = all
  horizon: number;
}

export function initialState(stocks: StocksPayload): ViewState {
  return {
    date: null,
    eta: stocks.eta_default,
    method: "portfolio",
    universe: [],
    horizon: 30,
  };
}

export interface Violation {
  field: keyof ViewState;
  message: string;
}

export function validate(state: ViewState, stocks: StocksPayload): Violation[] {
  const out: Violation[] = [];
  if (!(state.eta >= 0 && state.eta <= 1)) {
    out.push({ field: "eta", message: "risk tolerance must be between 0 and 1" });
  }
  if (!["portfolio", "fic", "both"].includes(state.method)) {
    out.push({ field: "method", message: "unknown method" });
  }
  if (state.horizon < 1 || !Number.isInteger(state.horizon)) {
    out.push({ field: "horizon", message: "horizon must be a positive whole number of days" });
  }
  if (state.date !== null) {
    if (state.date < stocks.decision_days.first || state.date > stocks.decision_days.last) {
      out.push({
        field: "date",
        message: `date must lie in [${stocks.decision_days.first}, ${stocks.decision_days.last}]`,
      });
    }
  }
  const known = new Set(stocks.stocks);
  for (const sym of state.universe) {
    if (!known.has(sym)) {
      out.push({ field: "universe", message: `unknown ticker ${sym}` });
    }
  }
  return out;
}

/** True when a cached payload was produced under a different config. */
export function isStale(fingerprint: string, payloadFingerprint: string): boolean {
  return fingerprint !== payloadFingerprint;
}
