// Weight bar view models.  Every number is carried through from the
// payload; formatting happens at the label layer only.

import type { RecommendPayload } from "./types";

export interface AllocationBar {
  symbol: string;
  weight: number; // payload value, untouched
  label: string; // percent formatting of the same value
}

export function allocationBars(payload: RecommendPayload): AllocationBar[] {
  return Object.entries(payload.weights).map(([symbol, weight]) => ({
    symbol,
    weight,
    label: formatPercent(weight),
  }));
}

export function formatPercent(weight: number): string {
  return `${(weight * 100).toFixed(1)}%`;
}

export interface SideBySide {
  symbols: string[];
  columns: { method: string; bars: (AllocationBar | null)[] }[];
}

/** Align two allocation payloads per ticker for the both-methods view. */
export function sideBySide(payloads: RecommendPayload[]): SideBySide {
  const symbols = Array.from(
    new Set(payloads.flatMap((p) => Object.keys(p.weights))),
  ).sort();
  return {
    symbols,
    columns: payloads.map((p) => ({
      method: p.method,
      bars: symbols.map((s) =>
        s in p.weights ? { symbol: s, weight: p.weights[s], label: formatPercent(p.weights[s]) } : null,
      ),
    })),
  };
}
