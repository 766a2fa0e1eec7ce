// Budget-curve view models for one or more strategy ledgers.

import type { BacktestPayload } from "./types";

export interface BudgetSeries {
  method: string;
  days: string[];
  budget: number[]; // payload values, untouched
  exitDays: number[]; // indices of days the strategy stayed out
}

export interface HoverDetail {
  day: string;
  budget: number;
  invested: boolean;
  weights: { symbol: string; weight: number }[];
}

export function budgetSeries(payload: BacktestPayload): BudgetSeries {
  return {
    method: payload.method,
    days: payload.days,
    budget: payload.budget,
    exitDays: payload.invested
      .map((flag, k) => (flag ? -1 : k))
      .filter((k) => k >= 0),
  };
}

export function alignLedgers(payloads: BacktestPayload[]): BudgetSeries[] {
  if (payloads.length === 0) return [];
  const first = payloads[0].days;
  for (const p of payloads) {
    if (p.days.length !== first.length || p.days[0] !== first[0]) {
      throw new Error("backtest horizons do not align");
    }
  }
  return payloads.map(budgetSeries);
}

export function hoverDetail(payload: BacktestPayload, dayIndex: number): HoverDetail {
  return {
    day: payload.days[dayIndex],
    budget: payload.budget[dayIndex],
    invested: payload.invested[dayIndex],
    weights: payload.symbols.map((symbol, i) => ({
      symbol,
      weight: payload.weights[dayIndex][i],
    })),
  };
}

export interface LinePath {
  method: string;
  path: string;
  exitMarkers: { x: number; y: number }[];
}

export function budgetChart(
  series: BudgetSeries[],
  width = 640,
  height = 300,
  pad = 40,
): LinePath[] {
  const all = series.flatMap((s) => s.budget);
  const lo = Math.min(...all);
  const hi = Math.max(...all);
  const span = hi - lo;
  const n = Math.max(...series.map((s) => s.budget.length));
  const sx = (k: number) => pad + (n > 1 ? (k / (n - 1)) * (width - 2 * pad) : (width - 2 * pad) / 2);
  const sy = (b: number) => height - pad - (span > 0 ? ((b - lo) / span) * (height - 2 * pad) : (height - 2 * pad) / 2);
  return series.map((s) => ({
    method: s.method,
    path: s.budget.map((b, k) => `${k === 0 ? "M" : "L"}${sx(k).toFixed(2)},${sy(b).toFixed(2)}`).join(" "),
    exitMarkers: s.exitDays.map((k) => ({ x: sx(k), y: sy(s.budget[k]) })),
  }));
}
