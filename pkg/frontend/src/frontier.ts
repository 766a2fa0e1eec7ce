// Frontier display logic: eta-to-point selection over cached payload data
// and chart geometry.  Selection only compares payload numbers; no risk or
// return is recomputed here.

import type { FrontierPayload, FrontierPoint } from "./types";

export interface FrontierSelection {
  index: number;
  point: FrontierPoint;
  cap: number;
}

/**
 * The service contract, re-applied to the cached payload so slider moves
 * need no refetch: cap = risk_min + eta * (risk_max - risk_min), then the
 * highest expected return among points with risk <= cap.
 */
export function selectFrontierPoint(payload: FrontierPayload, eta: number): FrontierSelection {
  if (payload.points.length === 0) {
    throw new Error("empty frontier");
  }
  const cap = payload.risk_min + eta * (payload.risk_max - payload.risk_min);
  let index = -1;
  for (let k = 0; k < payload.points.length; k++) {
    const p = payload.points[k];
    if (p.risk <= cap + 1e-12) {
      if (index < 0 || p.expected_return > payload.points[index].expected_return) {
        index = k;
      }
    }
  }
  if (index < 0) {
    // numerical guard: fall back to the least risky point
    index = payload.points.reduce(
      (best, p, k) => (p.risk < payload.points[best].risk ? k : best),
      0,
    );
  }
  return { index, point: payload.points[index], cap };
}

export interface ChartPoint {
  x: number;
  y: number;
  risk: number;
  expected_return: number;
  selected: boolean;
}

export interface FrontierChart {
  points: ChartPoint[];
  path: string;
  singlePoint: boolean;
}

/** Map payload points into a unit viewport, marking the selected one. */
export function frontierChart(
  payload: FrontierPayload,
  eta: number,
  width = 640,
  height = 360,
  pad = 40,
): FrontierChart {
  const selection = selectFrontierPoint(payload, eta);
  const risks = payload.points.map((p) => p.risk);
  const returns = payload.points.map((p) => p.expected_return);
  const xSpan = Math.max(...risks) - Math.min(...risks);
  const ySpan = Math.max(...returns) - Math.min(...returns);
  const x0 = Math.min(...risks);
  const y0 = Math.min(...returns);
  const sx = (r: number) => pad + (xSpan > 0 ? ((r - x0) / xSpan) * (width - 2 * pad) : (width - 2 * pad) / 2);
  const sy = (v: number) => height - pad - (ySpan > 0 ? ((v - y0) / ySpan) * (height - 2 * pad) : (height - 2 * pad) / 2);
  const points = payload.points.map((p, k) => ({
    x: sx(p.risk),
    y: sy(p.expected_return),
    risk: p.risk,
    expected_return: p.expected_return,
    selected: k === selection.index,
  }));
  const path = points.map((p, k) => `${k === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`).join(" ");
  return { points, path, singlePoint: payload.points.length === 1 };
}
