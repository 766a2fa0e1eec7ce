import { describe, expect, it } from "vitest";

import { frontierChart, selectFrontierPoint } from "../src/frontier";
import type { FrontierPayload } from "../src/types";
import frontierFixture from "./fixtures/frontier.json";

const payload = frontierFixture as FrontierPayload;

describe("selectFrontierPoint", () => {
  it("eta = 0 highlights the minimum-risk point", () => {
    const { point } = selectFrontierPoint(payload, 0);
    const minRisk = Math.min(...payload.points.map((p) => p.risk));
    expect(point.risk).toBe(minRisk);
  });

  it("eta = 1 highlights the maximum-return point", () => {
    const { point } = selectFrontierPoint(payload, 1);
    const best = Math.max(...payload.points.map((p) => p.expected_return));
    expect(point.expected_return).toBe(best);
  });

  it("always returns an actual payload point, identically", () => {
    for (const eta of [0, 0.1, 0.3, 0.55, 0.8, 1]) {
      const { index, point } = selectFrontierPoint(payload, eta);
      expect(point).toBe(payload.points[index]);
    }
  });

  it("selected return is non-decreasing in eta", () => {
    let last = -Infinity;
    for (let eta = 0; eta <= 1.0001; eta += 0.05) {
      const { point } = selectFrontierPoint(payload, Math.min(eta, 1));
      expect(point.expected_return).toBeGreaterThanOrEqual(last - 1e-15);
      last = Math.max(last, point.expected_return);
    }
  });

  it("slider moves re-select without any fetch", () => {
    // pure function of the cached payload: same payload + eta, same point
    const a = selectFrontierPoint(payload, 0.4);
    const b = selectFrontierPoint(payload, 0.4);
    expect(a.index).toBe(b.index);
  });

  it("rejects an empty frontier", () => {
    expect(() =>
      selectFrontierPoint({ ...payload, points: [] }, 0.5),
    ).toThrow(/empty/);
  });
});

describe("frontierChart", () => {
  it("marks exactly one point as selected", () => {
    const chart = frontierChart(payload, 0.3);
    expect(chart.points.filter((p) => p.selected)).toHaveLength(1);
  });

  it("carries payload risks and returns through unchanged", () => {
    const chart = frontierChart(payload, 0.3);
    chart.points.forEach((p, k) => {
      expect(p.risk).toBe(payload.points[k].risk);
      expect(p.expected_return).toBe(payload.points[k].expected_return);
    });
  });

  it("degenerate single-point frontier disables the slider", () => {
    const single: FrontierPayload = {
      ...payload,
      points: [payload.points[0]],
      risk_min: payload.points[0].risk,
      risk_max: payload.points[0].risk,
    };
    const chart = frontierChart(single, 0.7);
    expect(chart.singlePoint).toBe(true);
    expect(chart.points[0].selected).toBe(true);
  });
});
