import { describe, expect, it } from "vitest";

import { allocationBars } from "../src/allocation";
import { ApiClient, ApiError, dedupe, FetchLike } from "../src/api";
import { budgetSeries } from "../src/backtestView";
import { selectFrontierPoint } from "../src/frontier";
import type {
  BacktestPayload,
  FrontierPayload,
  RecommendPayload,
  StocksPayload,
} from "../src/types";
import backtestFixture from "./fixtures/backtest_portfolio.json";
import frontierFixture from "./fixtures/frontier.json";
import recommendFixture from "./fixtures/recommend_portfolio.json";
import stocksFixture from "./fixtures/stocks.json";

const FIXTURES: Record<string, unknown> = {
  "/v1/stocks": stocksFixture,
  "/v1/frontier": frontierFixture,
  "/v1/recommend": recommendFixture,
  "/v1/backtest": backtestFixture,
};

function interceptingFetch(log: string[]): FetchLike {
  return async (url: string) => {
    log.push(url);
    const path = url.split("?")[0];
    const body = FIXTURES[path];
    if (!body) {
      return { ok: false, status: 404, json: async () => ({ error: "unknown path" }) };
    }
    return { ok: true, status: 200, json: async () => body };
  };
}

/** Collect every numeric leaf of a JSON payload. */
function numericLeaves(node: unknown, out: Set<number>): Set<number> {
  if (typeof node === "number") {
    out.add(node);
  } else if (Array.isArray(node)) {
    node.forEach((v) => numericLeaves(v, out));
  } else if (node && typeof node === "object") {
    Object.values(node).forEach((v) => numericLeaves(v, out));
  }
  return out;
}

describe("ApiClient with intercepted requests", () => {
  it("every request goes through the injected fetch and hits /v1 paths", async () => {
    const log: string[] = [];
    const api = new ApiClient(interceptingFetch(log));
    await api.stocks();
    await api.frontier();
    await api.recommend("portfolio", 0.3);
    await api.backtest("portfolio", 8, 0.3);
    expect(log).toHaveLength(4);
    for (const url of log) {
      expect(url.startsWith("/v1/")).toBe(true);
    }
  });

  it("encodes query parameters and omits undefined ones", async () => {
    const log: string[] = [];
    const api = new ApiClient(interceptingFetch(log));
    await api.recommend("portfolio", 0.3, "2016-08-01");
    expect(log[0]).toBe("/v1/recommend?method=portfolio&eta=0.3&date=2016-08-01");
    await api.frontier();
    expect(log[1]).toBe("/v1/frontier");
  });

  it("no displayed numeric value is computed client-side", async () => {
    const log: string[] = [];
    const api = new ApiClient(interceptingFetch(log));

    const payloadNumbers = new Set<number>();
    numericLeaves(FIXTURES["/v1/frontier"], payloadNumbers);
    numericLeaves(FIXTURES["/v1/recommend"], payloadNumbers);
    numericLeaves(FIXTURES["/v1/backtest"], payloadNumbers);

    const frontier = (await api.frontier()) as FrontierPayload;
    for (const eta of [0, 0.25, 0.5, 0.75, 1]) {
      const { point } = selectFrontierPoint(frontier, eta);
      expect(payloadNumbers.has(point.risk)).toBe(true);
      expect(payloadNumbers.has(point.expected_return)).toBe(true);
      expect(payloadNumbers.has(point.mu)).toBe(true);
      for (const w of Object.values(point.weights)) {
        expect(payloadNumbers.has(w)).toBe(true);
      }
    }

    const recommend = (await api.recommend("portfolio", 0.3)) as RecommendPayload;
    for (const bar of allocationBars(recommend)) {
      expect(payloadNumbers.has(bar.weight)).toBe(true);
    }

    const backtest = (await api.backtest("portfolio", 8, 0.3)) as BacktestPayload;
    const series = budgetSeries(backtest);
    for (const value of series.budget) {
      expect(payloadNumbers.has(value)).toBe(true);
    }
  });

  it("carries the service's config fingerprint on every payload", async () => {
    const api = new ApiClient(interceptingFetch([]));
    const stocks = (await api.stocks()) as StocksPayload;
    const frontier = (await api.frontier()) as FrontierPayload;
    expect(stocks.fingerprint).toBe(frontier.fingerprint);
  });

  it("maps error bodies to ApiError with the status", async () => {
    const api = new ApiClient(async () => ({
      ok: false,
      status: 422,
      json: async () => ({ error: "outside the usable decision range" }),
    }));
    await expect(api.frontier("1999-01-01")).rejects.toThrowError(ApiError);
    await expect(api.frontier("1999-01-01")).rejects.toMatchObject({ status: 422 });
  });
});

describe("dedupe", () => {
  it("coalesces concurrent identical requests", async () => {
    let calls = 0;
    const fn = dedupe(async (x: number) => {
      calls += 1;
      await new Promise((resolve) => setTimeout(resolve, 5));
      return x * 1; // identity
    });
    const [a, b, c] = await Promise.all([fn(7), fn(7), fn(8)]);
    expect([a, b, c]).toEqual([7, 7, 8]);
    expect(calls).toBe(2);
  });

  it("does not cache after settlement", async () => {
    let calls = 0;
    const fn = dedupe(async () => ++calls);
    await fn();
    await fn();
    expect(calls).toBe(2);
  });
});
