// Thin typed client over the /v1 endpoints.  The fetch function is
// injectable so tests can intercept every request and serve fixtures.

import type {
  BacktestPayload,
  ForecastPayload,
  FrontierPayload,
  RecommendPayload,
  StocksPayload,
} from "./types";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private fetchFn: FetchLike = (url) => fetch(url),
    private base: string = "",
  ) {}

  private async get<T>(path: string, params: Record<string, string | number | undefined> = {}): Promise<T> {
    const query = Object.entries(params)
      .filter(([, v]) => v !== undefined)
      .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
      .join("&");
    const url = `${this.base}${path}${query ? `?${query}` : ""}`;
    const response = await this.fetchFn(url);
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(response.status, String(body.error ?? "request failed"));
    }
    return body as T;
  }

  stocks(): Promise<StocksPayload> {
    return this.get("/v1/stocks");
  }

  forecast(symbol: string, start?: string, end?: string): Promise<ForecastPayload> {
    return this.get("/v1/forecast", { symbol, start, end });
  }

  frontier(date?: string): Promise<FrontierPayload> {
    return this.get("/v1/frontier", { date });
  }

  recommend(method: string, eta: number, date?: string): Promise<RecommendPayload> {
    return this.get("/v1/recommend", { method, eta, date });
  }

  backtest(
    method: string,
    days: number,
    eta: number,
    seed?: number,
    start?: string,
  ): Promise<BacktestPayload> {
    return this.get("/v1/backtest", { method, days, eta, seed, start });
  }
}

/** Deduplicate concurrent identical requests by query key. */
export function dedupe<A extends unknown[], R>(
  fn: (...args: A) => Promise<R>,
): (...args: A) => Promise<R> {
  const inflight = new Map<string, Promise<R>>();
  return (...args: A) => {
    const key = JSON.stringify(args);
    const hit = inflight.get(key);
    if (hit) return hit;
    const p = fn(...args).finally(() => inflight.delete(key));
    inflight.set(key, p);
    return p;
  };
}
