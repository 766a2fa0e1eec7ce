// Payload shapes of the /v1 endpoints, mirrored field by field.

export interface StocksPayload {
  fingerprint: string;
  stocks: string[];
  fic_stocks: string[];
  excluded: Record<string, string>;
  calendar: { start: string; end: string };
  decision_days: { first: string; last: string };
  eta_default: number;
}

export interface ForecastPayload {
  fingerprint: string;
  symbol: string;
  days: string[];
  actual: number[];
  predicted: number[];
  normalized_predicted: number[];
}

export interface FrontierPoint {
  mu: number;
  risk: number;
  expected_return: number;
  weights: Record<string, number>;
}

export interface FrontierPayload {
  fingerprint: string;
  date: string;
  risk_min: number;
  risk_max: number;
  points: FrontierPoint[];
}

export interface RecommendPayload {
  fingerprint: string;
  method: "portfolio" | "fic";
  eta: number;
  date: string;
  weights: Record<string, number>;
  expected_return: number;
  risk: number | null;
  frontier_excerpt?: {
    risk_min: number;
    risk_max: number;
    n_points: number;
    selected_mu: number;
  };
  audit?: { technical: number[]; fundamental: number[]; alpha: number[] };
}

export interface BacktestPayload {
  fingerprint: string;
  method: "portfolio" | "fic" | "random";
  eta: number;
  seed: number;
  initial_budget: number;
  days: string[];
  budget: number[];
  expected_return: number[];
  realized_return: number[];
  invested: boolean[];
  final_budget: number;
  symbols: string[];
  weights: number[][];
}
