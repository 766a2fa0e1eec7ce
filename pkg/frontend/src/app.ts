// DOM wiring: all numbers rendered here come from payloads or the pure
// view models; this layer only places them into elements.

import { ApiClient, ApiError, dedupe } from "./api";
import { allocationBars, sideBySide } from "./allocation";
import { alignLedgers, budgetChart } from "./backtestView";
import { frontierChart, selectFrontierPoint } from "./frontier";
import { initialState, validate, ViewState } from "./state";
import type { FrontierPayload, StocksPayload } from "./types";

const api = new ApiClient();
const getFrontier = dedupe((date?: string) => api.frontier(date));
const getRecommend = dedupe((method: string, eta: number, date?: string) =>
  api.recommend(method, eta, date),
);
const getBacktest = dedupe((method: string, days: number, eta: number, seed?: number) =>
  api.backtest(method, days, eta, seed),
);

let stocks: StocksPayload;
let state: ViewState;
let cachedFrontier: FrontierPayload | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function setText(id: string, text: string) {
  el(id).textContent = text;
}

async function boot() {
  stocks = await api.stocks();
  state = initialState(stocks);
  setText(
    "meta",
    `universe ${stocks.stocks.length} stocks, decisions ` +
      `${stocks.decision_days.first} to ${stocks.decision_days.last} ` +
      `(config ${stocks.fingerprint})`,
  );
  const slider = el<HTMLInputElement>("eta");
  slider.value = String(state.eta);
  slider.addEventListener("input", () => {
    state.eta = Number(slider.value);
    setText("eta-value", state.eta.toFixed(2));
    renderFrontierFromCache();
    void refreshAllocation();
  });
  setText("eta-value", state.eta.toFixed(2));

  el<HTMLSelectElement>("method").addEventListener("change", (ev) => {
    state.method = (ev.target as HTMLSelectElement).value as ViewState["method"];
    void refreshAllocation();
  });
  const dateInput = el<HTMLInputElement>("date");
  dateInput.min = stocks.decision_days.first;
  dateInput.max = stocks.decision_days.last;
  dateInput.addEventListener("change", () => {
    state.date = dateInput.value || null;
    cachedFrontier = null;
    void refreshAll();
  });
  el<HTMLInputElement>("horizon").addEventListener("change", (ev) => {
    state.horizon = Number((ev.target as HTMLInputElement).value);
    void refreshBacktest();
  });
  await refreshAll();
}

async function refreshAll() {
  const violations = validate(state, stocks);
  setText("errors", violations.map((v) => v.message).join("; "));
  if (violations.length) return;
  await Promise.all([refreshFrontier(), refreshAllocation(), refreshBacktest()]);
}

async function refreshFrontier() {
  try {
    cachedFrontier = await getFrontier(state.date ?? undefined);
    renderFrontierFromCache();
  } catch (err) {
    renderError("frontier-note", err);
  }
}

function renderFrontierFromCache() {
  if (!cachedFrontier) return;
  if (cachedFrontier.points.length === 0) {
    setText("frontier-note", "no frontier points for this date");
    return;
  }
  const chart = frontierChart(cachedFrontier, state.eta);
  const svg = el<HTMLElement>("frontier-svg");
  svg.innerHTML =
    `<path d="${chart.path}" fill="none" stroke="#4477aa" stroke-width="1.5"/>` +
    chart.points
      .map(
        (p) =>
          `<circle cx="${p.x.toFixed(2)}" cy="${p.y.toFixed(2)}" r="${p.selected ? 6 : 2.5}"` +
          ` fill="${p.selected ? "#ee6677" : "#4477aa"}"/>`,
      )
      .join("");
  const picked = selectFrontierPoint(cachedFrontier, state.eta).point;
  setText(
    "frontier-note",
    `selected risk ${picked.risk.toExponential(3)}, expected return ` +
      `${picked.expected_return.toExponential(3)}${chart.singlePoint ? " (single point)" : ""}`,
  );
  el<HTMLInputElement>("eta").disabled = chart.singlePoint;
}

async function refreshAllocation() {
  const methods = state.method === "both" ? ["portfolio", "fic"] : [state.method];
  try {
    const payloads = await Promise.all(
      methods.map((m) => getRecommend(m, state.eta, state.date ?? undefined)),
    );
    const view = sideBySide(payloads);
    const rows = view.symbols
      .map((sym, r) => {
        const cells = view.columns
          .map((col) => {
            const bar = col.bars[r];
            if (!bar) return `<td class="bar-cell">-</td>`;
            const width = Math.max(1, Math.round(bar.weight * 200));
            return (
              `<td class="bar-cell"><div class="bar" style="width:${width}px"></div>` +
              `<span>${bar.label}</span></td>`
            );
          })
          .join("");
        return `<tr><th>${sym}</th>${cells}</tr>`;
      })
      .join("");
    const heads = view.columns.map((c) => `<th>${c.method}</th>`).join("");
    el("allocation-table").innerHTML = `<tr><th></th>${heads}</tr>${rows}`;
    const first = allocationBars(payloads[0]);
    const total = first.reduce((acc, b) => acc + b.weight, 0);
    setText("allocation-note", `weights sum to ${(total * 100).toFixed(2)}%`);
  } catch (err) {
    renderError("allocation-note", err);
  }
}

async function refreshBacktest() {
  try {
    const payloads = await Promise.all(
      ["portfolio", "fic", "random"].map((m) => getBacktest(m, state.horizon, state.eta)),
    );
    const series = alignLedgers(payloads);
    const lines = budgetChart(series);
    const colors: Record<string, string> = {
      portfolio: "#4477aa",
      fic: "#228833",
      random: "#bbbbbb",
    };
    el("backtest-svg").innerHTML = lines
      .map(
        (l) =>
          `<path d="${l.path}" fill="none" stroke="${colors[l.method]}" stroke-width="1.5"/>` +
          l.exitMarkers
            .map((m) => `<rect x="${(m.x - 3).toFixed(2)}" y="${(m.y - 3).toFixed(2)}" width="6" height="6" fill="#ccbb44"/>`)
            .join(""),
      )
      .join("");
    setText(
      "backtest-note",
      payloads.map((p) => `${p.method}: $${p.final_budget.toFixed(2)}`).join("  |  "),
    );
  } catch (err) {
    renderError("backtest-note", err);
  }
}

function renderError(id: string, err: unknown) {
  if (err instanceof ApiError) {
    setText(id, `service error ${err.status}: ${err.message}`);
  } else {
    setText(id, String(err));
  }
}

boot().catch((err) => setText("errors", String(err)));
