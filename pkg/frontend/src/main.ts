import { ApiClient, ApiError, OfflineError } from "./api.js";
import {
  initialState,
  replaceSelection,
  riskRequest,
  RiskQueryQueue,
  toggleComponent,
  validateOptimizeForm,
  type SessionState,
} from "./state.js";
import {
  renderBanner,
  renderComponentPanel,
  renderOptimizeError,
  renderOptimizeResult,
  renderRiskSummary,
  renderSensitivity,
} from "./render.js";
import type { NetworkPayload } from "./types.js";

const api = new ApiClient(window.location.origin.startsWith("http")
  ? ""
  : "http://127.0.0.1:8000");

let state: SessionState = initialState();
let network: NetworkPayload | null = null;
let ranks: Map<number, number> | null = null;

const el = (id: string) => document.getElementById(id)!;

const queue = new RiskQueryQueue((req) => api.risk(req), {
  onResult: (req, payload) => {
    state = { ...state, lastResponse: payload, pending: false, offline: false, error: null };
    paint();
  },
  onError: (req, err) => {
    if (err instanceof OfflineError) {
      state = { ...state, pending: false, offline: true };
    } else if (err instanceof ApiError) {
      state = { ...state, pending: false, error: err.detail };
    } else {
      state = { ...state, pending: false, error: String(err) };
    }
    paint();
  },
});

function queryRisk(): void {
  state = { ...state, pending: true };
  queue.request(riskRequest(state));
  paint();
}

function paint(): void {
  el("banner").innerHTML = renderBanner(state.offline);
  if (network !== null) {
    el("components").innerHTML = renderComponentPanel(network, state, ranks);
    el("components")
      .querySelectorAll("input[data-component-id]")
      .forEach((box) => {
        box.addEventListener("change", (event: Event) => {
          const target = event.target as HTMLInputElement;
          state = toggleComponent(state, Number(target.dataset.componentId));
          queryRisk();
        });
      });
  }
  el("risk").innerHTML = renderRiskSummary(state);
}

async function refreshSensitivity(): Promise<void> {
  try {
    const payload = await api.sensitivity(state.y0);
    ranks = new Map(payload.rows.map((row, index) => [row.component, index + 1]));
    el("sensitivity").innerHTML = renderSensitivity(payload);
    paint();
  } catch (err) {
    el("sensitivity").innerHTML = renderOptimizeError(String(err));
  }
}

async function runOptimize(): Promise<void> {
  const input = {
    alg: (el("opt-alg") as HTMLSelectElement).value,
    m_max: Number((el("opt-mmax") as HTMLInputElement).value),
    m_k: (el("opt-mk") as HTMLInputElement).value
      ? Number((el("opt-mk") as HTMLInputElement).value)
      : null,
  };
  const kStar = network === null ? 0 : network.maintainable.length;
  const problem = validateOptimizeForm(input, kStar);
  if (problem !== null) {
    el("optimize").innerHTML = renderOptimizeError(problem);
    return;
  }
  try {
    const payload = await api.optimize({
      alg: input.alg as "enum" | "one" | "two",
      m_max: input.m_max,
      m_k: input.m_k,
      y0: state.y0,
      beta: state.beta,
    });
    state = { ...state, budget: input.m_max };
    el("optimize").innerHTML = renderOptimizeResult(payload);
    el("apply-strategy")?.addEventListener("click", () => {
      state = replaceSelection(state, payload.strategy);
      queryRisk();
    });
  } catch (err) {
    const message = err instanceof ApiError ? err.detail : String(err);
    el("optimize").innerHTML = renderOptimizeError(message);
  }
}

async function boot(): Promise<void> {
  try {
    network = await api.network();
  } catch (err) {
    state = { ...state, offline: true };
    paint();
    return;
  }
  paint();
  el("y0").addEventListener("change", () => {
    state = { ...state, y0: Number((el("y0") as HTMLInputElement).value) };
    queryRisk();
    void refreshSensitivity();
  });
  el("beta").addEventListener("change", () => {
    state = { ...state, beta: Number((el("beta") as HTMLInputElement).value) };
    queryRisk();
  });
  el("opt-run").addEventListener("click", () => void runOptimize());
  el("sens-run").addEventListener("click", () => void refreshSensitivity());
  queue.launch(riskRequest(state));
}

void boot();
