import { describe, expect, it } from "vitest";

import {
  renderBanner,
  renderComponentPanel,
  renderErrorBar,
  renderOptimizeError,
  renderOptimizeResult,
  renderRiskSummary,
  renderSensitivity,
} from "../src/render.js";
import { initialState, replaceSelection, type SessionState } from "../src/state.js";
import type { NetworkPayload, OptimizePayload, RiskPayload } from "../src/types.js";

const network: NetworkPayload = {
  buses: 4,
  branches: 3,
  lines: 0,
  transformers: 3,
  base_mva: 100,
  total_demand: 300,
  maintainable: [
    { id: 1, kind: "transformer", from_bus: 1, to_bus: 2 },
    { id: 2, kind: "transformer", from_bus: 1, to_bus: 3 },
    { id: 3, kind: "transformer", from_bus: 1, to_bus: 4 },
  ],
};

const baselineResponse: RiskPayload = {
  risk: 41.85,
  baseline_risk: 41.85,
  reduction_ratio: 0,
  epsilon_hat: 0.0315,
  interval: [40.53, 43.17],
  required_n: 900,
  n: 10000,
};

function stateWith(overrides: Partial<SessionState>): SessionState {
  return { ...initialState(), ...overrides };
}

describe("component panel", () => {
  it("renders one checkbox row per maintainable component", () => {
    const html = renderComponentPanel(network, initialState(), null);
    expect(html.match(/data-component-id/g)).toHaveLength(3);
    expect(html).toContain('data-component-id="2"');
    expect(html).toContain("transformer");
  });

  it("reflects selection and sensitivity ranks", () => {
    const state = replaceSelection(initialState(), [2]);
    const ranks = new Map([[2, 1], [1, 2], [3, 3]]);
    const html = renderComponentPanel(network, state, ranks);
    expect(html).toContain('data-component-id="2" checked');
    expect(html).not.toContain('data-component-id="1" checked');
    expect(html).toContain("<td>1</td></tr>"); // rank cell for component 2
  });

  it("warns over budget without blocking selection", () => {
    const state = replaceSelection(stateWith({ budget: 2 }), [1, 2, 3]);
    const html = renderComponentPanel(network, state, null);
    expect(html).toContain("selection uses 3 of 2");
    expect(html.match(/ checked/g)).toHaveLength(3);
    expect(html).not.toContain("disabled");
  });

  it("disables controls when offline", () => {
    const html = renderComponentPanel(network, stateWith({ offline: true }), null);
    expect(html.match(/disabled/g)).toHaveLength(3);
    expect(renderBanner(true)).toContain("service unreachable");
    expect(renderBanner(false)).toBe("");
  });
});

describe("risk summary", () => {
  it("shows numbers verbatim and percent to one decimal", () => {
    const payload: RiskPayload = {
      ...baselineResponse,
      risk: 38.15711704081633,
      reduction_ratio: 0.09676214,
    };
    const html = renderRiskSummary(stateWith({ lastResponse: payload }));
    expect(html).toContain("38.15711704081633");
    expect(html).toContain("9.7%");
    expect(html).toContain("40.53");
    expect(html).toContain("43.17");
  });

  it("clear-all shows the baseline and a 0.0% reduction", () => {
    const html = renderRiskSummary(stateWith({ lastResponse: baselineResponse }));
    expect(html).toContain("41.85");
    expect(html).toContain("0.0%");
    expect(html).not.toContain("grow samples offline");
  });

  it("is idempotent: same payload renders byte-identical markup", () => {
    const state = stateWith({ lastResponse: baselineResponse });
    expect(renderRiskSummary(state)).toBe(renderRiskSummary(state));
    expect(renderComponentPanel(network, state, null)).toBe(
      renderComponentPanel(network, state, null),
    );
  });

  it("hints to grow samples offline when required_n exceeds n", () => {
    const payload = { ...baselineResponse, required_n: 95624, n: 10000 };
    const html = renderRiskSummary(stateWith({ lastResponse: payload }));
    expect(html).toContain("grow samples offline");
    expect(html).toContain("95624");
  });

  it("renders API errors inline while keeping the last numbers", () => {
    const state = stateWith({
      lastResponse: baselineResponse,
      error: "unknown component id 42",
    });
    const html = renderRiskSummary(state);
    expect(html).toContain("unknown component id 42");
    expect(html).toContain("41.85");
  });

  it("positions the estimate inside the error bar", () => {
    const html = renderErrorBar(baselineResponse);
    expect(html).toContain("40.53");
    expect(html).toContain("43.17");
    expect(html).toMatch(/left:50\.0%/);
  });
});

describe("optimizer panel", () => {
  const payload: OptimizePayload = {
    strategy: [41, 58, 65, 66],
    risk: 0.08407515066551599,
    baseline_risk: 0.1398073792967537,
    reduction_ratio: 0.39863581530228853,
    scenarios_evaluated: 62,
    scenarios_total: 62,
    algorithm: "two",
    converged: true,
    credibility: {
      risk: 0.08407515066551599,
      variance: 1e-6,
      per_sample_variance: 0.05,
      epsilon_hat: 0.12,
      beta: 0.95,
      interval: [0.07, 0.09],
      required_n: 117311,
      n: 50000,
      absolute_half_width: 0.01,
      nonzero_samples: 300,
      normality_warning: false,
    },
  };

  it("shows strategy, counts, reduction and the grow hint", () => {
    const html = renderOptimizeResult(payload);
    expect(html).toContain("[41, 58, 65, 66]");
    expect(html).toContain("scenarios evaluated 62");
    expect(html).toContain("39.9%");
    expect(html).toContain("credibility wants 117311");
    expect(html).toContain('data-strategy="41,58,65,66"');
  });

  it("is idempotent", () => {
    expect(renderOptimizeResult(payload)).toBe(renderOptimizeResult(payload));
  });

  it("renders refusals and validation errors inline", () => {
    const html = renderOptimizeError(
      "enumeration over 76904685 strategies exceeds the 10000000 cap",
    );
    expect(html).toContain("76904685");
  });
});

describe("sensitivity table", () => {
  it("renders ranked rows plus the mean row", () => {
    const html = renderSensitivity({
      baseline_risk: 41.85,
      rows: [
        { component: 1, risk: 38.15, reduction_ratio: 0.088 },
        { component: 2, risk: 39.9, reduction_ratio: 0.046 },
      ],
      mean: { component: -1, risk: 39.02, reduction_ratio: 0.067 },
      y0: 0,
      n: 10000,
    });
    expect(html).toContain("<td>38.15</td>");
    expect(html).toContain("8.8%");
    expect(html).toContain("mean");
    expect(html).toContain("39.02");
  });
});
