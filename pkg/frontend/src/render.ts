import { escapeHtml, percent1, verbatim } from "./format.js";
import type { SessionState } from "./state.js";
import type {
  NetworkPayload,
  OptimizePayload,
  RiskPayload,
  SensitivityPayload,
} from "./types.js";

/** Pure renderers: state in, HTML string out. Replaying the same inputs
 * yields byte-identical markup, which is what keeps rendering idempotent. */

export function renderBanner(offline: boolean): string {
  if (!offline) return "";
  return (
    '<div class="banner offline" role="alert">service unreachable - ' +
    "controls disabled until it answers again</div>"
  );
}

export function renderComponentPanel(
  network: NetworkPayload,
  state: SessionState,
  ranks: Map<number, number> | null,
): string {
  const warn =
    state.selected.size > state.budget
      ? `<div class="banner warn">selection uses ${state.selected.size} of ` +
        `${state.budget} budgeted components</div>`
      : "";
  const disabled = state.offline ? " disabled" : "";
  const rows = network.maintainable
    .map((component) => {
      const checked = state.selected.has(component.id) ? " checked" : "";
      const rank = ranks?.get(component.id);
      const rankCell = rank === undefined ? "-" : String(rank);
      return (
        `<tr><td><input type="checkbox" data-component-id="${component.id}"` +
        `${checked}${disabled}></td>` +
        `<td>${component.id}</td>` +
        `<td>${escapeHtml(component.kind)}</td>` +
        `<td>${component.from_bus}-${component.to_bus}</td>` +
        `<td>${rankCell}</td></tr>`
      );
    })
    .join("");
  return (
    warn +
    '<table class="components"><thead><tr>' +
    "<th></th><th>id</th><th>kind</th><th>buses</th><th>rank</th>" +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderErrorBar(payload: RiskPayload): string {
  const [lo, hi] = payload.interval;
  const span = hi - lo;
  const pos = span > 0 ? ((payload.risk - lo) / span) * 100 : 50;
  return (
    '<div class="errorbar">' +
    `<span class="lo">${verbatim(lo)}</span>` +
    `<span class="bar"><span class="dot" style="left:${pos.toFixed(1)}%"></span></span>` +
    `<span class="hi">${verbatim(hi)}</span>` +
    "</div>"
  );
}

export function renderRiskSummary(state: SessionState): string {
  const payload = state.lastResponse;
  if (payload === null) {
    return '<div class="risk-summary empty">no estimate yet</div>';
  }
  const growHint =
    payload.required_n !== null && payload.required_n > payload.n
      ? `<div class="hint">estimate wants ${verbatim(payload.required_n)} samples ` +
        `(have ${verbatim(payload.n)}) - grow samples offline: ` +
        "<code>gridrisk simulate --n " +
        `${verbatim(payload.required_n)}</code></div>`
      : "";
  const error = state.error
    ? `<div class="banner error">${escapeHtml(state.error)}</div>`
    : "";
  const pendingClass = state.pending ? " pending" : "";
  return (
    `<div class="risk-summary${pendingClass}">` +
    error +
    `<div class="figure">risk <strong>${verbatim(payload.risk)}</strong> MW` +
    ` <span class="baseline">(baseline ${verbatim(payload.baseline_risk)})</span></div>` +
    `<div class="figure">reduction <strong>${percent1(payload.reduction_ratio)}</strong></div>` +
    `<div class="figure">relative error bound ${
      payload.epsilon_hat === null ? "n/a" : percent1(payload.epsilon_hat)
    } <span class="eps-raw">(epsilon_hat ${verbatim(payload.epsilon_hat)})</span></div>` +
    renderErrorBar(payload) +
    `<div class="figure small">n ${verbatim(payload.n)}, required_n ${verbatim(
      payload.required_n,
    )}</div>` +
    growHint +
    "</div>"
  );
}

export function renderSensitivity(payload: SensitivityPayload): string {
  const rows = payload.rows
    .map(
      (row, index) =>
        `<tr><td>${index + 1}</td><td>${row.component}</td>` +
        `<td>${verbatim(row.risk)}</td>` +
        `<td>${percent1(row.reduction_ratio)}</td></tr>`,
    )
    .join("");
  return (
    '<table class="sensitivity"><thead><tr>' +
    "<th>rank</th><th>component</th><th>risk</th><th>reduction</th>" +
    `</tr></thead><tbody>${rows}</tbody>` +
    `<tfoot><tr><td>mean</td><td>-</td><td>${verbatim(payload.mean.risk)}</td>` +
    `<td>${percent1(payload.mean.reduction_ratio)}</td></tr></tfoot></table>`
  );
}

export function renderOptimizeResult(payload: OptimizePayload): string {
  const cred = payload.credibility;
  const epsilon = cred === null ? null : cred.epsilon_hat;
  const requiredN = cred === null ? null : cred.required_n;
  const n = cred === null ? null : cred.n;
  const growHint =
    requiredN !== null && n !== null && requiredN > n
      ? `<div class="hint">credibility wants ${verbatim(requiredN)} samples ` +
        `(have ${verbatim(n)}) - grow samples offline with the CLI</div>`
      : "";
  return (
    '<div class="optimize-result">' +
    `<div class="figure">strategy <strong>[${payload.strategy.join(", ")}]</strong></div>` +
    `<div class="figure">risk ${verbatim(payload.risk)} MW ` +
    `(baseline ${verbatim(payload.baseline_risk)})</div>` +
    `<div class="figure">reduction <strong>${percent1(payload.reduction_ratio)}</strong></div>` +
    `<div class="figure">scenarios evaluated ${payload.scenarios_evaluated}` +
    ` (all sizes ${payload.scenarios_total})</div>` +
    `<div class="figure">epsilon_hat ${verbatim(epsilon)}</div>` +
    growHint +
    `<button type="button" id="apply-strategy" data-strategy="${payload.strategy.join(",")}">` +
    "apply to selection</button>" +
    "</div>"
  );
}

export function renderOptimizeError(message: string): string {
  return `<div class="optimize-result"><div class="banner error">${escapeHtml(
    message,
  )}</div></div>`;
}
