/** Pure HTML renderers for every panel: view in, markup string out.
 *
 * Numbers are interpolated through displayNumber, so the text shown is
 * the API value and the hover title always carries it verbatim.
 */

import { displayNumber, commitEnabled } from "./state.js";
import type { SessionView } from "./state.js";
import type {
  LedgerEntryDoc,
  MetricsDoc,
  ReportDoc,
  UtilityDoc,
  WhatIfDoc,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function chip(label: string, value: number, detail?: string): string {
  const shown = displayNumber(value);
  const sub = detail ? `<span class="sub">${escapeHtml(detail)}</span>` : "";
  return (
    `<span class="chip" title="${escapeHtml(shown.raw)}">` +
    `<span class="chip-label">${escapeHtml(label)}</span>` +
    `<span class="chip-value">${escapeHtml(shown.text)}</span>${sub}</span>`
  );
}

export function badge(label: string, passed: boolean): string {
  const cls = passed ? "badge pass" : "badge fail";
  return `<span class="${cls}">${escapeHtml(label)}: ${passed ? "pass" : "FAIL"}</span>`;
}

function metricChips(metrics: MetricsDoc): string {
  return (
    chip("small-class", metrics.small_class_fraction.value, metrics.small_class_fraction.fraction) +
    chip("1/avg", metrics.inverse_average.value, metrics.inverse_average.fraction) +
    chip("1/min", metrics.inverse_min.value, metrics.inverse_min.fraction)
  );
}

export function reportCard(report: ReportDoc): string {
  const checks = report.checks;
  const badges = [
    badge(`k>=${checks.k.k}`, checks.k.passed),
    badge("strict average", checks.strict_average.passed),
  ];
  if (checks.l_diversity !== null) badges.push(badge("l-diversity", checks.l_diversity.passed));
  if (checks.t_closeness !== null) badges.push(badge("t-closeness", checks.t_closeness.passed));
  badges.push(badge("policy", report.passed));
  return (
    `<div class="report-card">` +
    `<p>${report.record_count} records in ${report.class_count} classes ` +
    `(smallest ${report.min_class_size}); quasi set ` +
    `${escapeHtml(report.quasi_set.join(", "))}; policy ${escapeHtml(report.policy.name)}</p>` +
    `<div class="chips">${metricChips(report.metrics)}</div>` +
    `<div class="badges">${badges.join("")}</div></div>`
  );
}

export function utilityCard(utility: UtilityDoc): string {
  return (
    `<div class="chips">` +
    chip("attributes", utility.attribute_retention) +
    chip("granularity", utility.granularity) +
    chip("records", utility.record_retention) +
    chip("scalar", utility.scalar) +
    `</div>`
  );
}

export function previewPanel(preview: WhatIfDoc | null): string {
  if (preview === null) {
    return `<p class="hint">No preview yet. Pick a candidate step to see its effect; nothing changes until you commit.</p>`;
  }
  const before = preview.before
    ? `<div><h4>before</h4>${metricChips(preview.before.metrics)}</div>`
    : "";
  const after = preview.after
    ? `<div><h4>after</h4>${metricChips(preview.after.metrics)}</div>`
    : `<p class="hint">no assessable state after this step (all quasi columns gone)</p>`;
  const deltas = Object.entries(preview.deltas)
    .map(([name, value]) => chip(name, value))
    .join("");
  return (
    `<div class="preview">` +
    `<p>candidate: <code>${escapeHtml(JSON.stringify(preview.step))}</code></p>` +
    before +
    after +
    `<div><h4>deltas</h4><div class="chips">${deltas}</div></div>` +
    badge("would meet policy", preview.meets_policy) +
    `</div>`
  );
}

export function ledgerTimeline(entries: LedgerEntryDoc[]): string {
  if (entries.length === 0) return `<p class="hint">no steps committed yet</p>`;
  const items = entries
    .map((entry) => {
      const verdict =
        entry.after === null ? "" : badge("policy", entry.after.passed);
      return (
        `<li><span class="step-index">${entry.index}</span> ` +
        `<code>${escapeHtml(entry.description)}</code> ` +
        `<span class="timestamp">${escapeHtml(entry.timestamp)}</span> ${verdict}</li>`
      );
    })
    .join("");
  return `<ol class="ledger">${items}</ol>`;
}

export function bannerHtml(message: string | null): string {
  if (message === null) return "";
  return `<div class="banner" role="alert">${escapeHtml(message)}</div>`;
}

export function expiredScreen(sessionId: string): string {
  return (
    `<div class="expired"><h2>session expired</h2>` +
    `<p>The server no longer knows session <code>${escapeHtml(sessionId)}</code> ` +
    `(it may have restarted). Reload to start over.</p></div>`
  );
}

export function commitButtonAttrs(view: SessionView): string {
  return commitEnabled(view) ? "" : "disabled";
}
