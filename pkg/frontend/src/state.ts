/** Session view state and the flows that mutate it.
 *
 * All state derives from API responses; nothing here computes a metric.
 * The committed dashboard only changes on refresh after a commit, so a
 * preview can never leak into it.
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  HistogramDoc,
  LedgerEntryDoc,
  ReportDoc,
  StepDoc,
  UtilityDoc,
  WhatIfDoc,
} from "./types.js";

export interface SessionView {
  sessionId: string;
  report: ReportDoc | null;
  histogram: HistogramDoc | null;
  utility: UtilityDoc | null;
  ledger: LedgerEntryDoc[];
  preview: WhatIfDoc | null;
  banner: string | null;
  expired: boolean;
  commitInFlight: boolean;
}

export function emptyView(sessionId: string): SessionView {
  return {
    sessionId,
    report: null,
    histogram: null,
    utility: null,
    ledger: [],
    preview: null,
    banner: null,
    expired: false,
    commitInFlight: false,
  };
}

export interface TradeOffPoint {
  granularity: number;
  inverseMin: number;
  label: string;
  kind: "committed" | "preview";
}

/** One point per committed ledger entry plus one for the live preview.
 * Entries whose after-state has no report (every quasi column gone)
 * carry no metric to plot and are skipped. */
export function tradeOffPoints(view: SessionView): TradeOffPoint[] {
  const points: TradeOffPoint[] = [];
  for (const entry of view.ledger) {
    if (entry.after === null) continue;
    points.push({
      granularity: entry.utility_after.granularity,
      inverseMin: entry.after.metrics.inverse_min.value,
      label: `step ${entry.index}: ${entry.description}`,
      kind: "committed",
    });
  }
  if (view.preview !== null && view.preview.after !== null) {
    points.push({
      granularity: view.preview.utility_after.granularity,
      inverseMin: view.preview.after.metrics.inverse_min.value,
      label: "preview",
      kind: "preview",
    });
  }
  return points;
}

export interface DisplayNumber {
  /** What the chip shows. */
  text: string;
  /** The raw API value, exactly, for the hover title. */
  raw: string;
}

/** Display formatting that never loses the raw value: the text is the
 * API number verbatim unless it is too long for a chip, and the raw
 * string is always carried alongside for the hover title. */
export function displayNumber(value: number): DisplayNumber {
  const raw = String(value);
  const text = raw.length <= 8 ? raw : value.toFixed(3);
  return { text, raw };
}

export function commitEnabled(view: SessionView): boolean {
  return view.preview !== null && !view.commitInFlight && !view.expired;
}

/** Drives one session against the API and keeps the view in sync. */
export class Workbench {
  readonly api: ApiClient;
  view: SessionView;
  private listeners: Array<(view: SessionView) => void> = [];

  constructor(api: ApiClient, sessionId: string) {
    this.api = api;
    this.view = emptyView(sessionId);
  }

  onChange(listener: (view: SessionView) => void): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<SessionView>): void {
    this.view = { ...this.view, ...patch };
    for (const listener of this.listeners) listener(this.view);
  }

  private handleFailure(error: unknown): void {
    if (error instanceof ApiError && error.status === 404) {
      this.update({ expired: true, preview: null });
      return;
    }
    const message =
      error instanceof ApiError
        ? error.status === 409
          ? "another commit was in flight; reload to see the latest state"
          : error.message
        : String(error);
    this.update({ banner: message, preview: null });
  }

  /** Pull the committed dashboard: report, histogram, utility, ledger. */
  async refresh(): Promise<void> {
    const id = this.view.sessionId;
    try {
      const [report, histogram, utility, ledger] = await Promise.all([
        this.api.report(id),
        this.api.histogram(id),
        this.api.utility(id),
        this.api.ledger(id),
      ]);
      this.update({ report, histogram, utility, ledger, banner: null });
    } catch (error) {
      this.handleFailure(error);
    }
  }

  /** Preview a candidate step. The committed view is untouched; only the
   * preview panel changes. A failed preview is discarded with a banner. */
  async preview(step: StepDoc): Promise<WhatIfDoc | null> {
    try {
      const doc = await this.api.whatif(this.view.sessionId, step);
      this.update({ preview: doc, banner: null });
      return doc;
    } catch (error) {
      this.handleFailure(error);
      return null;
    }
  }

  discardPreview(): void {
    this.update({ preview: null });
  }

  /** Commit the previewed step. Gated so a double-click cannot commit
   * twice: the second call sees commitInFlight and does nothing. */
  async commitPreviewed(): Promise<LedgerEntryDoc | null> {
    if (!commitEnabled(this.view)) return null;
    const step = this.view.preview!.step;
    this.update({ commitInFlight: true });
    try {
      const response = await this.api.commit(this.view.sessionId, step);
      this.update({ preview: null, report: response.report });
      await this.refresh();
      return response.entry;
    } catch (error) {
      this.handleFailure(error);
      return null;
    } finally {
      this.update({ commitInFlight: false });
    }
  }
}
