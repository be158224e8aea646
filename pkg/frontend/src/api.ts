/** Thin fetch client for the anonymization service.
 *
 * This is the only place the app touches the network, and the documents
 * come back exactly as the service serialized them.
 */

import type {
  CommitResponseDoc,
  HistogramDoc,
  LedgerEntryDoc,
  ReportDoc,
  SessionDoc,
  StepDoc,
  UtilityDoc,
  WhatIfDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const doc = (await response.json()) as { error?: string; detail?: string };
    detail = doc.error ?? doc.detail ?? detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  readonly base: string;

  constructor(base: string) {
    this.base = base.replace(/\/$/, "");
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) return parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) return parseError(response);
    return (await response.json()) as T;
  }

  async listSessions(): Promise<SessionDoc[]> {
    const doc = await this.get<{ sessions: SessionDoc[] }>("/sessions");
    return doc.sessions;
  }

  async createSession(
    dataCsv: string,
    schemaJson: string,
    options: { policy?: string; quasi?: string; tau?: number } = {},
  ): Promise<SessionDoc> {
    const form = new FormData();
    form.append("data", new Blob([dataCsv], { type: "text/csv" }), "data.csv");
    form.append(
      "schema",
      new Blob([schemaJson], { type: "application/json" }),
      "schema.json",
    );
    if (options.policy !== undefined) form.append("policy", options.policy);
    if (options.quasi !== undefined) form.append("quasi", options.quasi);
    if (options.tau !== undefined) form.append("tau", String(options.tau));
    const response = await fetch(this.base + "/sessions", {
      method: "POST",
      body: form,
    });
    if (!response.ok) return parseError(response);
    return (await response.json()) as SessionDoc;
  }

  report(sessionId: string): Promise<ReportDoc> {
    return this.get(`/sessions/${sessionId}/report`);
  }

  histogram(sessionId: string): Promise<HistogramDoc> {
    return this.get(`/sessions/${sessionId}/histogram`);
  }

  utility(sessionId: string): Promise<UtilityDoc> {
    return this.get(`/sessions/${sessionId}/utility`);
  }

  ledger(sessionId: string): Promise<LedgerEntryDoc[]> {
    return this.get<{ entries: LedgerEntryDoc[] }>(
      `/sessions/${sessionId}/ledger`,
    ).then((doc) => doc.entries);
  }

  whatif(sessionId: string, step: StepDoc): Promise<WhatIfDoc> {
    return this.post(`/sessions/${sessionId}/whatif`, step);
  }

  commit(sessionId: string, step: StepDoc): Promise<CommitResponseDoc> {
    return this.post(`/sessions/${sessionId}/commit`, step);
  }
}
