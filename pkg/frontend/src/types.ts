/** Mirrors of the HTTP API documents, field for field.
 *
 * Every number shown in the UI is carried through from these documents
 * untouched; the client never computes a metric itself.
 */

export interface MetricDoc {
  value: number;
  fraction: string;
}

export interface MetricsDoc {
  small_class_fraction: MetricDoc;
  inverse_average: MetricDoc;
  inverse_min: MetricDoc;
  tau: number;
}

export interface PolicyDoc {
  name: string;
  risk_threshold: number;
  min_class_size: number;
  assumed_p_attack: number;
  environment: string;
}

export interface KCheckDoc {
  k: number;
  passed: boolean;
  violations: Record<string, unknown>[];
}

export interface StrictAverageDoc {
  passed: boolean;
  min_size: number;
  average: number;
}

export interface ReportDoc {
  quasi_set: string[];
  policy: PolicyDoc;
  record_count: number;
  class_count: number;
  min_class_size: number;
  metrics: MetricsDoc;
  checks: {
    k: KCheckDoc;
    strict_average: StrictAverageDoc;
    l_diversity: { passed: boolean } | null;
    t_closeness: { passed: boolean } | null;
  };
  passed: boolean;
}

export interface UtilityDoc {
  attribute_retention: number;
  granularity: number;
  record_retention: number;
  scalar: number;
}

export interface StepDoc {
  kind: string;
  target?: string[];
  params?: Record<string, unknown>;
}

export interface WhatIfDoc {
  step: StepDoc;
  before: ReportDoc | null;
  after: ReportDoc | null;
  utility_before: UtilityDoc;
  utility_after: UtilityDoc;
  deltas: Record<string, number>;
  meets_policy: boolean;
  info: Record<string, unknown>;
}

export interface LedgerEntryDoc {
  index: number;
  step: StepDoc;
  description: string;
  before: ReportDoc | null;
  after: ReportDoc | null;
  utility_before: UtilityDoc;
  utility_after: UtilityDoc;
  info: Record<string, unknown>;
  timestamp: string;
  committed: boolean;
}

export interface HistogramEntryDoc {
  size: number;
  classes: number;
}

export interface HistogramDoc {
  record_count: number;
  class_count: number;
  histogram: HistogramEntryDoc[];
}

export interface SessionDoc {
  id: string;
  label: string;
  record_count: number;
  quasi_set: string[];
  policy: PolicyDoc;
  tau: number;
  steps_committed: number;
}

export interface CommitResponseDoc {
  entry: LedgerEntryDoc;
  report: ReportDoc;
}
