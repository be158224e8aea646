/** Hand-built API documents for the unit tests, shaped exactly like the
 * service output (the integration suite checks the real thing). */

import type {
  HistogramDoc,
  LedgerEntryDoc,
  ReportDoc,
  UtilityDoc,
  WhatIfDoc,
} from "../src/types.js";

export function reportDoc(overrides: Partial<ReportDoc> = {}): ReportDoc {
  return {
    quasi_set: ["Gender", "Age"],
    policy: {
      name: "open-release",
      risk_threshold: 0.09,
      min_class_size: 11,
      assumed_p_attack: 1.0,
      environment: "open-release",
    },
    record_count: 242,
    class_count: 8,
    min_class_size: 18,
    metrics: {
      small_class_fraction: { value: 0.0, fraction: "0/242" },
      inverse_average: { value: 0.033, fraction: "8/242" },
      inverse_min: { value: 0.056, fraction: "1/18" },
      tau: 5,
    },
    checks: {
      k: { k: 11, passed: true, violations: [] },
      strict_average: { passed: true, min_size: 18, average: 30.25 },
      l_diversity: null,
      t_closeness: null,
    },
    passed: true,
    ...overrides,
  };
}

export function utilityDoc(overrides: Partial<UtilityDoc> = {}): UtilityDoc {
  return {
    attribute_retention: 1.0,
    granularity: 1.0,
    record_retention: 1.0,
    scalar: 1.0,
    ...overrides,
  };
}

export function histogramDoc(overrides: Partial<HistogramDoc> = {}): HistogramDoc {
  return {
    record_count: 242,
    class_count: 8,
    histogram: [
      { size: 18, classes: 1 },
      { size: 20, classes: 1 },
      { size: 23, classes: 1 },
      { size: 30, classes: 3 },
      { size: 36, classes: 1 },
      { size: 55, classes: 1 },
    ],
    ...overrides,
  };
}

export function whatIfDoc(overrides: Partial<WhatIfDoc> = {}): WhatIfDoc {
  const after = reportDoc({
    quasi_set: ["Age"],
    class_count: 4,
    min_class_size: 48,
    metrics: {
      small_class_fraction: { value: 0.0, fraction: "0/242" },
      inverse_average: { value: 0.017, fraction: "4/242" },
      inverse_min: { value: 0.021, fraction: "1/48" },
      tau: 5,
    },
  });
  return {
    step: { kind: "remove-attribute", target: ["Gender"] },
    before: reportDoc(),
    after,
    utility_before: utilityDoc(),
    utility_after: utilityDoc({ attribute_retention: 0.5, granularity: 0.5, scalar: 2 / 3 }),
    deltas: {
      attribute_retention: -0.5,
      granularity: -0.5,
      record_retention: 0.0,
      small_class_fraction: 0.0,
      inverse_average: -0.01652892561983471,
      inverse_min: -0.034722222222222224,
      min_class_size: 30.0,
    },
    meets_policy: true,
    info: {},
    ...overrides,
  };
}

export function ledgerEntryDoc(
  index: number,
  overrides: Partial<LedgerEntryDoc> = {},
): LedgerEntryDoc {
  const preview = whatIfDoc();
  return {
    index,
    step: preview.step,
    description: "remove-attribute Gender",
    before: preview.before,
    after: preview.after,
    utility_before: preview.utility_before,
    utility_after: preview.utility_after,
    info: {},
    timestamp: "2026-08-16T12:00:00+00:00",
    committed: true,
    ...overrides,
  };
}
