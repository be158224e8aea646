"""Disclosure-control toolkit for clinical-style tabular data and documents:
re-identification risk metrics, de-identification transforms, narrative and
table anonymization, and session-based risk/utility exploration."""

from .attack import (
    CONTROLLED,
    OPEN_RELEASE,
    AttackScenario,
    PolicyThresholds,
    RiskBreakdown,
    classify_environment,
    combined_risk,
    naive_reciprocal,
    preset,
    required_min_class_size,
)
from .metrics import (
    CHI_SQUARED,
    ORDERED_EMD,
    TOTAL_VARIATION,
    EquivalencePartition,
    RiskMetrics,
    check_k_anonymity,
    check_l_diversity,
    check_strict_average,
    check_t_closeness,
    partition,
    risk_metrics,
)
from .model import (
    MISSING,
    AttributeSchema,
    Dataset,
    DeidentError,
    EnumeratedDomain,
    GeneralizationHierarchy,
    Kind,
    RangeDomain,
    Role,
    build_hierarchy,
    hierarchy_from_json,
    hierarchy_to_json,
    load_dataset,
    save_dataset,
    schema_from_json,
    schema_to_json,
    validate,
)
from .narrative import (
    Action,
    AnnotatedNarrative,
    NarrativePolicy,
    Span,
    apply_narrative_policy,
    policy_from_json,
    redact_all_policy,
)
from .pipeline import (
    AnonymizationPlan,
    AuditLedger,
    ConflictError,
    LedgerEntry,
    RiskReport,
    Session,
    SessionRegistry,
    UtilityProxies,
    WhatIfResult,
    apply_plan,
    evaluate,
    suggest_next,
    utility_score,
    what_if,
)
from .tables import (
    ContingencyTable,
    TableAudit,
    audit_table,
    merge_table_categories,
)
from .transforms import (
    FixedDateOffset,
    Predicate,
    PseudonymAssigner,
    SubjectOffsetMap,
    TransformStep,
    apply_step,
    band_numeric,
    generalize,
    offset_dates,
    parse_predicate,
    pseudonymize,
    relative_days,
    remove_attribute,
    suppress_records,
)

__version__ = "0.1.0"
