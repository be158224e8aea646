"""Run the whole risk/utility loop on the bundled demo cohort and print
each stage: raw assessment, a what-if preview, the committed plan, the
coarser no-gender cut, utility proxies, the summary-table audit with its
category merge, and the narrative rewrite.
"""

from deident.attack import OPEN_RELEASE
from deident.demo import (
    AGE_BAND_CUTS,
    TABLE_MERGE,
    demo_dataset,
    demo_narrative,
    demo_narrative_policy,
    demo_plan,
    demo_table,
)
from deident.metrics import partition, risk_metrics
from deident.narrative import apply_narrative_policy
from deident.pipeline import apply_plan, evaluate, utility_score, what_if
from deident.tables import audit_table, merge_table_categories
from deident.transforms import BAND_NUMERIC, TransformStep, remove_attribute

QUASI = ["Age", "Gender"]


def show_metrics(label, metrics):
    doc = metrics.to_json()
    print(
        f"  {label}: {metrics.class_count} classes, smallest {metrics.min_size}; "
        f"small-class {doc['small_class_fraction']['value']}, "
        f"inverse-average {doc['inverse_average']['value']}, "
        f"inverse-min {doc['inverse_min']['value']}"
    )


def main() -> int:
    cohort = demo_dataset()
    print(f"cohort: {cohort.record_count} records, "
          f"{len(cohort.schema)} attributes, quasi set {QUASI}")
    show_metrics("raw ages", risk_metrics(partition(cohort, QUASI), tau=5))

    print("\nwhat-if: band Age at cuts", list(AGE_BAND_CUTS))
    candidate = TransformStep(
        BAND_NUMERIC, target=("Age",), params={"cuts": list(AGE_BAND_CUTS)}
    )
    preview = what_if(cohort, candidate, QUASI, OPEN_RELEASE, tau=5)
    for name, delta in sorted(preview.deltas().items()):
        print(f"  {name}: {delta:+.3f}")
    print(f"  would meet open-release policy: {preview.meets_policy}")

    print("\ncommit the plan (suppress oldest, band age):")
    released, ledger = apply_plan(cohort, demo_plan())
    for i, entry in enumerate(ledger.entries, start=1):
        print(f"  step {i}: {entry.step.describe()}")
    report = evaluate(released, QUASI, OPEN_RELEASE, tau=5)
    show_metrics("released", report.metrics)
    print(
        f"  k>={OPEN_RELEASE.min_class_size}: {report.k_check.passed}; "
        f"strict average: min {report.strict_average.min_size}, "
        f"mean {float(report.strict_average.average):.2f}, "
        f"passed {report.strict_average.passed}; "
        f"policy verdict: {'pass' if report.passed else 'FAIL'}"
    )

    print("\ncoarser cut: drop Gender from the release")
    coarser = remove_attribute(released, "Gender")
    show_metrics("age bands only", risk_metrics(partition(coarser, ["Age"]), tau=5))

    utility = utility_score(released, cohort, QUASI)
    print(
        f"\nutility of the release: attributes {utility.attribute_retention:.2f}, "
        f"granularity {utility.granularity:.2f}, "
        f"records {utility.record_retention:.2f} "
        f"(scalar {utility.scalar():.2f})"
    )

    print("\nsummary table audit at threshold 5:")
    table = demo_table()
    audit = audit_table(table, cell_threshold=5)
    for flag in audit.flags:
        print(f"  [{flag.reason}] {flag.row}/{flag.column} = {flag.count}: {flag.note}")
    merged = merge_table_categories(table, TABLE_MERGE)
    post = audit_table(merged, cell_threshold=5)
    print(f"  after merging columns {sorted(set(TABLE_MERGE.values()))}: "
          f"{len(post.flags)} flags")

    print("\nnarrative rewrite:")
    result = apply_narrative_policy(demo_narrative(), demo_narrative_policy())
    print(f"  {result.text}")
    print(f"  ({len(result.log)} spans handled)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
