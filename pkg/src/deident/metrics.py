"""Equivalence-class partitioning and quantitative re-identification risk
metrics: small-class fraction, reciprocal average class size, reciprocal
minimum class size, plus k-anonymity, strict-average, l-diversity and
t-closeness checks.

Metric values are kept as exact rationals (raw counts over totals) so that
reports can round-trip fractions like 8/242 without floating-point loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .model import (
    MISSING,
    Dataset,
    DeidentError,
    EnumeratedDomain,
    Kind,
)


class MetricsError(DeidentError):
    """Bad input to a risk-metric computation."""


Signature = tuple  # values over the quasi set, in schema order


def signature_to_json(quasi_set: Sequence[str], signature: Signature) -> dict[str, str]:
    from .model import render_cell

    return {
        attr: ("<missing>" if v is MISSING else render_cell(v))
        for attr, v in zip(quasi_set, signature)
    }


@dataclass(frozen=True)
class EquivalencePartition:
    """Grouping of record indices by quasi-identifier signature.

    Classes are disjoint, cover every row, and each has at least one member;
    class order is first occurrence in row order, so partitions are
    deterministic for a given dataset.
    """

    quasi_set: tuple[str, ...]
    classes: Mapping[Signature, tuple[int, ...]]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(members) for members in self.classes.values())

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def total(self) -> int:
        return sum(len(members) for members in self.classes.values())

    @property
    def min_size(self) -> int:
        if not self.classes:
            raise MetricsError("empty partition has no smallest class")
        return min(self.sizes)

    def size_histogram(self) -> dict[int, int]:
        """Class size -> number of classes of that size."""
        hist: dict[int, int] = {}
        for size in self.sizes:
            hist[size] = hist.get(size, 0) + 1
        return dict(sorted(hist.items()))


def partition(dataset: Dataset, quasi_set: Sequence[str]) -> EquivalencePartition:
    """Partition records into equivalence classes over the quasi set.

    Signatures are built in schema order regardless of the order names are
    supplied in. An empty dataset yields an empty partition; an empty quasi
    set or an unknown attribute is an error.
    """
    if not quasi_set:
        raise MetricsError("quasi set must be non-empty")
    indices = sorted({dataset.attribute_index(name) for name in quasi_set})
    ordered_names = tuple(dataset.schema[i].name for i in indices)
    classes: dict[Signature, list[int]] = {}
    for r, row in enumerate(dataset.rows):
        signature = tuple(row[i] for i in indices)
        classes.setdefault(signature, []).append(r)
    return EquivalencePartition(
        quasi_set=ordered_names,
        classes={sig: tuple(members) for sig, members in classes.items()},
    )


@dataclass(frozen=True)
class RiskMetrics:
    """The three equivalence-class risk metrics, as exact counts.

    small_count is the number of subjects in classes smaller than tau;
    the derived fractions are small_count/total, class_count/total and
    1/min_size.
    """

    tau: int
    small_count: int
    class_count: int
    total: int
    min_size: int

    @property
    def small_class_fraction(self) -> Fraction:
        return Fraction(self.small_count, self.total)

    @property
    def inverse_average(self) -> Fraction:
        return Fraction(self.class_count, self.total)

    @property
    def inverse_min(self) -> Fraction:
        return Fraction(1, self.min_size)

    @property
    def average_size(self) -> Fraction:
        return Fraction(self.total, self.class_count)

    def to_json(self) -> dict[str, Any]:
        return {
            "small_class_fraction": _metric_json(self.small_count, self.total),
            "inverse_average": _metric_json(self.class_count, self.total),
            "inverse_min": _metric_json(1, self.min_size),
            "tau": self.tau,
        }


def _metric_json(numerator: int, denominator: int) -> dict[str, Any]:
    return {
        "value": round(numerator / denominator, 3),
        "fraction": f"{numerator}/{denominator}",
    }


def risk_metrics(part: EquivalencePartition, tau: int = 5) -> RiskMetrics:
    """Compute the three risk metrics for a non-empty partition."""
    if tau < 1:
        raise MetricsError("tau must be a positive integer")
    if not part.classes:
        raise MetricsError("cannot compute risk metrics on an empty partition")
    sizes = part.sizes
    return RiskMetrics(
        tau=tau,
        small_count=sum(s for s in sizes if s < tau),
        class_count=len(sizes),
        total=sum(sizes),
        min_size=min(sizes),
    )


@dataclass(frozen=True)
class KAnonymityCheck:
    k: int
    passed: bool
    violations: tuple[Signature, ...]

    def to_json(self, quasi_set: Sequence[str]) -> dict[str, Any]:
        return {
            "k": self.k,
            "passed": self.passed,
            "violations": [signature_to_json(quasi_set, s) for s in self.violations],
        }


def check_k_anonymity(part: EquivalencePartition, k: int) -> KAnonymityCheck:
    """Pass iff every class has at least k members; lists violators."""
    if k < 1:
        raise MetricsError("k must be a positive integer")
    violations = tuple(
        sig for sig, members in part.classes.items() if len(members) < k
    )
    return KAnonymityCheck(k=k, passed=not violations, violations=violations)


@dataclass(frozen=True)
class StrictAverageCheck:
    """Combined rule: no class smaller than 3 and average class size >= 10."""

    passed: bool
    min_size: int
    average: Fraction

    def to_json(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "min_size": self.min_size,
            "average": round(float(self.average), 3),
        }


def check_strict_average(part: EquivalencePartition) -> StrictAverageCheck:
    if not part.classes:
        raise MetricsError("strict-average check needs a non-empty partition")
    min_size = part.min_size
    average = Fraction(part.total, part.n_classes)
    return StrictAverageCheck(
        passed=min_size >= 3 and average >= 10,
        min_size=min_size,
        average=average,
    )


@dataclass(frozen=True)
class DiversityReport:
    l: int
    failing_classes: tuple[Signature, ...]
    passed: bool

    def to_json(self, quasi_set: Sequence[str]) -> dict[str, Any]:
        return {
            "l": self.l,
            "passed": self.passed,
            "violations": [
                signature_to_json(quasi_set, s) for s in self.failing_classes
            ],
        }


def check_l_diversity(
    part: EquivalencePartition,
    dataset: Dataset,
    sensitive: str,
    l: int,
) -> DiversityReport:
    """Every class must contain at least l distinct sensitive values.

    Distinctness counts non-missing values only. With l=2 and a binary
    sensitive attribute this is exactly "no zero cells" in the class-by-value
    tabulation.
    """
    if l < 1:
        raise MetricsError("l must be a positive integer")
    attr = dataset.attribute(sensitive)
    if attr.kind is not Kind.CATEGORICAL:
        raise MetricsError(
            f"l-diversity needs a categorical sensitive attribute; "
            f"{sensitive!r} is {attr.kind.value}"
        )
    column = dataset.column(sensitive)
    failing = []
    for sig, members in part.classes.items():
        distinct = {column[i] for i in members if column[i] is not MISSING}
        if len(distinct) < l:
            failing.append(sig)
    return DiversityReport(l=l, failing_classes=tuple(failing), passed=not failing)


TOTAL_VARIATION = "total-variation"
ORDERED_EMD = "ordered-earth-mover"
CHI_SQUARED = "chi-squared-test"
DISTANCE_KINDS = (TOTAL_VARIATION, ORDERED_EMD, CHI_SQUARED)


@dataclass(frozen=True)
class ClosenessReport:
    t: float
    distance_kind: str
    per_class_distance: Mapping[Signature, float]
    passed: bool
    significance: float = 0.05

    def to_json(self, quasi_set: Sequence[str]) -> dict[str, Any]:
        return {
            "t": self.t,
            "distance_kind": self.distance_kind,
            "significance": self.significance,
            "passed": self.passed,
            "per_class": [
                {
                    "signature": signature_to_json(quasi_set, sig),
                    "distance": round(d, 6),
                }
                for sig, d in self.per_class_distance.items()
            ],
        }


def check_t_closeness(
    part: EquivalencePartition,
    dataset: Dataset,
    sensitive: str,
    t: float,
    distance_kind: str = TOTAL_VARIATION,
    significance: float = 0.05,
) -> ClosenessReport:
    """Compare each class's sensitive distribution against the global one.

    total-variation: half L1 distance between category frequencies.
    ordered-earth-mover: normalized cumulative-difference distance over the
    ordered value domain (integer order, or enumerated-domain order for
    ordered categoricals).
    chi-squared-test: per class, a chi-squared test of the class against the
    combination of all other classes; distances hold p-values and the check
    passes when all p-values reach the significance level.
    """
    if t < 0:
        raise MetricsError("t must be non-negative")
    attr = dataset.attribute(sensitive)
    if distance_kind in (TOTAL_VARIATION, CHI_SQUARED):
        if attr.kind is not Kind.CATEGORICAL:
            raise MetricsError(
                f"{distance_kind} distance needs a categorical sensitive "
                f"attribute; {sensitive!r} is {attr.kind.value}"
            )
    elif distance_kind == ORDERED_EMD:
        ordered = attr.kind is Kind.INTEGER or (
            attr.kind is Kind.CATEGORICAL and isinstance(attr.domain, EnumeratedDomain)
        )
        if not ordered:
            raise MetricsError(
                "ordered-earth-mover distance needs an integer attribute or a "
                f"categorical attribute with an ordered domain; {sensitive!r} "
                "qualifies as neither"
            )
    else:
        raise MetricsError(f"unknown distance kind {distance_kind!r}")

    column = dataset.column(sensitive)
    observed = [v for v in column if v is not MISSING]
    global_counts = _count(observed)

    if distance_kind == ORDERED_EMD:
        if attr.kind is Kind.INTEGER:
            values = sorted(global_counts)
        else:
            declared = attr.domain.values  # type: ignore[union-attr]
            values = [v for v in declared if v in global_counts]
    else:
        values = sorted(global_counts, key=str)

    distances: dict[Signature, float] = {}
    for sig, members in part.classes.items():
        local = _count(column[i] for i in members if column[i] is not MISSING)
        if distance_kind == CHI_SQUARED:
            distances[sig] = _complement_chi_squared_pvalue(local, global_counts, values)
        elif distance_kind == TOTAL_VARIATION:
            distances[sig] = float(_total_variation(local, global_counts, values))
        else:
            distances[sig] = float(_ordered_emd(local, global_counts, values))

    if distance_kind == CHI_SQUARED:
        passed = all(p >= significance for p in distances.values())
    else:
        passed = all(d <= t + 1e-12 for d in distances.values())
    return ClosenessReport(
        t=t,
        distance_kind=distance_kind,
        per_class_distance=distances,
        passed=passed,
        significance=significance,
    )


def _count(values) -> dict[Any, int]:
    counts: dict[Any, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return counts


def _total_variation(local: Mapping, global_counts: Mapping, values) -> Fraction:
    local_total = sum(local.values())
    global_total = sum(global_counts.values())
    if local_total == 0 or global_total == 0:
        return Fraction(0)
    acc = Fraction(0)
    for v in values:
        p = Fraction(local.get(v, 0), local_total)
        q = Fraction(global_counts.get(v, 0), global_total)
        acc += abs(p - q)
    return acc / 2


def _ordered_emd(local: Mapping, global_counts: Mapping, values) -> Fraction:
    local_total = sum(local.values())
    global_total = sum(global_counts.values())
    if local_total == 0 or global_total == 0 or len(values) <= 1:
        return Fraction(0)
    acc = Fraction(0)
    cum = Fraction(0)
    for v in values[:-1]:
        p = Fraction(local.get(v, 0), local_total)
        q = Fraction(global_counts.get(v, 0), global_total)
        cum += p - q
        acc += abs(cum)
    return acc / (len(values) - 1)


def _complement_chi_squared_pvalue(local: Mapping, global_counts: Mapping, values) -> float:
    """p-value of a chi-squared test: this class vs all other classes."""
    from scipy.stats import chi2_contingency

    class_row = [local.get(v, 0) for v in values]
    rest_row = [global_counts.get(v, 0) - local.get(v, 0) for v in values]
    keep = [i for i, v in enumerate(values) if class_row[i] + rest_row[i] > 0]
    class_row = [class_row[i] for i in keep]
    rest_row = [rest_row[i] for i in keep]
    if len(class_row) < 2 or sum(class_row) == 0 or sum(rest_row) == 0:
        return 1.0
    result = chi2_contingency([class_row, rest_row], correction=False)
    p = float(result[1])
    return 1.0 if math.isnan(p) else p
