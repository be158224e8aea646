"""Anonymization sessions: plans, evaluation, what-if exploration, utility
proxies, and an append-only audit ledger.

The workflow this supports is iterative: assess the current dataset, try a
candidate transform without committing it, compare risk and utility, then
commit the step that carries its own audit trail. Everything is
deterministic given the plan's seeds, so a committed ledger can be replayed
on the original dataset to reproduce the release exactly.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Any, Mapping, Sequence

from .attack import PolicyThresholds, preset
from .metrics import (
    TOTAL_VARIATION,
    ClosenessReport,
    DiversityReport,
    KAnonymityCheck,
    RiskMetrics,
    StrictAverageCheck,
    check_k_anonymity,
    check_l_diversity,
    check_strict_average,
    check_t_closeness,
    partition,
    risk_metrics,
)
from .model import MISSING, Dataset, DeidentError
from .transforms import TransformStep, apply_step


class PipelineError(DeidentError):
    """Plan construction or execution failure."""


class PlanExecutionError(PipelineError):
    """A step failed mid-plan; carries the ledger up to the failure."""

    def __init__(self, step_index: int, message: str, ledger: "AuditLedger"):
        super().__init__(f"step {step_index} failed: {message}")
        self.step_index = step_index
        self.ledger = ledger


class ConflictError(DeidentError):
    """A commit raced another commit on the same session."""


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class RiskReport:
    """Risk metrics plus every configured check for one dataset state."""

    quasi_set: tuple[str, ...]
    policy: PolicyThresholds
    record_count: int
    class_count: int
    min_class_size: int
    metrics: RiskMetrics
    k_check: KAnonymityCheck
    strict_average: StrictAverageCheck
    l_diversity: DiversityReport | None = None
    t_closeness: ClosenessReport | None = None

    @property
    def passed(self) -> bool:
        """Policy verdict: the k check plus any configured diversity and
        closeness checks. The strict-average rule is reported alongside but
        reflects a different release standard, so it never gates this."""
        verdict = self.k_check.passed
        if self.l_diversity is not None:
            verdict = verdict and self.l_diversity.passed
        if self.t_closeness is not None:
            verdict = verdict and self.t_closeness.passed
        return verdict

    def to_json(self) -> dict[str, Any]:
        return {
            "quasi_set": list(self.quasi_set),
            "policy": self.policy.to_json(),
            "record_count": self.record_count,
            "class_count": self.class_count,
            "min_class_size": self.min_class_size,
            "metrics": self.metrics.to_json(),
            "checks": {
                "k": self.k_check.to_json(self.quasi_set),
                "strict_average": self.strict_average.to_json(),
                "l_diversity": (
                    self.l_diversity.to_json(self.quasi_set)
                    if self.l_diversity is not None
                    else None
                ),
                "t_closeness": (
                    self.t_closeness.to_json(self.quasi_set)
                    if self.t_closeness is not None
                    else None
                ),
            },
            "passed": self.passed,
        }


def evaluate(
    dataset: Dataset,
    quasi_set: Sequence[str],
    policy: PolicyThresholds,
    tau: int = 5,
    sensitive: str | None = None,
    l: int | None = None,
    t: float | None = None,
    distance_kind: str = TOTAL_VARIATION,
    significance: float = 0.05,
) -> RiskReport:
    """Assess one dataset state against a policy.

    The k threshold comes from the policy's minimum class size. Diversity
    and closeness checks run only when a sensitive attribute is named with
    the corresponding parameter.
    """
    part = partition(dataset, quasi_set)
    metrics = risk_metrics(part, tau=tau)
    l_report = None
    t_report = None
    if sensitive is not None and l is not None:
        l_report = check_l_diversity(part, dataset, sensitive, l)
    if sensitive is not None and t is not None:
        t_report = check_t_closeness(
            part, dataset, sensitive, t, distance_kind=distance_kind,
            significance=significance,
        )
    return RiskReport(
        quasi_set=part.quasi_set,
        policy=policy,
        record_count=part.total,
        class_count=part.n_classes,
        min_class_size=part.min_size,
        metrics=metrics,
        k_check=check_k_anonymity(part, policy.min_class_size),
        strict_average=check_strict_average(part),
        l_diversity=l_report,
        t_closeness=t_report,
    )


# ---------------------------------------------------------------------------
# utility proxies


@dataclass(frozen=True)
class UtilityProxies:
    """Three [0,1] proxies for what a release is still worth analytically.

    attribute_retention: share of declared quasi-identifier columns still
    present. granularity: how much within-column detail survives, measured
    per column as the distinct-value count relative to the original (1 is
    raw, 0 is generalized to a single value, removed columns count 0).
    record_retention: share of rows still present. All three are 1 for the
    identity plan and can only fall under removals, generalizations, and
    suppressions.
    """

    attribute_retention: float
    granularity: float
    record_retention: float

    def scalar(self) -> float:
        return (self.attribute_retention + self.granularity + self.record_retention) / 3

    def to_json(self) -> dict[str, Any]:
        return {
            "attribute_retention": self.attribute_retention,
            "granularity": self.granularity,
            "record_retention": self.record_retention,
            "scalar": self.scalar(),
        }


def _distinct_count(dataset: Dataset, attr: str) -> int:
    return len({v for v in dataset.column(attr) if v is not MISSING})


def utility_score(
    current: Dataset, original: Dataset, quasi_set: Sequence[str]
) -> UtilityProxies:
    """Proxies for the current state relative to the original dataset.

    Quasi-set names must exist in the original; columns since removed score
    zero granularity and drop attribute retention.
    """
    names = list(dict.fromkeys(quasi_set))
    if not names:
        raise PipelineError("utility needs a non-empty quasi set")
    for name in names:
        original.attribute(name)
    retained = [name for name in names if current.has_attribute(name)]
    per_column = []
    for name in names:
        if name not in retained:
            per_column.append(0.0)
            continue
        d_orig = _distinct_count(original, name)
        if d_orig <= 1:
            per_column.append(1.0)
            continue
        d_cur = _distinct_count(current, name)
        ratio = (d_cur - 1) / (d_orig - 1)
        per_column.append(min(1.0, max(0.0, ratio)))
    record_retention = (
        current.record_count / original.record_count if original.record_count else 1.0
    )
    return UtilityProxies(
        attribute_retention=len(retained) / len(names),
        granularity=sum(per_column) / len(per_column),
        record_retention=min(1.0, record_retention),
    )


# ---------------------------------------------------------------------------
# plans and the audit ledger


@dataclass(frozen=True)
class AnonymizationPlan:
    """Ordered steps plus the declaration they are judged against."""

    quasi_set: tuple[str, ...]
    policy: PolicyThresholds
    steps: tuple[TransformStep, ...] = ()
    tau: int = 5

    def __post_init__(self) -> None:
        if not self.quasi_set:
            raise PipelineError("plan must declare a non-empty quasi set")
        object.__setattr__(self, "quasi_set", tuple(self.quasi_set))
        object.__setattr__(self, "steps", tuple(self.steps))

    def to_json(self) -> dict[str, Any]:
        return {
            "quasi_set": list(self.quasi_set),
            "policy": self.policy.to_json(),
            "tau": self.tau,
            "steps": [s.to_json() for s in self.steps],
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "AnonymizationPlan":
        try:
            policy_doc = doc["policy"]
            policy = (
                preset(policy_doc)
                if isinstance(policy_doc, str)
                else PolicyThresholds.from_json(policy_doc)
            )
            return cls(
                quasi_set=tuple(doc["quasi_set"]),
                policy=policy,
                steps=tuple(TransformStep.from_json(s) for s in doc.get("steps", ())),
                tau=int(doc.get("tau", 5)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise PipelineError(f"malformed plan document: {exc}") from None


def plan_from_file(path: str) -> AnonymizationPlan:
    with open(path, encoding="utf-8") as fh:
        return AnonymizationPlan.from_json(json.load(fh))


def _present_quasi(dataset: Dataset, quasi_set: Sequence[str]) -> list[str]:
    return [name for name in quasi_set if dataset.has_attribute(name)]


def _maybe_report(
    dataset: Dataset, quasi_set: Sequence[str], policy: PolicyThresholds, tau: int
) -> RiskReport | None:
    present = _present_quasi(dataset, quasi_set)
    if not present or dataset.record_count == 0:
        return None
    return evaluate(dataset, present, policy, tau=tau)


@dataclass(frozen=True)
class LedgerEntry:
    """One applied step with the evidence around it."""

    index: int
    step: TransformStep
    description: str
    before: RiskReport | None
    after: RiskReport | None
    utility_before: UtilityProxies
    utility_after: UtilityProxies
    info: Mapping[str, Any]
    timestamp: str
    committed: bool = True

    def to_json(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "step": self.step.to_json(),
            "description": self.description,
            "before": self.before.to_json() if self.before else None,
            "after": self.after.to_json() if self.after else None,
            "utility_before": self.utility_before.to_json(),
            "utility_after": self.utility_after.to_json(),
            "info": dict(self.info),
            "timestamp": self.timestamp,
            "committed": self.committed,
        }


@dataclass(frozen=True)
class AuditLedger:
    entries: tuple[LedgerEntry, ...] = ()

    def append(self, entry: LedgerEntry) -> "AuditLedger":
        return AuditLedger(self.entries + (entry,))

    def to_json(self) -> list[dict[str, Any]]:
        return [entry.to_json() for entry in self.entries]

    def steps(self) -> tuple[TransformStep, ...]:
        return tuple(entry.step for entry in self.entries if entry.committed)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _execute_step(
    dataset: Dataset,
    step: TransformStep,
    index: int,
    original: Dataset,
    quasi_set: Sequence[str],
    policy: PolicyThresholds,
    tau: int,
    ledger: AuditLedger,
) -> tuple[Dataset, LedgerEntry]:
    before = _maybe_report(dataset, quasi_set, policy, tau)
    utility_before = utility_score(dataset, original, quasi_set)
    try:
        after_dataset, info = apply_step(dataset, step)
    except DeidentError as exc:
        raise PlanExecutionError(index, str(exc), ledger) from exc
    after = _maybe_report(after_dataset, quasi_set, policy, tau)
    utility_after = utility_score(after_dataset, original, quasi_set)
    entry = LedgerEntry(
        index=index,
        step=step,
        description=step.describe(),
        before=before,
        after=after,
        utility_before=utility_before,
        utility_after=utility_after,
        info=info,
        timestamp=_now(),
    )
    return after_dataset, entry


def apply_plan(
    dataset: Dataset, plan: AnonymizationPlan
) -> tuple[Dataset, AuditLedger]:
    """Run every step in order, recording one ledger entry per step.

    A failing step aborts with the error naming the step index (1-based)
    and carrying the ledger for the steps that did succeed.
    """
    for name in plan.quasi_set:
        dataset.attribute(name)
    current = dataset
    ledger = AuditLedger()
    for i, step in enumerate(plan.steps, start=1):
        current, entry = _execute_step(
            current, step, i, dataset, plan.quasi_set, plan.policy, plan.tau, ledger
        )
        ledger = ledger.append(entry)
    return current, ledger


# ---------------------------------------------------------------------------
# what-if exploration


@dataclass(frozen=True)
class WhatIfResult:
    """Before/after comparison for one uncommitted candidate step."""

    step: TransformStep
    before: RiskReport | None
    after: RiskReport | None
    utility_before: UtilityProxies
    utility_after: UtilityProxies
    info: Mapping[str, Any]

    @property
    def meets_policy(self) -> bool:
        return self.after.passed if self.after is not None else False

    def deltas(self) -> dict[str, float]:
        out: dict[str, float] = {
            "attribute_retention": self.utility_after.attribute_retention
            - self.utility_before.attribute_retention,
            "granularity": self.utility_after.granularity
            - self.utility_before.granularity,
            "record_retention": self.utility_after.record_retention
            - self.utility_before.record_retention,
        }
        if self.before is not None and self.after is not None:
            b, a = self.before.metrics, self.after.metrics
            out["small_class_fraction"] = float(
                a.small_class_fraction - b.small_class_fraction
            )
            out["inverse_average"] = float(a.inverse_average - b.inverse_average)
            out["inverse_min"] = float(a.inverse_min - b.inverse_min)
            out["min_class_size"] = float(a.min_size - b.min_size)
        return out

    def to_json(self) -> dict[str, Any]:
        return {
            "step": self.step.to_json(),
            "before": self.before.to_json() if self.before else None,
            "after": self.after.to_json() if self.after else None,
            "utility_before": self.utility_before.to_json(),
            "utility_after": self.utility_after.to_json(),
            "deltas": self.deltas(),
            "meets_policy": self.meets_policy,
            "info": dict(self.info),
        }


def what_if(
    dataset: Dataset,
    candidate: TransformStep,
    quasi_set: Sequence[str],
    policy: PolicyThresholds,
    tau: int = 5,
    original: Dataset | None = None,
) -> WhatIfResult:
    """Evaluate one candidate step without changing anything.

    The input dataset is immutable, so isolation is structural; the result
    compares the state before and after the candidate, with utility scored
    against the supplied original (defaulting to the input itself).
    """
    base = original if original is not None else dataset
    before = _maybe_report(dataset, quasi_set, policy, tau)
    utility_before = utility_score(dataset, base, quasi_set)
    after_dataset, info = apply_step(dataset, candidate)
    after = _maybe_report(after_dataset, quasi_set, policy, tau)
    utility_after = utility_score(after_dataset, base, quasi_set)
    return WhatIfResult(
        step=candidate,
        before=before,
        after=after,
        utility_before=utility_before,
        utility_after=utility_after,
        info=info,
    )


@dataclass(frozen=True)
class Suggestion:
    rank: int
    result: WhatIfResult

    def to_json(self) -> dict[str, Any]:
        return {"rank": self.rank, **self.result.to_json()}


def suggest_next(
    dataset: Dataset,
    candidates: Sequence[TransformStep],
    quasi_set: Sequence[str],
    policy: PolicyThresholds,
    tau: int = 5,
    original: Dataset | None = None,
) -> tuple[tuple[Suggestion, ...], tuple[dict[str, Any], ...]]:
    """Rank candidate steps by a greedy what-if sweep.

    Ordering: candidates that meet policy first, then higher combined
    utility, then lower worst-class risk; ties keep the caller's candidate
    order. Candidates that cannot be applied at all are excluded and
    reported with their errors.
    """
    if not candidates:
        raise PipelineError("suggest_next needs at least one candidate")
    evaluated: list[WhatIfResult] = []
    excluded: list[dict[str, Any]] = []
    for step in candidates:
        try:
            evaluated.append(
                what_if(dataset, step, quasi_set, policy, tau=tau, original=original)
            )
        except DeidentError as exc:
            excluded.append({"step": step.to_json(), "error": str(exc)})

    def sort_key(result: WhatIfResult):
        metric3 = (
            float(result.after.metrics.inverse_min)
            if result.after is not None
            else float("inf")
        )
        return (
            0 if result.meets_policy else 1,
            -result.utility_after.scalar(),
            metric3,
        )

    ranked = sorted(evaluated, key=sort_key)
    return (
        tuple(Suggestion(rank=i + 1, result=r) for i, r in enumerate(ranked)),
        tuple(excluded),
    )


# ---------------------------------------------------------------------------
# sessions


class Session:
    """One anonymization workspace: a committed dataset and its history.

    Commits are single-writer. The lock is taken without blocking, so a
    racing commit surfaces as a conflict for the caller to retry instead of
    quietly queueing behind an operation it has not seen the result of.
    What-if reads never take the lock and never see partial state, because
    datasets are immutable and the committed reference swaps atomically.
    """

    def __init__(
        self,
        session_id: str,
        dataset: Dataset,
        quasi_set: Sequence[str],
        policy: PolicyThresholds,
        tau: int = 5,
        label: str = "",
    ):
        for name in quasi_set:
            dataset.attribute(name)
        if not quasi_set:
            raise PipelineError("session needs a non-empty quasi set")
        self.id = session_id
        self.label = label
        self.original = dataset
        self.committed = dataset
        self.quasi_set = tuple(quasi_set)
        self.policy = policy
        self.tau = tau
        self.ledger = AuditLedger()
        self._commit_lock = threading.Lock()

    def _policy_with(self, k: int | None) -> PolicyThresholds:
        if k is None:
            return self.policy
        if k < 1:
            raise PipelineError("k must be a positive integer")
        return replace(self.policy, min_class_size=k)

    def current_quasi(self) -> list[str]:
        present = _present_quasi(self.committed, self.quasi_set)
        if not present:
            raise PipelineError(
                "every declared quasi-identifier has been removed; "
                "no partition to assess"
            )
        return present

    def report(self, tau: int | None = None, k: int | None = None) -> RiskReport:
        return evaluate(
            self.committed,
            self.current_quasi(),
            self._policy_with(k),
            tau=tau if tau is not None else self.tau,
        )

    def histogram(self) -> dict[int, int]:
        part = partition(self.committed, self.current_quasi())
        return part.size_histogram()

    def whatif(self, step: TransformStep) -> WhatIfResult:
        return what_if(
            self.committed,
            step,
            self.quasi_set,
            self.policy,
            tau=self.tau,
            original=self.original,
        )

    def utility(self) -> UtilityProxies:
        return utility_score(self.committed, self.original, self.quasi_set)

    def commit(self, step: TransformStep) -> LedgerEntry:
        if not self._commit_lock.acquire(blocking=False):
            raise ConflictError("another commit is in progress on this session")
        try:
            next_index = len(self.ledger.entries) + 1
            new_dataset, entry = _execute_step(
                self.committed,
                step,
                next_index,
                self.original,
                self.quasi_set,
                self.policy,
                self.tau,
                self.ledger,
            )
            self.ledger = self.ledger.append(entry)
            self.committed = new_dataset
            return entry
        finally:
            self._commit_lock.release()

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "label": self.label,
            "record_count": self.committed.record_count,
            "quasi_set": list(self.quasi_set),
            "policy": self.policy.to_json(),
            "tau": self.tau,
            "steps_committed": len(self.ledger.entries),
        }


class SessionRegistry:
    """In-memory session store; nothing is ever written to disk."""

    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(
        self,
        dataset: Dataset,
        quasi_set: Sequence[str],
        policy: PolicyThresholds,
        tau: int = 5,
        label: str = "",
    ) -> Session:
        session_id = uuid.uuid4().hex[:12]
        session = Session(session_id, dataset, quasi_set, policy, tau=tau, label=label)
        with self._lock:
            while session.id in self._sessions:
                session.id = uuid.uuid4().hex[:12]
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise PipelineError(f"no session with id {session_id!r}") from None

    def has(self, session_id: str) -> bool:
        return session_id in self._sessions

    def list(self) -> list[Session]:
        return list(self._sessions.values())
