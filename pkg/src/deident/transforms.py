"""De-identification transforms: attribute removal, generalization (by
hierarchy level or numeric banding), record suppression, pseudonymization,
and date offsetting / relative-day conversion.

All transforms are pure functions from an immutable dataset (plus
parameters and an optional seed) to a new dataset, so a serialized step is
replayable bit-for-bit.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Any, Iterable, Mapping, Sequence

from .model import (
    MISSING,
    AttributeSchema,
    Dataset,
    DeidentError,
    EnumeratedDomain,
    GeneralizationHierarchy,
    Kind,
    Role,
    parse_date,
)


class TransformError(DeidentError):
    """Invalid transform parameters or target."""


# ---------------------------------------------------------------------------
# numeric banding


def default_band_labels(cuts: Sequence[int]) -> tuple[str, ...]:
    """Render bands from ordered cut points: "lo-hi" plus ">=lo" on top.

    Cut points are band lower bounds; the last band is open-ended.
    """
    labels = []
    for lo, nxt in zip(cuts, cuts[1:]):
        labels.append(f"{lo}-{nxt - 1}")
    labels.append(f">={cuts[-1]}")
    return tuple(labels)


def band_for(value: int, cuts: Sequence[int], labels: Sequence[str]) -> str:
    if value < cuts[0]:
        raise TransformError(f"value {value} below the first band cut {cuts[0]}")
    for i, nxt in enumerate(cuts[1:]):
        if value < nxt:
            return labels[i]
    return labels[-1]


def _check_band_spec(cuts: Sequence[int], labels: Sequence[str] | None) -> tuple[str, ...]:
    if not cuts:
        raise TransformError("band spec needs at least one cut point")
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise TransformError(f"cut points must be strictly increasing: {list(cuts)}")
    if labels is None:
        return default_band_labels(cuts)
    if len(labels) != len(cuts):
        raise TransformError(
            f"{len(cuts)} bands but {len(labels)} labels supplied"
        )
    return tuple(labels)


def band_hierarchy(
    low: int,
    high: int,
    cuts: Sequence[int],
    labels: Sequence[str] | None = None,
    name: str = "",
) -> GeneralizationHierarchy:
    """One-step hierarchy sending each integer in [low, high] to its band."""
    labels = _check_band_spec(cuts, labels)
    mapping = {str(v): band_for(v, cuts, labels) for v in range(low, high + 1)}
    return GeneralizationHierarchy(
        name=name or f"bands-{cuts[0]}", base=tuple(mapping), mappings=(mapping,),
        level_names=("bands",),
    )


# ---------------------------------------------------------------------------
# suppression predicates

_OPS = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Clause:
    attr: str
    op: str
    value: Any

    def __post_init__(self) -> None:
        if self.op not in _OPS:
            raise TransformError(f"unknown comparison operator {self.op!r}")


@dataclass(frozen=True)
class Predicate:
    """Conjunction of attribute/operator/literal clauses.

    Comparisons against a missing cell are false, so rows with missing
    values are never suppressed by accident.
    """

    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        if not self.clauses:
            raise TransformError("predicate needs at least one clause")

    def matches(self, dataset: Dataset, row: tuple) -> bool:
        for clause in self.clauses:
            idx = dataset.attribute_index(clause.attr)
            cell = row[idx]
            if cell is MISSING:
                return False
            literal = _coerce_literal(clause.value, dataset.schema[idx])
            if not _OPS[clause.op](cell, literal):
                return False
        return True

    def to_json(self) -> list[dict[str, Any]]:
        return [
            {"attr": c.attr, "op": c.op, "value": _literal_json(c.value)}
            for c in self.clauses
        ]

    @classmethod
    def from_json(cls, doc: Sequence[Mapping[str, Any]]) -> "Predicate":
        try:
            return cls(tuple(Clause(str(d["attr"]), str(d["op"]), d["value"]) for d in doc))
        except (KeyError, TypeError) as exc:
            raise TransformError(f"malformed predicate document: {exc}") from None


def _literal_json(value: Any) -> Any:
    if isinstance(value, date):
        return value.isoformat()
    return value


def _coerce_literal(value: Any, attr: AttributeSchema) -> Any:
    try:
        if attr.kind is Kind.INTEGER and not isinstance(value, int):
            return int(str(value))
        if attr.kind is Kind.DATE and not isinstance(value, date):
            return parse_date(str(value))
    except ValueError:
        raise TransformError(
            f"literal {value!r} not comparable with {attr.kind.value} "
            f"attribute {attr.name!r}"
        ) from None
    return value


_CLAUSE_RE = re.compile(r"^\s*(.+?)\s*(!=|<=|>=|=|<|>)\s*(.+?)\s*$")


def parse_predicate(text: str) -> Predicate:
    """Parse "Age > 54" or "Age > 54 and Gender = M" into a Predicate."""
    clauses = []
    for part in re.split(r"\s+and\s+", text.strip(), flags=re.IGNORECASE):
        m = _CLAUSE_RE.match(part)
        if not m:
            raise TransformError(f"malformed predicate clause {part!r}")
        clauses.append(Clause(m.group(1), m.group(2), m.group(3)))
    return Predicate(tuple(clauses))


# ---------------------------------------------------------------------------
# pseudonym assignment and per-subject date offsets (shared with narratives)


class PseudonymAssigner:
    """Seed-deterministic bijection from original tokens to fresh tokens.

    Pseudonyms are fixed-width zero-padded numeric strings drawn from a
    namespace disjoint from every registered original token. The assigner
    memoizes assignments (equal originals map to equal pseudonyms) and the
    original-to-pseudonym mapping is never serialized anywhere.
    """

    def __init__(self, seed: int, width: int = 6, forbidden: Iterable[str] = ()):
        self._rng = random.Random(f"pseudonym:{seed}")
        self._width = width
        self._forbidden = {str(t) for t in forbidden}
        self._assigned: dict[str, str] = {}
        self._used: set[str] = set()

    def register_forbidden(self, tokens: Iterable[str]) -> None:
        for token in tokens:
            token = str(token)
            if token in self._used:
                raise TransformError(
                    "an input token collides with an already issued pseudonym; "
                    "register all originals before assigning"
                )
            self._forbidden.add(token)

    def assign(self, token: str) -> str:
        token = str(token)
        existing = self._assigned.get(token)
        if existing is not None:
            return existing
        space = 10 ** self._width
        for _ in range(100 * self._width * 1000):
            candidate = f"{self._rng.randrange(space):0{self._width}d}"
            if candidate not in self._used and candidate not in self._forbidden:
                self._assigned[token] = candidate
                self._used.add(candidate)
                return candidate
        raise TransformError("pseudonym namespace exhausted; increase width")


class SubjectOffsetMap:
    """One seeded day offset per subject, drawn uniformly from [low, high].

    Zero is excluded (an unshifted date would keep a real calendar date),
    and the draw depends only on (seed, subject key), so the same subject
    gets the same offset in every artifact sharing this map.
    """

    def __init__(self, seed: int, low: int = -365, high: int = 365):
        if low > high:
            raise TransformError("offset range is empty")
        if low == high == 0:
            raise TransformError("offset range only contains zero")
        self._seed = seed
        self._low = low
        self._high = high
        self._cache: dict[str, int] = {}

    def offset_for(self, subject: str) -> int:
        subject = str(subject)
        cached = self._cache.get(subject)
        if cached is not None:
            return cached
        rng = random.Random(f"date-offset:{self._seed}:{subject}")
        days = rng.randint(self._low, self._high)
        while days == 0:
            days = rng.randint(self._low, self._high)
        self._cache[subject] = days
        return days


@dataclass(frozen=True)
class FixedDateOffset:
    """Study-wide constant shift in days."""

    days: int

    def offset_for(self, subject: str) -> int:
        return self.days


# ---------------------------------------------------------------------------
# the transforms themselves


def remove_attribute(dataset: Dataset, attr: str) -> Dataset:
    """Drop one attribute; every other column is untouched."""
    idx = dataset.attribute_index(attr)
    schema = tuple(a for i, a in enumerate(dataset.schema) if i != idx)
    rows = tuple(row[:idx] + row[idx + 1 :] for row in dataset.rows)
    return Dataset(schema, rows, provenance=dataset.provenance)


def generalize(
    dataset: Dataset,
    attr: str,
    level: int | None = None,
    cuts: Sequence[int] | None = None,
    labels: Sequence[str] | None = None,
) -> Dataset:
    """Coarsen one attribute, by hierarchy level or by numeric banding.

    The hierarchy form requires an attached hierarchy and 1 <= level <=
    height; the band form requires an integer attribute and strictly
    increasing cut points. Band tokens render as "lo-hi" with ">=lo" for the
    open top band unless explicit labels are given.
    """
    if (level is None) == (cuts is None):
        raise TransformError("generalize takes exactly one of level= or cuts=")
    if cuts is not None:
        return band_numeric(dataset, attr, cuts, labels)
    idx = dataset.attribute_index(attr)
    schema_attr = dataset.schema[idx]
    hierarchy = schema_attr.hierarchy
    if hierarchy is None:
        raise TransformError(f"attribute {attr!r} has no generalization hierarchy")
    if not isinstance(level, int) or level < 1:
        raise TransformError("hierarchy level must be a positive integer")
    if level > hierarchy.height:
        raise TransformError(
            f"level {level} exceeds hierarchy height {hierarchy.height}"
        )
    mapped: dict[str, str] = {
        token: hierarchy.map_token(token, level) for token in hierarchy.base
    }

    def rewrite(value):
        if value is MISSING:
            return MISSING
        token = str(value)
        if token not in mapped:
            raise TransformError(
                f"value {token!r} outside the domain of hierarchy "
                f"{hierarchy.name!r} on attribute {attr!r}"
            )
        return mapped[token]

    rows = tuple(
        row[:idx] + (rewrite(row[idx]),) + row[idx + 1 :] for row in dataset.rows
    )
    new_attr = AttributeSchema(
        name=schema_attr.name,
        role=schema_attr.role,
        kind=Kind.CATEGORICAL,
        hierarchy=hierarchy.rebase(level),
        domain=EnumeratedDomain(hierarchy.tokens_at(level)),
    )
    schema = dataset.schema[:idx] + (new_attr,) + dataset.schema[idx + 1 :]
    return Dataset(schema, rows, provenance=dataset.provenance)


def band_numeric(
    dataset: Dataset,
    attr: str,
    cuts: Sequence[int],
    labels: Sequence[str] | None = None,
) -> Dataset:
    """Replace integer values by their band token."""
    idx = dataset.attribute_index(attr)
    schema_attr = dataset.schema[idx]
    if schema_attr.kind is not Kind.INTEGER:
        raise TransformError(
            f"banding needs an integer attribute; {attr!r} is {schema_attr.kind.value}"
        )
    cuts = [int(c) for c in cuts]
    band_labels = _check_band_spec(cuts, labels)

    def rewrite(value):
        if value is MISSING:
            return MISSING
        return band_for(value, cuts, band_labels)

    rows = tuple(
        row[:idx] + (rewrite(row[idx]),) + row[idx + 1 :] for row in dataset.rows
    )
    new_attr = AttributeSchema(
        name=schema_attr.name,
        role=schema_attr.role,
        kind=Kind.CATEGORICAL,
        hierarchy=None,
        domain=EnumeratedDomain(band_labels),
    )
    schema = dataset.schema[:idx] + (new_attr,) + dataset.schema[idx + 1 :]
    return Dataset(schema, rows, provenance=dataset.provenance)


def suppress_records(dataset: Dataset, predicate: Predicate) -> tuple[Dataset, int]:
    """Remove rows matching the predicate; reports how many were removed."""
    kept = tuple(row for row in dataset.rows if not predicate.matches(dataset, row))
    removed = dataset.record_count - len(kept)
    return Dataset(dataset.schema, kept, provenance=dataset.provenance), removed


def pseudonymize(dataset: Dataset, attr: str, seed: int) -> Dataset:
    """Replace a direct identifier with seed-deterministic fresh tokens.

    Equal originals map to equal pseudonyms; distinct originals stay
    distinct; originals never appear in the output and the mapping is not
    retained, so the recoding is irreversible.
    """
    idx = dataset.attribute_index(attr)
    schema_attr = dataset.schema[idx]
    if schema_attr.role is not Role.DIRECT:
        raise TransformError(
            f"refusing to pseudonymize {attr!r}: its role is "
            f"{schema_attr.role.value}, not direct-identifier"
        )
    originals = sorted(
        {str(row[idx]) for row in dataset.rows if row[idx] is not MISSING}
    )
    width = max(6, len(str(10 * max(1, len(originals)))))
    assigner = PseudonymAssigner(seed, width=width, forbidden=originals)
    mapping = {token: assigner.assign(token) for token in originals}

    def rewrite(value):
        if value is MISSING:
            return MISSING
        return mapping[str(value)]

    rows = tuple(
        row[:idx] + (rewrite(row[idx]),) + row[idx + 1 :] for row in dataset.rows
    )
    new_attr = AttributeSchema(
        name=schema_attr.name,
        role=Role.DIRECT,
        kind=Kind.TEXT,
        hierarchy=None,
        domain=None,
    )
    schema = dataset.schema[:idx] + (new_attr,) + dataset.schema[idx + 1 :]
    return Dataset(schema, rows, provenance=dataset.provenance)


def offset_dates(
    dataset: Dataset,
    date_attrs: Sequence[str],
    offset_source: "FixedDateOffset | SubjectOffsetMap",
    subject_attr: str | None = None,
) -> Dataset:
    """Shift every listed date by the row's subject offset.

    A subject is identified by ``subject_attr`` (falling back to the row
    index, which treats each row as its own subject). All dates of one
    subject move by the same number of days, so within-subject intervals
    and event ordering are preserved exactly.
    """
    if not date_attrs:
        raise TransformError("offset_dates needs at least one date attribute")
    indices = []
    for name in date_attrs:
        idx = dataset.attribute_index(name)
        if dataset.schema[idx].kind is not Kind.DATE:
            raise TransformError(
                f"offset_dates target {name!r} is "
                f"{dataset.schema[idx].kind.value}, not date"
            )
        indices.append(idx)
    subject_idx = (
        dataset.attribute_index(subject_attr) if subject_attr is not None else None
    )
    rows = []
    for r, row in enumerate(dataset.rows):
        key = str(row[subject_idx]) if subject_idx is not None else str(r)
        days = offset_source.offset_for(key)
        new_row = list(row)
        for idx in indices:
            if new_row[idx] is not MISSING:
                new_row[idx] = new_row[idx] + timedelta(days=days)
        rows.append(tuple(new_row))
    return Dataset(dataset.schema, rows, provenance=dataset.provenance)


def relative_days(
    dataset: Dataset,
    date_attrs: Sequence[str],
    anchor_attr: str,
) -> Dataset:
    """Replace dates by signed day counts from the row's anchor date.

    The anchor column itself becomes the constant 0. The anchor must be
    present (non-missing) in every row.
    """
    anchor_idx = dataset.attribute_index(anchor_attr)
    if dataset.schema[anchor_idx].kind is not Kind.DATE:
        raise TransformError(f"anchor {anchor_attr!r} is not a date attribute")
    indices = []
    for name in date_attrs:
        idx = dataset.attribute_index(name)
        if dataset.schema[idx].kind is not Kind.DATE:
            raise TransformError(
                f"relative_days target {name!r} is "
                f"{dataset.schema[idx].kind.value}, not date"
            )
        indices.append(idx)
    if anchor_idx not in indices:
        indices.append(anchor_idx)
    rows = []
    for r, row in enumerate(dataset.rows):
        anchor = row[anchor_idx]
        if anchor is MISSING:
            raise TransformError(
                f"row {r + 1} has no value for anchor attribute {anchor_attr!r}"
            )
        new_row = list(row)
        for idx in indices:
            if new_row[idx] is not MISSING:
                new_row[idx] = (new_row[idx] - anchor).days
        rows.append(tuple(new_row))
    schema = tuple(
        AttributeSchema(a.name, a.role, Kind.INTEGER, None, None)
        if i in indices
        else a
        for i, a in enumerate(dataset.schema)
    )
    return Dataset(schema, rows, provenance=dataset.provenance)


# ---------------------------------------------------------------------------
# declarative steps

REMOVE_ATTRIBUTE = "remove-attribute"
GENERALIZE = "generalize"
BAND_NUMERIC = "band-numeric"
SUPPRESS_RECORDS = "suppress-records"
PSEUDONYMIZE = "pseudonymize"
OFFSET_DATES = "offset-dates"
RELATIVE_DAYS = "relative-days"

STEP_KINDS = (
    REMOVE_ATTRIBUTE,
    GENERALIZE,
    BAND_NUMERIC,
    SUPPRESS_RECORDS,
    PSEUDONYMIZE,
    OFFSET_DATES,
    RELATIVE_DAYS,
)


@dataclass(frozen=True)
class TransformStep:
    """A serializable, replayable de-identification action."""

    kind: str
    target: tuple[str, ...] = ()
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in STEP_KINDS:
            raise TransformError(f"unknown transform kind {self.kind!r}")
        object.__setattr__(self, "target", tuple(self.target))
        object.__setattr__(self, "params", dict(self.params))

    def describe(self) -> str:
        bits = [self.kind]
        if self.target:
            bits.append(",".join(self.target))
        if self.params:
            bits.append(
                " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
            )
        return " ".join(bits)

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "target": list(self.target),
            "params": dict(self.params),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "TransformStep":
        if not isinstance(doc, Mapping) or "kind" not in doc:
            raise TransformError(f"malformed transform step document: {doc!r}")
        return cls(
            kind=str(doc["kind"]),
            target=tuple(doc.get("target") or ()),
            params=dict(doc.get("params") or {}),
            seed=doc.get("seed"),
        )


def apply_step(dataset: Dataset, step: TransformStep) -> tuple[Dataset, dict[str, Any]]:
    """Apply one declarative step; returns the new dataset plus step info."""
    params = step.params
    if step.kind == REMOVE_ATTRIBUTE:
        (attr,) = _expect_targets(step, 1)
        return remove_attribute(dataset, attr), {}
    if step.kind == GENERALIZE:
        (attr,) = _expect_targets(step, 1)
        if "level" not in params:
            raise TransformError("generalize step needs params.level")
        return generalize(dataset, attr, level=int(params["level"])), {}
    if step.kind == BAND_NUMERIC:
        (attr,) = _expect_targets(step, 1)
        if "cuts" not in params:
            raise TransformError("band-numeric step needs params.cuts")
        return (
            band_numeric(dataset, attr, params["cuts"], params.get("labels")),
            {},
        )
    if step.kind == SUPPRESS_RECORDS:
        where = params.get("where")
        if not where:
            raise TransformError("suppress-records step needs params.where")
        out, removed = suppress_records(dataset, Predicate.from_json(where))
        return out, {"removed": removed}
    if step.kind == PSEUDONYMIZE:
        (attr,) = _expect_targets(step, 1)
        if step.seed is None:
            raise TransformError("pseudonymize step needs a seed")
        return pseudonymize(dataset, attr, step.seed), {}
    if step.kind == OFFSET_DATES:
        if not step.target:
            raise TransformError("offset-dates step needs target date attributes")
        mode = params.get("mode", "per-subject")
        if mode == "fixed":
            if "days" not in params:
                raise TransformError("fixed offset-dates step needs params.days")
            source: FixedDateOffset | SubjectOffsetMap = FixedDateOffset(
                int(params["days"])
            )
        elif mode == "per-subject":
            if step.seed is None:
                raise TransformError("per-subject offset-dates step needs a seed")
            source = SubjectOffsetMap(
                step.seed,
                low=int(params.get("low", -365)),
                high=int(params.get("high", 365)),
            )
        else:
            raise TransformError(f"unknown offset-dates mode {mode!r}")
        return (
            offset_dates(
                dataset, step.target, source, subject_attr=params.get("subject")
            ),
            {},
        )
    if step.kind == RELATIVE_DAYS:
        if "anchor" not in params:
            raise TransformError("relative-days step needs params.anchor")
        return (
            relative_days(dataset, step.target, str(params["anchor"])),
            {},
        )
    raise TransformError(f"unknown transform kind {step.kind!r}")


def _expect_targets(step: TransformStep, count: int) -> tuple[str, ...]:
    if len(step.target) != count:
        raise TransformError(
            f"{step.kind} step needs exactly {count} target attribute(s), "
            f"got {list(step.target)}"
        )
    return step.target
