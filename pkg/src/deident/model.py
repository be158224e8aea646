"""Dataset model: typed attributes with identifier roles, immutable record
tables, and generalization hierarchies.

Everything downstream (risk metrics, transforms, pipelines) works on the
types defined here. Datasets are immutable after construction: every
transform returns a new ``Dataset`` and never touches the rows of an
existing one, so instances are safe to share across threads.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import IO, Any, Iterable, Mapping, Sequence


class DeidentError(Exception):
    """Base class for all errors raised by this toolkit."""


class SchemaError(DeidentError):
    """Schema construction or schema/source mismatch problem."""


class CellParseError(DeidentError):
    """A cell could not be parsed for its declared kind."""

    def __init__(self, row: int, column: str, token: str, kind: "Kind"):
        self.row = row
        self.column = column
        self.token = token
        super().__init__(
            f"row {row}, column {column!r}: cannot parse {token!r} as {kind.value}"
        )


class HierarchyError(DeidentError):
    """Invalid generalization hierarchy."""


class Role(str, Enum):
    DIRECT = "direct-identifier"
    QUASI = "quasi-identifier"
    SENSITIVE = "sensitive"
    NEUTRAL = "neutral"


class Kind(str, Enum):
    CATEGORICAL = "categorical"
    INTEGER = "integer"
    DATE = "date"
    TEXT = "text"


class _MissingType:
    """Singleton marker for an explicitly missing value.

    Distinct from every category token and from the empty string; a missing
    quasi-identifier value partitions as its own category.
    """

    _instance: "_MissingType | None" = None

    def __new__(cls) -> "_MissingType":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"

    def __bool__(self) -> bool:
        return False

    def __deepcopy__(self, memo: dict) -> "_MissingType":
        return self

    def __copy__(self) -> "_MissingType":
        return self


MISSING = _MissingType()

#: A cell value: category token, integer, day-precision calendar date,
#: free text, or the MISSING marker.
Value = "str | int | date | _MissingType"

_MONTH_ABBREV = (
    "Jan", "Feb", "Mar", "Apr", "May", "Jun",
    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
)
_MONTH_INDEX = {m.lower(): i + 1 for i, m in enumerate(_MONTH_ABBREV)}


def parse_date(token: str) -> date:
    """Parse ISO-8601 (2006-10-16) or dd/Mon/yyyy (16/Oct/2006) dates."""
    token = token.strip()
    parts = token.split("/")
    if len(parts) == 3 and parts[1].lower() in _MONTH_INDEX:
        day, mon, year = parts
        return date(int(year), _MONTH_INDEX[mon.lower()], int(day))
    return date.fromisoformat(token)


def format_date(value: date, style: str = "iso") -> str:
    """Render a date either as ISO-8601 or in dd/Mon/yyyy style."""
    if style == "dd/Mon/yyyy":
        return f"{value.day:02d}/{_MONTH_ABBREV[value.month - 1]}/{value.year}"
    return value.isoformat()


def looks_like_dmy(token: str) -> bool:
    parts = token.strip().split("/")
    return len(parts) == 3 and parts[1].lower() in _MONTH_INDEX


@dataclass(frozen=True)
class EnumeratedDomain:
    """Ordered enumeration of permitted category tokens."""

    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.values)) != len(self.values):
            raise SchemaError("enumerated domain contains duplicate tokens")


@dataclass(frozen=True)
class RangeDomain:
    """Inclusive integer or date range."""

    low: int | date
    high: int | date

    def __post_init__(self) -> None:
        if type(self.low) is not type(self.high):
            raise SchemaError("range endpoints must have the same type")
        if self.low > self.high:  # type: ignore[operator]
            raise SchemaError("range low endpoint exceeds high endpoint")


Domain = "EnumeratedDomain | RangeDomain"


@dataclass(frozen=True)
class GeneralizationHierarchy:
    """Ordered generalization levels over a categorical or integer domain.

    Level 0 is the raw domain; each mapping sends level k-1 tokens to
    coarser level k tokens and is total over the previous level.
    """

    name: str
    base: tuple[str, ...]
    mappings: tuple[Mapping[str, str], ...] = ()
    level_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.base:
            raise HierarchyError("hierarchy has an empty base domain")
        if len(set(self.base)) != len(self.base):
            raise HierarchyError("hierarchy base contains duplicate tokens")
        if self.level_names and len(self.level_names) != len(self.mappings):
            raise HierarchyError("one level name required per mapping")
        tokens = self.base
        for depth, mapping in enumerate(self.mappings, start=1):
            for token in tokens:
                if token not in mapping:
                    raise HierarchyError(
                        f"level {depth} of hierarchy {self.name!r} does not map "
                        f"token {token!r}"
                    )
            tokens = _stable_image(tokens, mapping)

    @property
    def height(self) -> int:
        """Number of generalization steps above the raw level."""
        return len(self.mappings)

    @property
    def level_count(self) -> int:
        return len(self.mappings) + 1

    def tokens_at(self, level: int) -> tuple[str, ...]:
        """Distinct tokens of the given level, in stable base-derived order."""
        if not 0 <= level <= self.height:
            raise HierarchyError(f"level {level} outside 0..{self.height}")
        tokens = self.base
        for mapping in self.mappings[:level]:
            tokens = _stable_image(tokens, mapping)
        return tokens

    def map_token(self, token: str, level: int) -> str:
        """Compose level mappings to carry a raw token up to ``level``."""
        if not 0 <= level <= self.height:
            raise HierarchyError(f"level {level} outside 0..{self.height}")
        if token not in self.base:
            raise HierarchyError(
                f"value {token!r} outside the domain of hierarchy {self.name!r}"
            )
        for mapping in self.mappings[:level]:
            token = mapping[token]
        return token

    def rebase(self, level: int) -> "GeneralizationHierarchy | None":
        """Hierarchy rooted at ``level``; None once the top is reached."""
        if level >= self.height:
            return None
        return GeneralizationHierarchy(
            name=self.name,
            base=self.tokens_at(level),
            mappings=self.mappings[level:],
            level_names=self.level_names[level:] if self.level_names else (),
        )


def _stable_image(tokens: Sequence[str], mapping: Mapping[str, str]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for token in tokens:
        seen.setdefault(mapping[token], None)
    return tuple(seen)


def build_hierarchy(
    levels: Sequence[tuple[str, Mapping[str, str]]] | Mapping[str, Mapping[str, str]],
    *,
    name: str = "",
    domain: Iterable[str] | None = None,
    complete: bool = False,
) -> GeneralizationHierarchy:
    """Build a hierarchy from ordered level mappings.

    ``levels`` is an ordered sequence of (level name, token mapping) pairs,
    or an insertion-ordered mapping of the same. The base domain defaults to
    the keys of the first level. ``complete=True`` additionally requires the
    top level to collapse everything to a single token.
    """
    if isinstance(levels, Mapping):
        pairs = list(levels.items())
    else:
        pairs = list(levels)
    if domain is not None:
        base = tuple(str(t) for t in domain)
    elif pairs:
        base = tuple(pairs[0][1].keys())
    else:
        raise HierarchyError("a hierarchy needs level mappings or an explicit domain")
    hierarchy = GeneralizationHierarchy(
        name=name,
        base=base,
        mappings=tuple(dict(m) for _, m in pairs),
        level_names=tuple(n for n, _ in pairs),
    )
    if complete:
        top = hierarchy.tokens_at(hierarchy.height)
        if len(top) != 1:
            raise HierarchyError(
                f"hierarchy {name!r} declared complete but its top level has "
                f"{len(top)} tokens: {list(top)!r}"
            )
    return hierarchy


def hierarchy_from_json(
    doc: Mapping[str, Any] | str | bytes,
) -> GeneralizationHierarchy:
    """Load a hierarchy from its JSON document form.

    Expected shape::

        {"name": "country-region",
         "domain": ["Argentina", ...],          # optional
         "complete": false,                      # optional
         "levels": {"continent": {"Argentina": "South America", ...}}}
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    if not isinstance(doc, Mapping):
        raise HierarchyError("hierarchy document must be a JSON object")
    levels = doc.get("levels") or {}
    if not isinstance(levels, Mapping):
        raise HierarchyError("hierarchy 'levels' must map level names to token mappings")
    return build_hierarchy(
        [(str(k), v) for k, v in levels.items()],
        name=str(doc.get("name", "")),
        domain=doc.get("domain"),
        complete=bool(doc.get("complete", False)),
    )


def hierarchy_to_json(hierarchy: GeneralizationHierarchy) -> dict[str, Any]:
    names = hierarchy.level_names or tuple(
        f"level-{i}" for i in range(1, hierarchy.height + 1)
    )
    return {
        "name": hierarchy.name,
        "domain": list(hierarchy.base),
        "levels": {n: dict(m) for n, m in zip(names, hierarchy.mappings)},
    }


@dataclass(frozen=True)
class AttributeSchema:
    """One typed column with its identifier role.

    A hierarchy may only be attached to categorical or integer attributes;
    every attribute has exactly one role.
    """

    name: str
    role: Role
    kind: Kind
    hierarchy: GeneralizationHierarchy | None = None
    domain: EnumeratedDomain | RangeDomain | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("attribute name must be non-empty")
        if self.hierarchy is not None and self.kind not in (
            Kind.CATEGORICAL,
            Kind.INTEGER,
        ):
            raise SchemaError(
                f"attribute {self.name!r}: a hierarchy may only be attached to "
                f"categorical or integer attributes, not {self.kind.value}"
            )


def parse_cell(token: str, kind: Kind, row: int, column: str):
    """Parse one CSV cell; empty cells are MISSING, bad cells are errors."""
    if token == "":
        return MISSING
    if kind is Kind.INTEGER:
        try:
            return int(token)
        except ValueError:
            raise CellParseError(row, column, token, kind) from None
    if kind is Kind.DATE:
        try:
            return parse_date(token)
        except ValueError:
            raise CellParseError(row, column, token, kind) from None
    return token


def render_cell(value) -> str:
    """Inverse of ``parse_cell``: render a value back to delimited text."""
    if value is MISSING:
        return ""
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


class Dataset:
    """Immutable record table governed by an ordered attribute schema.

    Rows are stored as tuples in schema order; every row carries a value
    (possibly MISSING) for every attribute. Transforms never mutate a
    dataset, they construct a new one.
    """

    __slots__ = ("_schema", "_rows", "_provenance", "_by_name")

    def __init__(
        self,
        schema: Sequence[AttributeSchema],
        rows: Iterable[Sequence[Any] | Mapping[str, Any]],
        provenance: str = "",
    ):
        schema = tuple(schema)
        names = [a.name for a in schema]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise SchemaError(f"duplicate attribute names: {sorted(dupes)}")
        by_name = {a.name: i for i, a in enumerate(schema)}
        packed: list[tuple] = []
        for r, row in enumerate(rows, start=1):
            if isinstance(row, Mapping):
                extra = set(row) - set(names)
                if extra:
                    raise SchemaError(f"row {r} has unknown attributes {sorted(extra)}")
                try:
                    packed.append(tuple(row[n] for n in names))
                except KeyError as exc:
                    raise SchemaError(f"row {r} lacks a value for {exc.args[0]!r}") from None
            else:
                row = tuple(row)
                if len(row) != len(schema):
                    raise SchemaError(
                        f"row {r} has {len(row)} values for {len(schema)} attributes"
                    )
                packed.append(row)
        object.__setattr__(self, "_schema", schema)
        object.__setattr__(self, "_rows", tuple(packed))
        object.__setattr__(self, "_provenance", provenance)
        object.__setattr__(self, "_by_name", by_name)

    def __setattr__(self, name: str, value) -> None:
        raise AttributeError("Dataset is immutable")

    @property
    def schema(self) -> tuple[AttributeSchema, ...]:
        return self._schema

    @property
    def rows(self) -> tuple[tuple, ...]:
        return self._rows

    @property
    def provenance(self) -> str:
        return self._provenance

    @property
    def record_count(self) -> int:
        return len(self._rows)

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self._schema)

    def attribute(self, name: str) -> AttributeSchema:
        try:
            return self._schema[self._by_name[name]]
        except KeyError:
            raise SchemaError(f"unknown attribute {name!r}") from None

    def attribute_index(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"unknown attribute {name!r}") from None

    def has_attribute(self, name: str) -> bool:
        return name in self._by_name

    def column(self, name: str) -> tuple:
        i = self.attribute_index(name)
        return tuple(row[i] for row in self._rows)

    def row_mapping(self, index: int) -> dict[str, Any]:
        return dict(zip(self.attribute_names, self._rows[index]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self._schema == other._schema
            and self._rows == other._rows
            and self._provenance == other._provenance
        )

    def __hash__(self) -> int:  # identity hash; rows may hold unhashable eqs
        return object.__hash__(self)

    def __repr__(self) -> str:
        return (
            f"Dataset({len(self._schema)} attributes, {self.record_count} records)"
        )


def schema_from_json(
    doc: Any,
    hierarchies: Mapping[str, GeneralizationHierarchy] | None = None,
) -> tuple[AttributeSchema, ...]:
    """Parse the schema description document (JSON array of objects).

    Each object carries ``name``, ``role``, ``kind``, an optional
    ``hierarchy`` name resolved against ``hierarchies``, and an optional
    ``domain`` (token array, or {"min":…, "max":…} for integer/date kinds).
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    if not isinstance(doc, Sequence) or isinstance(doc, (str, bytes)):
        raise SchemaError("schema document must be a JSON array of objects")
    hierarchies = hierarchies or {}
    attrs = []
    for entry in doc:
        try:
            role = Role(entry["role"])
            kind = Kind(entry["kind"])
            name = str(entry["name"])
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"bad schema entry {entry!r}: {exc}") from None
        hierarchy = None
        if entry.get("hierarchy") is not None:
            href = entry["hierarchy"]
            if isinstance(href, Mapping):
                hierarchy = hierarchy_from_json(href)
            else:
                try:
                    hierarchy = hierarchies[str(href)]
                except KeyError:
                    raise SchemaError(
                        f"attribute {name!r} references unknown hierarchy {href!r}"
                    ) from None
        domain = _domain_from_json(entry.get("domain"), kind)
        attrs.append(
            AttributeSchema(name=name, role=role, kind=kind, hierarchy=hierarchy, domain=domain)
        )
    return tuple(attrs)


def _domain_from_json(doc: Any, kind: Kind):
    if doc is None:
        return None
    if isinstance(doc, Mapping):
        low, high = doc.get("min"), doc.get("max")
        if kind is Kind.DATE:
            return RangeDomain(parse_date(str(low)), parse_date(str(high)))
        return RangeDomain(int(low), int(high))
    return EnumeratedDomain(tuple(str(v) for v in doc))


def schema_to_json(schema: Sequence[AttributeSchema]) -> list[dict[str, Any]]:
    out = []
    for attr in schema:
        entry: dict[str, Any] = {
            "name": attr.name,
            "role": attr.role.value,
            "kind": attr.kind.value,
        }
        if attr.hierarchy is not None:
            entry["hierarchy"] = hierarchy_to_json(attr.hierarchy)
        if isinstance(attr.domain, EnumeratedDomain):
            entry["domain"] = list(attr.domain.values)
        elif isinstance(attr.domain, RangeDomain):
            entry["domain"] = {
                "min": render_cell(attr.domain.low),
                "max": render_cell(attr.domain.high),
            }
        out.append(entry)
    return out


def load_dataset(
    source: str | Path | IO[str],
    schema: Sequence[AttributeSchema],
    provenance: str = "",
) -> Dataset:
    """Load an RFC-4180 delimited file (header row required) against a schema.

    The header must match the schema attribute names exactly and in order.
    Unparseable integer/date cells raise ``CellParseError`` naming the row
    and column; they never become silent missing values.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return load_dataset(fh, schema, provenance=provenance or str(source))
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("source has no header row") from None
    dupes = {n for n in header if header.count(n) > 1}
    if dupes:
        raise SchemaError(f"duplicate column names in header: {sorted(dupes)}")
    expected = [a.name for a in schema]
    if header != expected:
        raise SchemaError(
            f"header does not match schema: header {header!r} vs schema {expected!r}"
        )
    kinds = [a.kind for a in schema]
    rows = []
    for r, record in enumerate(reader, start=1):
        if len(record) != len(schema):
            raise SchemaError(
                f"row {r} has {len(record)} cells for {len(schema)} attributes"
            )
        rows.append(
            tuple(
                parse_cell(token, kind, r, attr.name)
                for token, kind, attr in zip(record, kinds, schema)
            )
        )
    return Dataset(schema, rows, provenance=provenance)


def save_dataset(dataset: Dataset, target: str | Path | IO[str]) -> None:
    """Write a dataset back to RFC-4180 text; MISSING renders as empty."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            save_dataset(dataset, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(dataset.attribute_names)
    for row in dataset.rows:
        writer.writerow([render_cell(v) for v in row])


def dataset_to_csv(dataset: Dataset) -> str:
    buf = io.StringIO()
    save_dataset(dataset, buf)
    return buf.getvalue()


@dataclass(frozen=True)
class AttributeProfile:
    name: str
    role: Role
    kind: Kind
    distinct: int
    missing: int


@dataclass(frozen=True)
class ValidationReport:
    """Per-attribute profile plus a flag list of direct identifiers present."""

    attributes: tuple[AttributeProfile, ...]
    direct_identifiers_present: tuple[str, ...]
    record_count: int

    def to_json(self) -> dict[str, Any]:
        return {
            "record_count": self.record_count,
            "attributes": [
                {
                    "name": p.name,
                    "role": p.role.value,
                    "kind": p.kind.value,
                    "distinct": p.distinct,
                    "missing": p.missing,
                }
                for p in self.attributes
            ],
            "direct_identifiers_present": list(self.direct_identifiers_present),
        }


def validate(dataset: Dataset) -> ValidationReport:
    """Profile every attribute and flag direct identifiers still present."""
    profiles = []
    for attr in dataset.schema:
        column = dataset.column(attr.name)
        missing = sum(1 for v in column if v is MISSING)
        distinct = len({v for v in column if v is not MISSING})
        profiles.append(
            AttributeProfile(
                name=attr.name,
                role=attr.role,
                kind=attr.kind,
                distinct=distinct,
                missing=missing,
            )
        )
    flagged = tuple(a.name for a in dataset.schema if a.role is Role.DIRECT)
    return ValidationReport(
        attributes=tuple(profiles),
        direct_identifiers_present=flagged,
        record_count=dataset.record_count,
    )
