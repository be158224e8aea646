"""Small-cell auditing and category regrouping for summary tables.

Published cross-tabulations leak in two ways: small non-zero counts point
at near-unique people, and a zero opposite a binary attribute level tells
the reader that everyone in that margin sits in the other level. The audit
flags both; the merge operation implements the standard fix of widening
categories until the flags clear.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .model import DeidentError


class TableError(DeidentError):
    """Inconsistent table dimensions or an invalid regrouping."""


@dataclass(frozen=True)
class ContingencyTable:
    """Ordered row/column categories with non-negative integer counts.

    Columns are taken to be ordered bands: by default only consecutive
    columns are considered adjacent for merging. An explicit adjacency
    relation (pairs of column labels) can widen or narrow that.
    """

    row_labels: tuple[str, ...]
    column_labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    column_adjacency: tuple[tuple[str, str], ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "row_labels", tuple(str(l) for l in self.row_labels))
        object.__setattr__(
            self, "column_labels", tuple(str(l) for l in self.column_labels)
        )
        object.__setattr__(
            self, "counts", tuple(tuple(int(c) for c in row) for row in self.counts)
        )
        if not self.row_labels or not self.column_labels:
            raise TableError("table needs at least one row and one column")
        if len(set(self.row_labels)) != len(self.row_labels):
            raise TableError("duplicate row labels")
        if len(set(self.column_labels)) != len(self.column_labels):
            raise TableError("duplicate column labels")
        if len(self.counts) != len(self.row_labels):
            raise TableError(
                f"{len(self.row_labels)} row labels but {len(self.counts)} count rows"
            )
        for label, row in zip(self.row_labels, self.counts):
            if len(row) != len(self.column_labels):
                raise TableError(
                    f"row {label!r} has {len(row)} cells, expected "
                    f"{len(self.column_labels)}"
                )
            if any(c < 0 for c in row):
                raise TableError(f"negative count in row {label!r}")
        if self.column_adjacency is not None:
            known = set(self.column_labels)
            pairs = tuple(tuple(p) for p in self.column_adjacency)
            for a, b in pairs:
                if a not in known or b not in known:
                    raise TableError(f"adjacency pair ({a!r}, {b!r}) names unknown columns")
            object.__setattr__(self, "column_adjacency", pairs)

    @property
    def grand_total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def row_margin(self, label: str) -> int:
        return sum(self.counts[self._row_index(label)])

    def column_margin(self, label: str) -> int:
        j = self._column_index(label)
        return sum(row[j] for row in self.counts)

    def _row_index(self, label: str) -> int:
        try:
            return self.row_labels.index(label)
        except ValueError:
            raise TableError(f"no row named {label!r}") from None

    def _column_index(self, label: str) -> int:
        try:
            return self.column_labels.index(label)
        except ValueError:
            raise TableError(f"no column named {label!r}") from None

    def _adjacent(self, a: str, b: str) -> bool:
        if self.column_adjacency is None:
            return abs(self._column_index(a) - self._column_index(b)) == 1
        return (a, b) in self.column_adjacency or (b, a) in self.column_adjacency

    def to_json(self) -> dict[str, Any]:
        return {
            "rows": list(self.row_labels),
            "columns": list(self.column_labels),
            "counts": [list(row) for row in self.counts],
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "ContingencyTable":
        try:
            return cls(
                row_labels=tuple(doc["rows"]),
                column_labels=tuple(doc["columns"]),
                counts=tuple(tuple(row) for row in doc["counts"]),
                column_adjacency=(
                    tuple(tuple(p) for p in doc["adjacency"])
                    if doc.get("adjacency") is not None
                    else None
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise TableError(f"malformed table document: {exc}") from None

    @classmethod
    def from_delimited(cls, text: str, delimiter: str = "\t") -> "ContingencyTable":
        """Parse a header line of column labels, then one labelled row per line."""
        lines = [line for line in text.splitlines() if line.strip()]
        if len(lines) < 2:
            raise TableError("delimited table needs a header line and at least one row")
        header = lines[0].split(delimiter)
        columns = tuple(h.strip() for h in header[1:])
        rows = []
        counts = []
        for line in lines[1:]:
            cells = [c.strip() for c in line.split(delimiter)]
            if len(cells) != len(columns) + 1:
                raise TableError(
                    f"row {cells[0]!r} has {len(cells) - 1} cells, expected {len(columns)}"
                )
            rows.append(cells[0])
            try:
                counts.append(tuple(int(c) for c in cells[1:]))
            except ValueError as exc:
                raise TableError(f"non-integer count in row {cells[0]!r}: {exc}") from None
        return cls(tuple(rows), columns, tuple(counts))


@dataclass(frozen=True)
class CellFlag:
    """One cell the audit objects to, with the reason spelled out."""

    row: str
    column: str
    count: int
    reason: str
    note: str

    def to_json(self) -> dict[str, Any]:
        return {
            "row": self.row,
            "column": self.column,
            "count": self.count,
            "reason": self.reason,
            "note": self.note,
        }


SMALL_CELL = "small-cell"
COMPLEMENT_INFERENCE = "zero-complement-inference"


@dataclass(frozen=True)
class TableAudit:
    threshold: int
    flags: tuple[CellFlag, ...]
    warnings: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.flags

    def to_json(self) -> dict[str, Any]:
        return {
            "threshold": self.threshold,
            "passed": self.passed,
            "flags": [f.to_json() for f in self.flags],
            "warnings": list(self.warnings),
        }


def _plural(n: int, noun: str) -> str:
    return f"{n} {noun}{'' if n == 1 else 's'}"


def audit_table(table: ContingencyTable, cell_threshold: int) -> TableAudit:
    """Flag small non-zero cells and zeros that force a complement inference.

    A zero forces an inference when the other dimension is binary: with two
    rows, a zero cell reveals that the whole column margin falls in the
    other row level (and symmetrically for two columns). Zeros in tables
    where neither dimension is binary only earn a warning, since what they
    disclose depends on how many levels could absorb the margin.
    """
    if cell_threshold < 1:
        raise TableError("cell threshold must be at least 1")
    flags: list[CellFlag] = []
    warnings: list[str] = []
    n_rows = len(table.row_labels)
    n_cols = len(table.column_labels)
    for i, row_label in enumerate(table.row_labels):
        for j, col_label in enumerate(table.column_labels):
            count = table.counts[i][j]
            if 0 < count < cell_threshold:
                flags.append(
                    CellFlag(
                        row=row_label,
                        column=col_label,
                        count=count,
                        reason=SMALL_CELL,
                        note=(
                            f"count {count} is below the threshold of "
                            f"{cell_threshold}; so few matching subjects are "
                            f"close to identifiable"
                        ),
                    )
                )
            elif count == 0:
                if n_rows == 2:
                    other = table.row_labels[1 - i]
                    margin = table.column_margin(col_label)
                    if margin > 0:
                        flags.append(
                            CellFlag(
                                row=row_label,
                                column=col_label,
                                count=0,
                                reason=COMPLEMENT_INFERENCE,
                                note=(
                                    f"zero under {row_label!r} reveals that all "
                                    f"{_plural(margin, 'subject')} in column "
                                    f"{col_label!r} fall under {other!r}"
                                ),
                            )
                        )
                elif n_cols == 2:
                    other = table.column_labels[1 - j]
                    margin = table.row_margin(row_label)
                    if margin > 0:
                        flags.append(
                            CellFlag(
                                row=row_label,
                                column=col_label,
                                count=0,
                                reason=COMPLEMENT_INFERENCE,
                                note=(
                                    f"zero under {col_label!r} reveals that all "
                                    f"{_plural(margin, 'subject')} in row "
                                    f"{row_label!r} fall under {other!r}"
                                ),
                            )
                        )
                else:
                    warnings.append(
                        f"zero cell at ({row_label!r}, {col_label!r}): with more "
                        f"than two levels on both dimensions the disclosure is "
                        f"weaker but a reader still learns this combination is absent"
                    )
    return TableAudit(threshold=cell_threshold, flags=tuple(flags), warnings=tuple(warnings))


def merge_table_categories(
    table: ContingencyTable, grouping: Mapping[str, str]
) -> ContingencyTable:
    """Sum columns into wider groups. The grouping must cover every column
    and may only join columns that are adjacent (contiguous under the
    table's adjacency relation), so ordered bands stay ordered."""
    missing = [c for c in table.column_labels if c not in grouping]
    if missing:
        raise TableError(
            f"grouping does not cover column(s): {', '.join(repr(m) for m in missing)}"
        )
    unknown = [c for c in grouping if c not in table.column_labels]
    if unknown:
        raise TableError(
            f"grouping names unknown column(s): {', '.join(repr(u) for u in unknown)}"
        )
    groups: dict[str, list[str]] = {}
    new_order: list[str] = []
    for col in table.column_labels:
        target = str(grouping[col])
        if target not in groups:
            groups[target] = []
            new_order.append(target)
        groups[target].append(col)
    for target, members in groups.items():
        if len(members) == 1:
            continue
        # every member must connect to another member: a chain check under
        # the adjacency relation, so {40-45, 50-55} cannot skip over 45-50
        for k, member in enumerate(members):
            neighbours = members[:k] + members[k + 1 :]
            if not any(table._adjacent(member, n) for n in neighbours):
                raise TableError(
                    f"cannot merge non-adjacent column {member!r} into {target!r}"
                )
        indices = sorted(table.column_labels.index(m) for m in members)
        if table.column_adjacency is None and indices != list(
            range(indices[0], indices[-1] + 1)
        ):
            raise TableError(
                f"columns merged into {target!r} are not contiguous: "
                f"{', '.join(repr(m) for m in members)}"
            )
    counts = tuple(
        tuple(
            sum(row[table.column_labels.index(m)] for m in groups[target])
            for target in new_order
        )
        for row in table.counts
    )
    return ContingencyTable(
        row_labels=table.row_labels,
        column_labels=tuple(new_order),
        counts=counts,
    )


def table_from_file(path: str) -> ContingencyTable:
    """Load a table from a JSON document or tab-delimited text file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return ContingencyTable.from_json(json.loads(text))
    return ContingencyTable.from_delimited(text)
