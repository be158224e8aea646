import json

import pytest

from deident.tables import (
    COMPLEMENT_INFERENCE,
    SMALL_CELL,
    ContingencyTable,
    TableError,
    audit_table,
    merge_table_categories,
    table_from_file,
)


def table(counts, rows=None, columns=None, adjacency=None):
    rows = rows or [f"r{i}" for i in range(len(counts))]
    columns = columns or [f"c{j}" for j in range(len(counts[0]))]
    return ContingencyTable(
        tuple(rows), tuple(columns), tuple(tuple(r) for r in counts), adjacency
    )


class TestContingencyTable:
    def test_margins_and_total(self):
        t = table([[1, 2, 3], [4, 5, 6]])
        assert t.grand_total == 21
        assert t.row_margin("r0") == 6
        assert t.column_margin("c1") == 7

    def test_unknown_labels(self):
        t = table([[1]])
        with pytest.raises(TableError, match="no row"):
            t.row_margin("nope")
        with pytest.raises(TableError, match="no column"):
            t.column_margin("nope")

    def test_shape_validation(self):
        with pytest.raises(TableError, match="at least one"):
            ContingencyTable((), ("a",), ())
        with pytest.raises(TableError, match="duplicate row"):
            table([[1], [2]], rows=["x", "x"])
        with pytest.raises(TableError, match="duplicate column"):
            table([[1, 2]], columns=["y", "y"])
        with pytest.raises(TableError, match="cells"):
            table([[1, 2], [3]])
        with pytest.raises(TableError, match="negative"):
            table([[1, -2]])

    def test_adjacency_must_name_known_columns(self):
        with pytest.raises(TableError, match="unknown columns"):
            table([[1, 2]], adjacency=(("c0", "zz"),))

    def test_json_round_trip(self):
        t = table([[1, 2], [3, 4]])
        doc = t.to_json()
        assert doc == {
            "rows": ["r0", "r1"],
            "columns": ["c0", "c1"],
            "counts": [[1, 2], [3, 4]],
        }
        assert ContingencyTable.from_json(doc) == t

    def test_from_json_with_adjacency(self):
        doc = {
            "rows": ["r"],
            "columns": ["a", "b"],
            "counts": [[1, 2]],
            "adjacency": [["a", "b"]],
        }
        t = ContingencyTable.from_json(doc)
        assert t.column_adjacency == (("a", "b"),)

    def test_malformed_json(self):
        with pytest.raises(TableError, match="malformed"):
            ContingencyTable.from_json({"rows": ["r"]})

    def test_from_delimited(self):
        text = "\t40-45\t45-50\nNo\t0\t5\nYes\t2\t4\n"
        t = ContingencyTable.from_delimited(text)
        assert t.row_labels == ("No", "Yes")
        assert t.column_labels == ("40-45", "45-50")
        assert t.counts == ((0, 5), (2, 4))

    def test_from_delimited_errors(self):
        with pytest.raises(TableError, match="header"):
            ContingencyTable.from_delimited("only one line")
        with pytest.raises(TableError, match="expected 2"):
            ContingencyTable.from_delimited("\ta\tb\nNo\t1\n")
        with pytest.raises(TableError, match="non-integer"):
            ContingencyTable.from_delimited("\ta\nNo\tmany\n")


class TestAudit:
    def test_small_nonzero_cells_flagged_below_threshold_only(self):
        t = table([[1, 4, 5, 9], [7, 7, 7, 7]])
        audit = audit_table(t, cell_threshold=5)
        small = [(f.row, f.column, f.count) for f in audit.flags if f.reason == SMALL_CELL]
        assert small == [("r0", "c0", 1), ("r0", "c1", 4)]
        assert not audit.passed

    def test_zero_with_binary_rows_is_a_complement_inference(self):
        t = table([[0, 5], [2, 5]], rows=["No", "Yes"], columns=["40-45", "45-50"])
        audit = audit_table(t, cell_threshold=1)
        (flag,) = audit.flags
        assert flag.reason == COMPLEMENT_INFERENCE
        assert flag.count == 0
        assert (
            flag.note
            == "zero under 'No' reveals that all 2 subjects in column '40-45' "
            "fall under 'Yes'"
        )

    def test_zero_with_binary_columns_is_symmetric(self):
        t = table(
            [[0, 10], [3, 3], [4, 4]],
            rows=["young", "mid", "old"],
            columns=["No", "Yes"],
        )
        audit = audit_table(t, cell_threshold=1)
        (flag,) = audit.flags
        assert flag.reason == COMPLEMENT_INFERENCE
        assert "all 10 subjects in row 'young' fall under 'Yes'" in flag.note

    def test_zero_against_empty_margin_discloses_nothing(self):
        t = table([[0, 5], [0, 5]])
        audit = audit_table(t, cell_threshold=1)
        assert audit.passed
        assert audit.flags == ()

    def test_zero_without_a_binary_dimension_is_a_warning(self):
        t = table([[0, 5, 5], [5, 5, 5], [5, 5, 5]])
        audit = audit_table(t, cell_threshold=1)
        assert audit.passed
        assert len(audit.warnings) == 1
        assert "absent" in audit.warnings[0]

    def test_threshold_validated(self):
        with pytest.raises(TableError):
            audit_table(table([[1]]), cell_threshold=0)

    def test_json_shape(self):
        t = table([[1, 9]])
        doc = audit_table(t, cell_threshold=5).to_json()
        assert doc["threshold"] == 5
        assert doc["passed"] is False
        assert doc["flags"][0]["reason"] == SMALL_CELL
        assert doc["warnings"] == []


class TestMerge:
    def test_sums_adjacent_columns_in_order(self):
        t = table(
            [[1, 2, 3, 4], [5, 6, 7, 8]],
            columns=["a", "b", "c", "d"],
        )
        merged = merge_table_categories(t, {"a": "ab", "b": "ab", "c": "cd", "d": "cd"})
        assert merged.column_labels == ("ab", "cd")
        assert merged.counts == ((3, 7), (11, 15))
        assert merged.row_labels == t.row_labels

    def test_singleton_groups_pass_through(self):
        t = table([[1, 2, 3]], columns=["a", "b", "c"])
        merged = merge_table_categories(t, {"a": "ab", "b": "ab", "c": "c"})
        assert merged.column_labels == ("ab", "c")
        assert merged.counts == ((3, 3),)

    def test_grouping_must_cover_all_columns(self):
        t = table([[1, 2]], columns=["a", "b"])
        with pytest.raises(TableError, match="does not cover"):
            merge_table_categories(t, {"a": "x"})

    def test_grouping_must_not_invent_columns(self):
        t = table([[1, 2]], columns=["a", "b"])
        with pytest.raises(TableError, match="unknown column"):
            merge_table_categories(t, {"a": "x", "b": "x", "z": "x"})

    def test_skipping_a_column_is_rejected(self):
        t = table([[1, 2, 3]], columns=["a", "b", "c"])
        with pytest.raises(TableError, match="non-adjacent|not contiguous"):
            merge_table_categories(t, {"a": "ac", "b": "b", "c": "ac"})

    def test_explicit_adjacency_overrides_column_order(self):
        t = table(
            [[1, 2, 3]],
            columns=["a", "b", "c"],
            adjacency=(("a", "c"),),
        )
        merged = merge_table_categories(t, {"a": "ac", "b": "b", "c": "ac"})
        assert merged.column_labels == ("ac", "b")
        assert merged.counts == ((4, 2),)
        with pytest.raises(TableError, match="non-adjacent"):
            merge_table_categories(t, {"a": "ab", "b": "ab", "c": "c"})

    def test_merge_preserves_grand_total(self):
        t = table([[5, 7, 11], [2, 3, 13]], columns=["a", "b", "c"])
        merged = merge_table_categories(t, {"a": "x", "b": "x", "c": "c"})
        assert merged.grand_total == t.grand_total


class TestTableFromFile:
    def test_json_file(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"rows": ["r"], "columns": ["c"], "counts": [[4]]}))
        t = table_from_file(str(path))
        assert t.counts == ((4,),)

    def test_delimited_file(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("\tc0\tc1\nr0\t1\t2\n")
        t = table_from_file(str(path))
        assert t.counts == ((1, 2),)
