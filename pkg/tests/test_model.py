import copy
import io
import json
from datetime import date

import pytest

from deident.model import (
    MISSING,
    AttributeSchema,
    CellParseError,
    Dataset,
    EnumeratedDomain,
    HierarchyError,
    Kind,
    RangeDomain,
    Role,
    SchemaError,
    build_hierarchy,
    dataset_to_csv,
    format_date,
    hierarchy_from_json,
    hierarchy_to_json,
    load_dataset,
    looks_like_dmy,
    parse_cell,
    parse_date,
    save_dataset,
    schema_from_json,
    schema_to_json,
    validate,
)
from conftest import make_dataset


class TestMissing:
    def test_is_falsy_singleton(self):
        assert not MISSING
        assert copy.copy(MISSING) is MISSING
        assert copy.deepcopy(MISSING) is MISSING
        assert repr(MISSING) == "MISSING"

    def test_distinct_from_empty_string(self):
        assert MISSING != ""


class TestDates:
    def test_parses_iso(self):
        assert parse_date("2006-10-16") == date(2006, 10, 16)

    def test_parses_day_month_abbrev_year(self):
        assert parse_date("16/Oct/2006") == date(2006, 10, 16)
        assert parse_date("01/Nov/2006") == date(2006, 11, 1)
        assert parse_date("5/jan/1999") == date(1999, 1, 5)

    def test_rejects_unknown_month(self):
        with pytest.raises(ValueError):
            parse_date("16/Okt/2006")

    def test_format_round_trips_both_styles(self):
        d = date(2005, 9, 15)
        assert format_date(d) == "2005-09-15"
        assert format_date(d, style="dd/Mon/yyyy") == "15/Sep/2005"
        assert parse_date(format_date(d, style="dd/Mon/yyyy")) == d

    def test_looks_like_dmy(self):
        assert looks_like_dmy("16/Oct/2006")
        assert not looks_like_dmy("2006-10-16")
        assert not looks_like_dmy("16/13/2006")


class TestCells:
    def test_empty_token_is_missing(self):
        assert parse_cell("", Kind.INTEGER, 1, "Age") is MISSING

    def test_integer_and_date_parsing(self):
        assert parse_cell("42", Kind.INTEGER, 1, "Age") == 42
        assert parse_cell("16/Oct/2006", Kind.DATE, 1, "Onset") == date(2006, 10, 16)

    def test_parse_error_names_row_and_column(self):
        with pytest.raises(CellParseError) as info:
            parse_cell("abc", Kind.INTEGER, 7, "Age")
        assert info.value.row == 7
        assert info.value.column == "Age"
        assert "abc" in str(info.value)


class TestHierarchy:
    def build(self):
        return build_hierarchy(
            [
                ("five-year", {"30": "30-34", "31": "30-34", "35": "35-39"}),
                ("decade", {"30-34": "30-39", "35-39": "30-39"}),
            ],
            name="age",
        )

    def test_height_and_levels(self):
        h = self.build()
        assert h.height == 2
        assert h.level_count == 3
        assert h.tokens_at(0) == ("30", "31", "35")
        assert h.tokens_at(1) == ("30-34", "35-39")
        assert h.tokens_at(2) == ("30-39",)

    def test_map_token_composes_levels(self):
        h = self.build()
        assert h.map_token("31", 0) == "31"
        assert h.map_token("31", 1) == "30-34"
        assert h.map_token("31", 2) == "30-39"

    def test_unmapped_token_is_named_in_error(self):
        with pytest.raises(HierarchyError, match="'35'"):
            build_hierarchy([("bands", {"30": "30-34"})], domain=["30", "35"])

    def test_value_outside_domain_rejected(self):
        with pytest.raises(HierarchyError, match="outside the domain"):
            self.build().map_token("99", 1)

    def test_complete_requires_single_top_token(self):
        with pytest.raises(HierarchyError, match="declared complete"):
            build_hierarchy(
                [("bands", {"30": "30-34", "35": "35-39"})], complete=True
            )
        h = build_hierarchy(
            [("all", {"30": "any", "35": "any"})], name="ok", complete=True
        )
        assert h.tokens_at(1) == ("any",)

    def test_rebase_drops_consumed_levels(self):
        h = self.build()
        rebased = h.rebase(1)
        assert rebased.base == ("30-34", "35-39")
        assert rebased.height == 1
        assert rebased.map_token("30-34", 1) == "30-39"
        assert h.rebase(2) is None

    def test_json_round_trip(self):
        h = self.build()
        again = hierarchy_from_json(hierarchy_to_json(h))
        assert again.base == h.base
        assert again.mappings == h.mappings
        assert again.level_names == h.level_names


class TestAttributeSchema:
    def test_hierarchy_requires_categorical_or_integer(self):
        h = build_hierarchy([("top", {"a": "x"})])
        AttributeSchema("ok", Role.QUASI, Kind.CATEGORICAL, hierarchy=h)
        AttributeSchema("ok2", Role.QUASI, Kind.INTEGER, hierarchy=h)
        with pytest.raises(SchemaError, match="hierarchy"):
            AttributeSchema("bad", Role.QUASI, Kind.TEXT, hierarchy=h)

    def test_empty_name_rejected(self):
        with pytest.raises(SchemaError):
            AttributeSchema("", Role.QUASI, Kind.TEXT)

    def test_domains_validate(self):
        with pytest.raises(SchemaError):
            EnumeratedDomain(("a", "a"))
        with pytest.raises(SchemaError):
            RangeDomain(10, 5)
        with pytest.raises(SchemaError):
            RangeDomain(1, date(2020, 1, 1))


class TestDataset:
    def test_is_immutable(self):
        ds = make_dataset({"A": ["x"]})
        with pytest.raises(AttributeError):
            ds.rows = ()

    def test_duplicate_attribute_names_rejected(self):
        attr = AttributeSchema("A", Role.QUASI, Kind.TEXT)
        with pytest.raises(SchemaError, match="duplicate"):
            Dataset((attr, attr), [])

    def test_row_length_checked(self):
        schema = (AttributeSchema("A", Role.QUASI, Kind.TEXT),)
        with pytest.raises(SchemaError, match="row 1"):
            Dataset(schema, [("x", "y")])

    def test_mapping_rows_reordered_to_schema(self):
        schema = (
            AttributeSchema("A", Role.QUASI, Kind.TEXT),
            AttributeSchema("B", Role.QUASI, Kind.INTEGER),
        )
        ds = Dataset(schema, [{"B": 2, "A": "x"}])
        assert ds.rows == (("x", 2),)

    def test_mapping_row_with_unknown_attribute_rejected(self):
        schema = (AttributeSchema("A", Role.QUASI, Kind.TEXT),)
        with pytest.raises(SchemaError, match="unknown"):
            Dataset(schema, [{"A": "x", "Z": 1}])

    def test_column_and_row_mapping(self):
        ds = make_dataset({"A": ["x", "y"], "N": [1, 2]})
        assert ds.column("N") == (1, 2)
        assert ds.row_mapping(1) == {"A": "y", "N": 2}

    def test_value_equality(self):
        a = make_dataset({"A": ["x"]})
        b = make_dataset({"A": ["x"]})
        assert a == b
        assert a != make_dataset({"A": ["y"]})


class TestSchemaJson:
    def test_round_trip_with_inline_hierarchy_and_domains(self):
        h = build_hierarchy([("top", {"a": "x", "b": "x"})], name="letters")
        schema = (
            AttributeSchema("ID", Role.DIRECT, Kind.TEXT),
            AttributeSchema(
                "L",
                Role.QUASI,
                Kind.CATEGORICAL,
                hierarchy=h,
                domain=EnumeratedDomain(("a", "b")),
            ),
            AttributeSchema("Age", Role.QUASI, Kind.INTEGER, domain=RangeDomain(0, 99)),
            AttributeSchema("Seen", Role.NEUTRAL, Kind.DATE),
        )
        again = schema_from_json(schema_to_json(schema))
        assert [a.name for a in again] == ["ID", "L", "Age", "Seen"]
        assert again[1].hierarchy.base == ("a", "b")
        assert again[1].domain == EnumeratedDomain(("a", "b"))
        assert again[2].domain == RangeDomain(0, 99)

    def test_hierarchy_resolved_from_registry(self):
        h = build_hierarchy([("top", {"a": "x"})], name="letters")
        doc = [
            {"name": "L", "role": "quasi-identifier", "kind": "categorical", "hierarchy": "letters"}
        ]
        (attr,) = schema_from_json(doc, hierarchies={"letters": h})
        assert attr.hierarchy is h

    def test_unknown_hierarchy_reference_rejected(self):
        doc = [
            {"name": "L", "role": "quasi-identifier", "kind": "categorical", "hierarchy": "nope"}
        ]
        with pytest.raises(SchemaError, match="nope"):
            schema_from_json(doc)

    def test_bad_role_rejected(self):
        with pytest.raises(SchemaError):
            schema_from_json([{"name": "A", "role": "identifier", "kind": "text"}])


class TestLoadSave:
    def schema(self):
        return (
            AttributeSchema("Name", Role.DIRECT, Kind.TEXT),
            AttributeSchema("Age", Role.QUASI, Kind.INTEGER),
            AttributeSchema("Visit", Role.NEUTRAL, Kind.DATE),
        )

    def test_round_trip_with_missing_cells(self, tmp_path):
        ds = Dataset(
            self.schema(),
            [("ann", 30, date(2020, 1, 2)), ("bob", MISSING, MISSING)],
        )
        path = tmp_path / "d.csv"
        save_dataset(ds, path)
        again = load_dataset(path, self.schema())
        assert again.rows == ds.rows

    def test_header_must_match_schema_order(self):
        src = io.StringIO("Age,Name,Visit\n30,ann,2020-01-02\n")
        with pytest.raises(SchemaError, match="header"):
            load_dataset(src, self.schema())

    def test_duplicate_header_rejected(self):
        src = io.StringIO("Name,Name,Visit\nann,ann,2020-01-02\n")
        with pytest.raises(SchemaError, match="duplicate"):
            load_dataset(src, self.schema())

    def test_cell_error_names_row_and_column(self):
        src = io.StringIO("Name,Age,Visit\nann,oops,2020-01-02\n")
        with pytest.raises(CellParseError, match="row 1, column 'Age'"):
            load_dataset(src, self.schema())

    def test_csv_text_is_newline_terminated_rfc4180(self):
        ds = Dataset(self.schema(), [("a,b", 1, date(2020, 1, 2))])
        text = dataset_to_csv(ds)
        assert text.splitlines()[0] == "Name,Age,Visit"
        assert '"a,b"' in text


class TestValidate:
    def test_profiles_and_direct_identifier_flags(self):
        ds = make_dataset(
            {"ID": ["a", "b", "b"], "Age": [30, MISSING, 30]},
            roles={"ID": Role.DIRECT},
        )
        report = validate(ds)
        assert report.record_count == 3
        assert report.direct_identifiers_present == ("ID",)
        by_name = {p.name: p for p in report.attributes}
        assert by_name["ID"].distinct == 2
        assert by_name["Age"].distinct == 1
        assert by_name["Age"].missing == 1
        doc = report.to_json()
        assert doc["direct_identifiers_present"] == ["ID"]
