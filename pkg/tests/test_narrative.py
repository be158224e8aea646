import pytest

from deident.narrative import (
    BAND,
    DEFAULT_GLYPH,
    DROP,
    GENERALIZE,
    OFFSET_DATE,
    RECODE,
    REDACT,
    RETAIN,
    Action,
    AnnotatedNarrative,
    NarrativeError,
    NarrativePolicy,
    Span,
    apply_narrative_policy,
    policy_from_json,
    redact_all_policy,
)
from deident.transforms import FixedDateOffset, SubjectOffsetMap


def annotate(text, *fragments):
    """Tag (fragment, category, extras) occurrences, in text order."""
    spans = []
    for fragment, category, *rest in fragments:
        extras = rest[0] if rest else {}
        start = text.index(fragment)
        spans.append(Span(start, start + len(fragment), category, **extras))
    return AnnotatedNarrative(text, tuple(sorted(spans, key=lambda s: s.start)))


class TestSpan:
    def test_category_validated(self):
        with pytest.raises(NarrativeError, match="category"):
            Span(0, 1, "diagnosis")

    def test_bounds_validated(self):
        with pytest.raises(NarrativeError):
            Span(3, 3, "age")
        with pytest.raises(NarrativeError):
            Span(-1, 2, "age")

    def test_override_action_validated(self):
        with pytest.raises(NarrativeError, match="action"):
            Span(0, 1, "free-text", action="erase")


class TestAnnotatedNarrative:
    def test_spans_must_be_sorted_and_disjoint(self):
        with pytest.raises(NarrativeError, match="overlaps"):
            AnnotatedNarrative("abcdef", (Span(0, 3, "age"), Span(2, 5, "age")))
        with pytest.raises(NarrativeError, match="overlaps"):
            AnnotatedNarrative("abcdef", (Span(3, 5, "age"), Span(0, 2, "age")))

    def test_span_must_fit_the_text(self):
        with pytest.raises(NarrativeError, match="past the end"):
            AnnotatedNarrative("ab", (Span(0, 5, "age"),))

    def test_span_text(self):
        n = annotate("aged 35,", ("35", "age"))
        assert n.span_text(n.spans[0]) == "35"

    def test_json_round_trip_keeps_value_and_action(self):
        n = AnnotatedNarrative(
            "x 35 y",
            (Span(2, 4, "age", value=35, action="retain"),),
        )
        doc = n.to_json()
        assert doc["spans"] == [
            {"start": 2, "end": 4, "category": "age", "value": 35, "action": "retain"}
        ]
        again = AnnotatedNarrative.from_json(doc)
        assert again.spans[0].value == 35
        assert again.spans[0].action == "retain"

    def test_malformed_document(self):
        with pytest.raises(NarrativeError, match="malformed"):
            AnnotatedNarrative.from_json({"spans": []})


class TestAction:
    def test_band_takes_exactly_one_spec(self):
        with pytest.raises(NarrativeError, match="exactly one"):
            Action(BAND)
        with pytest.raises(NarrativeError, match="exactly one"):
            Action(BAND, width=10, cuts=(30, 40))

    def test_band_parameters_validated(self):
        with pytest.raises(NarrativeError):
            Action(BAND, width=0)
        with pytest.raises(NarrativeError, match="increasing"):
            Action(BAND, cuts=(40, 30))
        with pytest.raises(NarrativeError, match="labels"):
            Action(BAND, cuts=(30, 40), labels=("a",))

    def test_generalize_needs_mapping(self):
        with pytest.raises(NarrativeError, match="mapping"):
            Action(GENERALIZE)

    def test_json_round_trip(self):
        action = Action(BAND, cuts=(30, 40), labels=("30-40", ">=40"))
        assert Action.from_json(action.to_json()) == action
        mapping = Action(GENERALIZE, mapping={"rash": "[skin disorder]"})
        assert Action.from_json(mapping.to_json()) == mapping


class TestPolicy:
    def test_unlisted_categories_default_to_retain(self):
        policy = NarrativePolicy(actions={"age": Action(REDACT)})
        assert policy.actions["gender"].kind == RETAIN
        assert policy.actions["age"].kind == REDACT

    def test_unknown_category_rejected(self):
        with pytest.raises(NarrativeError, match="unknown categories"):
            NarrativePolicy(actions={"diagnosis": Action(REDACT)})

    def test_span_action_overrides_category_action(self):
        policy = NarrativePolicy(actions={"free-text": Action(REDACT)})
        span = Span(0, 4, "free-text", action=DROP)
        assert policy.action_for(span).kind == DROP

    def test_glyph_must_be_non_empty(self):
        with pytest.raises(NarrativeError, match="glyph"):
            NarrativePolicy(actions={}, glyph="")

    def test_from_json_requires_seed_for_recode(self):
        with pytest.raises(NarrativeError, match="seed"):
            policy_from_json({"actions": {"subject-id": {"kind": "recode"}}})

    def test_from_json_requires_seed_for_per_subject_offsets(self):
        with pytest.raises(NarrativeError, match="seed"):
            policy_from_json({"actions": {"date": {"kind": "offset-date"}}})

    def test_from_json_fixed_offset_needs_days(self):
        with pytest.raises(NarrativeError, match="days"):
            policy_from_json(
                {
                    "actions": {"date": {"kind": "offset-date"}},
                    "offset": {"mode": "fixed"},
                }
            )

    def test_from_json_builds_contexts(self):
        policy = policy_from_json(
            {
                "actions": {
                    "subject-id": {"kind": "recode"},
                    "date": {"kind": "offset-date"},
                },
                "seed": 7,
            }
        )
        assert policy.pseudonyms is not None
        assert isinstance(policy.date_offsets, SubjectOffsetMap)

    def test_from_json_unknown_offset_mode(self):
        with pytest.raises(NarrativeError, match="offset mode"):
            policy_from_json(
                {
                    "actions": {"date": {"kind": "offset-date"}},
                    "offset": {"mode": "fuzz"},
                    "seed": 1,
                }
            )


class TestApply:
    def test_redaction_is_word_by_word(self):
        n = annotate(
            "recovered from the traffic accident today",
            ("the traffic accident", "free-text"),
        )
        out = apply_narrative_policy(n, redact_all_policy())
        blocks = " ".join([DEFAULT_GLYPH] * 3)
        assert out.text == f"recovered from {blocks} today"
        (record,) = out.log
        assert record.original == "the traffic accident"
        assert record.replacement == blocks
        assert record.action == REDACT

    def test_retain_leaves_text_unchanged_but_logs(self):
        n = annotate("aged 35, male", ("35", "age"), ("male", "gender"))
        out = apply_narrative_policy(n, NarrativePolicy(actions={}))
        assert out.text == n.text
        assert [r.action for r in out.log] == [RETAIN, RETAIN]

    def test_recode_is_stable_across_narratives(self):
        policy = policy_from_json(
            {"actions": {"subject-id": {"kind": "recode"}}, "seed": 3}
        )
        first = annotate("Subject '000478' enrolled", ("000478", "subject-id"))
        second = annotate("000478 seen again", ("000478", "subject-id"))
        out1 = apply_narrative_policy(first, policy)
        out2 = apply_narrative_policy(second, policy)
        pseudonym = out1.log[0].replacement
        assert out2.log[0].replacement == pseudonym
        assert pseudonym != "000478"
        assert "000478" not in out1.text

    def test_recode_never_reissues_an_original_id(self):
        policy = policy_from_json(
            {"actions": {"subject-id": {"kind": "recode"}}, "seed": 3}
        )
        ids = [f"{i:06d}" for i in range(40)]
        outputs = set()
        for subject in ids:
            n = annotate(f"Subject {subject} enrolled", (subject, "subject-id"))
            outputs.add(apply_narrative_policy(n, policy).log[0].replacement)
        assert len(outputs) == 40
        assert outputs.isdisjoint(ids)

    def test_band_by_width_uses_decade_style_labels(self):
        policy = NarrativePolicy(actions={"age": Action(BAND, width=10)})
        n = annotate("aged 35,", ("35", "age", {"value": 35}))
        out = apply_narrative_policy(n, policy)
        assert out.text == "aged 30-40,"

    def test_band_by_cuts_defaults_and_errors(self):
        policy = NarrativePolicy(actions={"age": Action(BAND, cuts=(30, 40, 50))})
        for value, label in ((35, "30-40"), (45, "40-50"), (55, ">=50")):
            n = annotate(f"aged {value}", (str(value), "age"))
            assert apply_narrative_policy(n, policy).text == f"aged {label}"
        low = annotate("aged 20", ("20", "age"))
        with pytest.raises(NarrativeError, match="below the first band cut"):
            apply_narrative_policy(low, policy)

    def test_band_needs_an_integer(self):
        policy = NarrativePolicy(actions={"age": Action(BAND, width=10)})
        n = annotate("aged unknown", ("unknown", "age"))
        with pytest.raises(NarrativeError, match="integer"):
            apply_narrative_policy(n, policy)

    def test_generalize_maps_terms(self):
        policy = NarrativePolicy(
            actions={"location": Action(GENERALIZE, mapping={"Argentina": "South America"})}
        )
        n = annotate("from Argentina,", ("Argentina", "location"))
        assert apply_narrative_policy(n, policy).text == "from South America,"

    def test_generalize_without_an_entry_is_an_error(self):
        policy = NarrativePolicy(
            actions={"location": Action(GENERALIZE, mapping={"Peru": "South America"})}
        )
        n = annotate("from Argentina,", ("Argentina", "location"))
        with pytest.raises(NarrativeError, match="Argentina"):
            apply_narrative_policy(n, policy)

    def test_offset_dates_share_the_subject_offset(self):
        policy = NarrativePolicy(
            actions={"date": Action(OFFSET_DATE)},
            date_offsets=SubjectOffsetMap(seed=7),
        )
        n = annotate(
            "Subject 000478 rash on 16/Oct/2006 resolved on 01/Nov/2006",
            ("000478", "subject-id"),
            ("16/Oct/2006", "date"),
            ("01/Nov/2006", "date"),
        )
        out = apply_narrative_policy(n, policy)
        from deident.model import parse_date

        first = parse_date(out.log[1].replacement)
        second = parse_date(out.log[2].replacement)
        assert (second - first).days == 16
        assert out.log[1].replacement != "16/Oct/2006"

    def test_offset_date_keeps_the_original_rendering_style(self):
        policy = NarrativePolicy(
            actions={"date": Action(OFFSET_DATE)},
            date_offsets=FixedDateOffset(-396),
        )
        n = annotate(
            "on 16/Oct/2006 and 2006-10-16",
            ("16/Oct/2006", "date"),
            ("2006-10-16", "date"),
        )
        out = apply_narrative_policy(n, policy)
        assert out.log[0].replacement == "15/Sep/2005"
        assert out.log[1].replacement == "2005-09-15"

    def test_offset_date_without_context_is_an_error(self):
        policy = NarrativePolicy(actions={"date": Action(OFFSET_DATE)})
        n = annotate("on 16/Oct/2006", ("16/Oct/2006", "date"))
        with pytest.raises(NarrativeError, match="date-offset context"):
            apply_narrative_policy(n, policy)

    def test_unparseable_date_is_an_error(self):
        policy = NarrativePolicy(
            actions={"date": Action(OFFSET_DATE)},
            date_offsets=FixedDateOffset(1),
        )
        n = annotate("on October half-term", ("October half-term", "date"))
        with pytest.raises(NarrativeError, match="parseable"):
            apply_narrative_policy(n, policy)

    def test_drop_override_removes_the_span_entirely(self):
        n = annotate(
            "re-started IP after recovery from the traffic accident on day 3",
            (" after recovery from the traffic accident", "free-text", {"action": DROP}),
        )
        out = apply_narrative_policy(n, NarrativePolicy(actions={}))
        assert out.text == "re-started IP on day 3"
        assert out.log[0].replacement == ""

    def test_without_a_subject_span_dates_still_shift_consistently(self):
        policy = NarrativePolicy(
            actions={"date": Action(OFFSET_DATE)},
            date_offsets=SubjectOffsetMap(seed=9),
        )
        n = annotate(
            "seen 2020-01-01, again 2020-01-11",
            ("2020-01-01", "date"),
            ("2020-01-11", "date"),
        )
        out = apply_narrative_policy(n, policy)
        from deident.model import parse_date

        first = parse_date(out.log[0].replacement)
        second = parse_date(out.log[1].replacement)
        assert (second - first).days == 10

    def test_result_json_shape(self):
        n = annotate("aged 35", ("35", "age"))
        doc = apply_narrative_policy(n, redact_all_policy()).to_json()
        assert doc["text"] == f"aged {DEFAULT_GLYPH}"
        assert doc["log"][0]["category"] == "age"

    def test_recode_rejects_an_id_equal_to_an_issued_pseudonym(self):
        policy = policy_from_json(
            {"actions": {"subject-id": {"kind": "recode"}}, "seed": 3}
        )
        first = annotate("Subject 000478", ("000478", "subject-id"))
        issued = apply_narrative_policy(first, policy).log[0].replacement
        clash = annotate(f"Subject {issued}", (issued, "subject-id"))
        from deident.model import DeidentError

        with pytest.raises(DeidentError, match="register all originals"):
            apply_narrative_policy(clash, policy)
