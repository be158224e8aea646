"""Bundled demo fixtures: a synthetic trial-baseline cohort, a worked
anonymization plan, an annotated adverse-event narrative, and a small
summary table with a disclosure problem.

The cohort is synthetic but shaped so the demo plan (suppress the oldest
subjects, band age, keep gender) lands on a realistic released state: 252
rows in, 242 out, eight age-band/gender classes, smallest class 18. All
generation is seeded and deterministic, so fixtures are identical across
runs and platforms.
"""

from __future__ import annotations

import random

from .attack import OPEN_RELEASE
from .model import (
    AttributeSchema,
    Dataset,
    EnumeratedDomain,
    Kind,
    RangeDomain,
    Role,
    build_hierarchy,
)
from . import narrative as nar
from .narrative import Action, AnnotatedNarrative, NarrativePolicy, Span
from .pipeline import AnonymizationPlan
from .tables import ContingencyTable
from .transforms import (
    BAND_NUMERIC,
    SUPPRESS_RECORDS,
    FixedDateOffset,
    PseudonymAssigner,
    SubjectOffsetMap,
    TransformStep,
)

_SEED = 1208

# (gender, (low age, high age, how many)) with ages cycling through each
# subrange; the oldest groups are the ten rows the demo plan suppresses
_COHORT_SHAPE = (
    ("F", ((30, 34, 55), (35, 39, 36), (40, 44, 30), (45, 49, 24), (50, 54, 6), (55, 59, 5))),
    ("M", ((30, 34, 23), (35, 39, 30), (40, 44, 20), (45, 49, 14), (50, 54, 4), (56, 60, 5))),
)


def demo_schema() -> tuple[AttributeSchema, ...]:
    country_hierarchy = build_hierarchy(
        [
            (
                "continent",
                {
                    "Colombia": "South America",
                    "Argentina": "South America",
                    "Peru": "South America",
                },
            )
        ],
        name="country",
        complete=True,
    )
    return (
        AttributeSchema("Subject ID", Role.DIRECT, Kind.TEXT),
        AttributeSchema(
            "Gender",
            Role.QUASI,
            Kind.CATEGORICAL,
            domain=EnumeratedDomain(("F", "M")),
        ),
        AttributeSchema("Race", Role.NEUTRAL, Kind.CATEGORICAL),
        AttributeSchema(
            "Age", Role.QUASI, Kind.INTEGER, domain=RangeDomain(30, 60)
        ),
        AttributeSchema("Ethnicity", Role.NEUTRAL, Kind.CATEGORICAL),
        AttributeSchema(
            "Country", Role.NEUTRAL, Kind.CATEGORICAL, hierarchy=country_hierarchy
        ),
        AttributeSchema(
            "CDR Global",
            Role.SENSITIVE,
            Kind.CATEGORICAL,
            domain=EnumeratedDomain(("0", "0.5")),
        ),
        AttributeSchema(
            "MMSE Total Score", Role.SENSITIVE, Kind.INTEGER, domain=RangeDomain(23, 30)
        ),
    )


def demo_dataset() -> Dataset:
    """The 252-row synthetic baseline cohort."""
    rng = random.Random(_SEED)
    total = sum(count for _, groups in _COHORT_SHAPE for _, _, count in groups)
    ids = [f"{n:06d}" for n in rng.sample(range(100000, 1000000), total)]
    rows = []
    i = 0
    for gender, groups in _COHORT_SHAPE:
        for low, high, count in groups:
            span = high - low + 1
            for j in range(count):
                rows.append(
                    (
                        ids[i],
                        gender,
                        "OTHER",
                        low + (j % span),
                        "HISPANIC OR LATINO",
                        "Colombia",
                        "0" if i % 2 == 0 else "0.5",
                        23 + (i % 8),
                    )
                )
                i += 1
    rng.shuffle(rows)
    return Dataset(demo_schema(), rows, provenance="demo-cohort")


AGE_BAND_CUTS = (30, 35, 40, 45)
TEN_YEAR_CUTS = (30, 40, 50)
TEN_YEAR_LABELS = ("30-39", "40-49", "50-59")


def demo_plan() -> AnonymizationPlan:
    """Suppress subjects aged over 54, then band age into four bands."""
    return AnonymizationPlan(
        quasi_set=("Age", "Gender"),
        policy=OPEN_RELEASE,
        tau=5,
        steps=(
            TransformStep(
                SUPPRESS_RECORDS,
                params={"where": [{"attr": "Age", "op": ">", "value": 54}]},
            ),
            TransformStep(
                BAND_NUMERIC, target=("Age",), params={"cuts": list(AGE_BAND_CUTS)}
            ),
        ),
    )


def demo_released():
    """The demo cohort with the demo plan applied: (dataset, ledger)."""
    from .pipeline import apply_plan

    return apply_plan(demo_dataset(), demo_plan())


# ---------------------------------------------------------------------------
# annotated narrative

_NARRATIVE_TEXT = (
    "Subject '000478' male, aged 35, from Argentina, re-started IP after "
    "recovery from the traffic accident on 16/Oct/2006 and developed a rash "
    "on his face on 17/Oct/2006. IP was stopped on 01/Nov/2006"
)


def _span_at(text: str, fragment: str, category: str, occurrence: int = 1, **kw) -> Span:
    start = -1
    for _ in range(occurrence):
        start = text.index(fragment, start + 1)
    return Span(start=start, end=start + len(fragment), category=category, **kw)


def demo_narrative(include_free_text: bool = True) -> AnnotatedNarrative:
    """The demo adverse-event narrative with identifier spans tagged.

    include_free_text adds the two free-text regions (the accident clause,
    annotated for dropping, and the body-location phrase): the fuller
    annotation a reviewer would produce when rewriting beyond plain
    redaction. With it off, only the core identifier spans remain.
    """
    text = _NARRATIVE_TEXT
    spans = [
        _span_at(text, "000478", "subject-id"),
        _span_at(text, "male", "gender"),
        _span_at(text, "35", "age", value=35),
        _span_at(text, "Argentina", "location"),
        _span_at(text, "16/Oct/2006", "date"),
        _span_at(text, "rash", "event-term"),
        _span_at(text, "17/Oct/2006", "date"),
        _span_at(text, "01/Nov/2006", "date"),
    ]
    if include_free_text:
        spans.append(
            _span_at(
                text,
                " after recovery from the traffic accident",
                "free-text",
                action="drop",
            )
        )
        spans.append(_span_at(text, "his face", "free-text"))
    spans.sort(key=lambda s: s.start)
    return AnnotatedNarrative(text=text, spans=tuple(spans))


EVENT_TERM_MAP = {"rash": "[Skin and subcutaneous tissue disorders]"}
LOCATION_MAP = {
    "Argentina": "South America",
    "Colombia": "South America",
    "Peru": "South America",
}


def demo_narrative_policy(
    seed: int = 7, fixed_offset_days: int | None = None
) -> NarrativePolicy:
    """Rewrite-beyond-redaction policy for the demo narrative.

    Subject ids are recoded, gender and leftover free text are redacted,
    age is decade-banded, locations generalize to continent, event terms
    map to their body-system class, and dates shift by one per-subject
    offset (or a fixed day count when fixed_offset_days is given).
    """
    offsets: FixedDateOffset | SubjectOffsetMap
    if fixed_offset_days is not None:
        offsets = FixedDateOffset(fixed_offset_days)
    else:
        offsets = SubjectOffsetMap(seed)
    return NarrativePolicy(
        actions={
            "subject-id": Action(nar.RECODE),
            "gender": Action(nar.REDACT),
            "age": Action(nar.BAND, width=10),
            "location": Action(nar.GENERALIZE, mapping=LOCATION_MAP),
            "date": Action(nar.OFFSET_DATE),
            "event-term": Action(nar.GENERALIZE, mapping=EVENT_TERM_MAP),
            "free-text": Action(nar.REDACT),
        },
        pseudonyms=PseudonymAssigner(seed),
        date_offsets=offsets,
    )


# ---------------------------------------------------------------------------
# summary table

TABLE_COLUMNS = ("40-45", "45-50", "50-55", "55-60", "60-65", "65-70", ">70")
TABLE_MERGE = {
    "40-45": "40-50",
    "45-50": "40-50",
    "50-55": "50-60",
    "55-60": "50-60",
    "60-65": "60-70",
    "65-70": "60-70",
    ">70": ">70",
}


def demo_table() -> ContingencyTable:
    """Age band against history of a medical condition, with a zero cell."""
    return ContingencyTable(
        row_labels=("No", "Yes"),
        column_labels=TABLE_COLUMNS,
        counts=(
            (0, 5, 13, 25, 33, 14, 16),
            (2, 4, 9, 16, 21, 8, 11),
        ),
    )
