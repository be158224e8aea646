"""Policy-driven rewriting of annotated clinical narratives.

Identifier spans come pre-annotated (start, end, category, optional
normalized value); nothing here tries to detect identifiers in free text,
because automatic recognition needs full manual review anyway. A policy
assigns one action per category, ranging from plain redaction to recoding,
banding, term generalization, and consistent date offsetting, so a
narrative can keep its clinical story while losing its identifying detail.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Any, Mapping, Sequence

from .model import DeidentError, format_date, looks_like_dmy, parse_date
from .transforms import FixedDateOffset, PseudonymAssigner, SubjectOffsetMap


class NarrativeError(DeidentError):
    """Invalid annotation, policy, or a span the policy cannot rewrite."""


CATEGORIES = (
    "subject-id",
    "gender",
    "age",
    "location",
    "date",
    "event-term",
    "free-text",
)

RETAIN = "retain"
REDACT = "redact"
RECODE = "recode"
BAND = "band"
GENERALIZE = "generalize"
OFFSET_DATE = "offset-date"
DROP = "drop"

ACTION_KINDS = (RETAIN, REDACT, RECODE, BAND, GENERALIZE, OFFSET_DATE, DROP)

# ten full-block characters; constant width, so the length of a redaction
# says nothing about the length of what it hides
DEFAULT_GLYPH = "█" * 10


@dataclass(frozen=True)
class Span:
    """One tagged region of the narrative text.

    ``value`` optionally carries the normalized form (an integer age, an
    ISO date string). ``action`` optionally overrides the policy for this
    span alone; which free-text spans to drop outright is an annotation
    decision, not something a per-category rule can know.
    """

    start: int
    end: int
    category: str
    value: Any = None
    action: str | None = None

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise NarrativeError(
                f"unknown span category {self.category!r}; expected one of "
                f"{', '.join(CATEGORIES)}"
            )
        if self.action is not None and self.action not in ACTION_KINDS:
            raise NarrativeError(f"unknown span action {self.action!r}")
        if self.start < 0 or self.end <= self.start:
            raise NarrativeError(
                f"span bounds [{self.start}, {self.end}) are not a valid region"
            )

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "start": self.start,
            "end": self.end,
            "category": self.category,
        }
        if self.value is not None:
            doc["value"] = self.value
        if self.action is not None:
            doc["action"] = self.action
        return doc


@dataclass(frozen=True)
class AnnotatedNarrative:
    text: str
    spans: tuple[Span, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "spans", tuple(self.spans))
        previous_end = 0
        for span in self.spans:
            if span.end > len(self.text):
                raise NarrativeError(
                    f"span [{span.start}, {span.end}) runs past the end of the "
                    f"text (length {len(self.text)})"
                )
            if span.start < previous_end:
                raise NarrativeError(
                    f"span [{span.start}, {span.end}) overlaps an earlier span "
                    f"or is out of order; spans must be sorted and disjoint"
                )
            previous_end = span.end

    def span_text(self, span: Span) -> str:
        return self.text[span.start : span.end]

    def to_json(self) -> dict[str, Any]:
        return {"text": self.text, "spans": [s.to_json() for s in self.spans]}

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "AnnotatedNarrative":
        try:
            spans = tuple(
                Span(
                    start=int(s["start"]),
                    end=int(s["end"]),
                    category=str(s["category"]),
                    value=s.get("value"),
                    action=s.get("action"),
                )
                for s in doc.get("spans", ())
            )
            return cls(text=str(doc["text"]), spans=spans)
        except (KeyError, TypeError, ValueError) as exc:
            raise NarrativeError(f"malformed narrative document: {exc}") from None


# ---------------------------------------------------------------------------
# actions


@dataclass(frozen=True)
class Action:
    """One rewrite rule: what happens to every span of a category.

    kind selects the rule; the parameter fields only apply to some kinds.
    band: width (decade-style bands anchored at 0) or explicit cuts, with
    labels "lo-hi" naming the band's bounds and ">=lo" for the open top.
    generalize: a term-to-replacement mapping supplied by the caller.
    """

    kind: str
    width: int | None = None
    cuts: tuple[int, ...] | None = None
    labels: tuple[str, ...] | None = None
    mapping: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ACTION_KINDS:
            raise NarrativeError(f"unknown action kind {self.kind!r}")
        if self.kind == BAND:
            if (self.width is None) == (self.cuts is None):
                raise NarrativeError("band action takes exactly one of width= or cuts=")
            if self.width is not None and self.width < 1:
                raise NarrativeError("band width must be a positive integer")
            if self.cuts is not None:
                cuts = tuple(int(c) for c in self.cuts)
                if not cuts or any(b <= a for a, b in zip(cuts, cuts[1:])):
                    raise NarrativeError("band cuts must be non-empty and increasing")
                object.__setattr__(self, "cuts", cuts)
                if self.labels is not None:
                    labels = tuple(str(l) for l in self.labels)
                    if len(labels) != len(cuts):
                        raise NarrativeError(
                            f"{len(cuts)} bands but {len(labels)} labels supplied"
                        )
                    object.__setattr__(self, "labels", labels)
        if self.kind == GENERALIZE and not self.mapping:
            raise NarrativeError("generalize action needs a term mapping")
        object.__setattr__(self, "mapping", dict(self.mapping))

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind}
        if self.width is not None:
            doc["width"] = self.width
        if self.cuts is not None:
            doc["cuts"] = list(self.cuts)
        if self.labels is not None:
            doc["labels"] = list(self.labels)
        if self.mapping:
            doc["mapping"] = dict(self.mapping)
        return doc

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "Action":
        if not isinstance(doc, Mapping) or "kind" not in doc:
            raise NarrativeError(f"malformed action document: {doc!r}")
        return cls(
            kind=str(doc["kind"]),
            width=doc.get("width"),
            cuts=tuple(doc["cuts"]) if doc.get("cuts") is not None else None,
            labels=tuple(doc["labels"]) if doc.get("labels") is not None else None,
            mapping=doc.get("mapping") or {},
        )


def _band_label(value: int, action: Action) -> str:
    if action.width is not None:
        lo = (value // action.width) * action.width
        return f"{lo}-{lo + action.width}"
    cuts = action.cuts or ()
    if value < cuts[0]:
        raise NarrativeError(f"value {value} below the first band cut {cuts[0]}")
    if action.labels is not None:
        labels = action.labels
    else:
        labels = tuple(
            f"{lo}-{hi}" for lo, hi in zip(cuts, cuts[1:])
        ) + (f">={cuts[-1]}",)
    for i, nxt in enumerate(cuts[1:]):
        if value < nxt:
            return labels[i]
    return labels[-1]


@dataclass(frozen=True)
class NarrativePolicy:
    """One action per category, plus the shared recoding context.

    The pseudonym assigner and the per-subject date offsets are the same
    objects the tabular transforms use, so a subject keeps one surrogate id
    and one date shift across every artifact produced in a session.
    """

    actions: Mapping[str, Action]
    glyph: str = DEFAULT_GLYPH
    pseudonyms: PseudonymAssigner | None = None
    date_offsets: FixedDateOffset | SubjectOffsetMap | None = None

    def __post_init__(self) -> None:
        actions = dict(self.actions)
        for category in CATEGORIES:
            actions.setdefault(category, Action(RETAIN))
        unknown = sorted(set(actions) - set(CATEGORIES))
        if unknown:
            raise NarrativeError(f"actions for unknown categories: {', '.join(unknown)}")
        object.__setattr__(self, "actions", actions)
        if not self.glyph:
            raise NarrativeError("redaction glyph must be non-empty")

    def action_for(self, span: Span) -> Action:
        if span.action is not None:
            return Action(span.action)
        return self.actions[span.category]


def redact_all_policy(glyph: str = DEFAULT_GLYPH) -> NarrativePolicy:
    """The blanket fallback: every annotated span becomes the glyph."""
    return NarrativePolicy(
        actions={category: Action(REDACT) for category in CATEGORIES}, glyph=glyph
    )


def policy_from_json(doc: Mapping[str, Any]) -> NarrativePolicy:
    """Build a policy from its JSON form.

    {"actions": {category: action...}, "glyph"?, "seed"?,
     "offset"?: {"mode": "fixed", "days": n} |
                {"mode": "per-subject", "low"?, "high"?}}

    The seed feeds both pseudonym assignment and per-subject offsets.
    """
    try:
        actions = {
            str(category): Action.from_json(action)
            for category, action in (doc.get("actions") or {}).items()
        }
    except AttributeError as exc:
        raise NarrativeError(f"malformed policy document: {exc}") from None
    seed = doc.get("seed")
    pseudonyms = None
    if any(a.kind == RECODE for a in actions.values()):
        if seed is None:
            raise NarrativeError("policy uses recode but supplies no seed")
        pseudonyms = PseudonymAssigner(int(seed))
    offsets: FixedDateOffset | SubjectOffsetMap | None = None
    offset_doc = doc.get("offset")
    if any(a.kind == OFFSET_DATE for a in actions.values()):
        if offset_doc is None:
            offset_doc = {"mode": "per-subject"}
        mode = offset_doc.get("mode", "per-subject")
        if mode == "fixed":
            if "days" not in offset_doc:
                raise NarrativeError("fixed date offset needs a days value")
            offsets = FixedDateOffset(int(offset_doc["days"]))
        elif mode == "per-subject":
            if seed is None:
                raise NarrativeError("per-subject date offsets need a seed")
            offsets = SubjectOffsetMap(
                int(seed),
                low=int(offset_doc.get("low", -365)),
                high=int(offset_doc.get("high", 365)),
            )
        else:
            raise NarrativeError(f"unknown offset mode {mode!r}")
    return NarrativePolicy(
        actions=actions,
        glyph=str(doc.get("glyph") or DEFAULT_GLYPH),
        pseudonyms=pseudonyms,
        date_offsets=offsets,
    )


def policy_from_file(path: str) -> NarrativePolicy:
    with open(path, encoding="utf-8") as fh:
        return policy_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# application


@dataclass(frozen=True)
class RewriteRecord:
    """What happened to one span, in original-text coordinates."""

    start: int
    end: int
    category: str
    action: str
    original: str
    replacement: str

    def to_json(self) -> dict[str, Any]:
        return {
            "start": self.start,
            "end": self.end,
            "category": self.category,
            "action": self.action,
            "original": self.original,
            "replacement": self.replacement,
        }


@dataclass(frozen=True)
class NarrativeResult:
    text: str
    log: tuple[RewriteRecord, ...]

    def to_json(self) -> dict[str, Any]:
        return {"text": self.text, "log": [r.to_json() for r in self.log]}


def _span_date(narrative: AnnotatedNarrative, span: Span) -> date:
    raw = span.value if span.value is not None else narrative.span_text(span)
    if isinstance(raw, date):
        return raw
    try:
        return parse_date(str(raw))
    except ValueError:
        raise NarrativeError(
            f"date span [{span.start}, {span.end}) has no parseable value: "
            f"{narrative.span_text(span)!r}"
        ) from None


def _span_int(narrative: AnnotatedNarrative, span: Span) -> int:
    raw = span.value if span.value is not None else narrative.span_text(span)
    try:
        return int(str(raw))
    except ValueError:
        raise NarrativeError(
            f"span [{span.start}, {span.end}) has no integer value to band: "
            f"{narrative.span_text(span)!r}"
        ) from None


def _subject_key(narrative: AnnotatedNarrative) -> str:
    for span in narrative.spans:
        if span.category == "subject-id":
            raw = span.value if span.value is not None else narrative.span_text(span)
            return str(raw)
    return ""


def apply_narrative_policy(
    narrative: AnnotatedNarrative, policy: NarrativePolicy
) -> NarrativeResult:
    """Rewrite every span per the policy; returns new text plus a full log.

    Identical subject ids receive identical pseudonyms, and all date spans
    shift by the one offset belonging to the narrative's subject, so
    within-document day differences survive exactly.
    """
    if policy.pseudonyms is not None:
        policy.pseudonyms.register_forbidden(
            str(s.value) if s.value is not None else narrative.span_text(s)
            for s in narrative.spans
            if s.category == "subject-id"
        )
    subject = _subject_key(narrative)
    pieces: list[str] = []
    log: list[RewriteRecord] = []
    cursor = 0
    for span in narrative.spans:
        pieces.append(narrative.text[cursor : span.start])
        original = narrative.span_text(span)
        action = policy.action_for(span)
        replacement = _rewrite(narrative, span, original, action, policy, subject)
        pieces.append(replacement)
        cursor = span.end
        log.append(
            RewriteRecord(
                start=span.start,
                end=span.end,
                category=span.category,
                action=action.kind,
                original=original,
                replacement=replacement,
            )
        )
    pieces.append(narrative.text[cursor:])
    return NarrativeResult(text="".join(pieces), log=tuple(log))


def _rewrite(
    narrative: AnnotatedNarrative,
    span: Span,
    original: str,
    action: Action,
    policy: NarrativePolicy,
    subject: str,
) -> str:
    if action.kind == RETAIN:
        return original
    if action.kind == DROP:
        return ""
    if action.kind == REDACT:
        # word-by-word, so sentence structure stays readable while the
        # glyph count still leaks nothing beyond the rough word count
        words = original.split()
        return " ".join(policy.glyph for _ in words) if words else policy.glyph
    if action.kind == RECODE:
        if policy.pseudonyms is None:
            raise NarrativeError("recode action requires a pseudonym context (seed)")
        raw = span.value if span.value is not None else original
        return policy.pseudonyms.assign(str(raw))
    if action.kind == BAND:
        return _band_label(_span_int(narrative, span), action)
    if action.kind == GENERALIZE:
        raw = str(span.value) if span.value is not None else original
        try:
            return action.mapping[raw]
        except KeyError:
            raise NarrativeError(
                f"generalize mapping has no entry for {raw!r} "
                f"(span [{span.start}, {span.end}))"
            ) from None
    if action.kind == OFFSET_DATE:
        if policy.date_offsets is None:
            raise NarrativeError("offset-date action requires a date-offset context")
        parsed = _span_date(narrative, span)
        shifted = parsed + timedelta(days=policy.date_offsets.offset_for(subject))
        style = "dd/Mon/yyyy" if looks_like_dmy(original) else "iso"
        return format_date(shifted, style=style)
    raise NarrativeError(f"unknown action kind {action.kind!r}")
