"""Attack-scenario risk arithmetic and release-policy presets.

Overall re-identification risk is modelled as the sum over attack types of
P(attack) * P(re-identification | attack). A single combined number hides
too much (two very different scenarios can share one value), so every
result carries the per-scenario terms and a certain-disclosure flag for
scenarios where success is guaranteed once attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .model import DeidentError

ATTACK_TYPES = (
    "deliberate",
    "inadvertent",
    "breach",
    "demonstration",
    "nosy-neighbour",
)

OPEN_RELEASE_ENV = "open-release"
CONTROLLED_ENV = "controlled"


class AttackModelError(DeidentError):
    """Invalid scenario or policy parameters."""


def _check_probability(value: float, what: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise AttackModelError(f"{what} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class AttackScenario:
    """One attack type with its attempt and success probabilities."""

    label: str
    attack_type: str
    p_attack: float
    p_reid_given_attack: float

    def __post_init__(self) -> None:
        if self.attack_type not in ATTACK_TYPES:
            raise AttackModelError(
                f"unknown attack type {self.attack_type!r}; "
                f"expected one of {', '.join(ATTACK_TYPES)}"
            )
        object.__setattr__(
            self, "p_attack", _check_probability(self.p_attack, "p_attack")
        )
        object.__setattr__(
            self,
            "p_reid_given_attack",
            _check_probability(self.p_reid_given_attack, "p_reid_given_attack"),
        )

    @property
    def term(self) -> float:
        return self.p_attack * self.p_reid_given_attack

    @property
    def certain_disclosure(self) -> bool:
        """True when success is certain once the attack is attempted."""
        return self.p_reid_given_attack == 1.0

    def to_json(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "attack_type": self.attack_type,
            "p_attack": self.p_attack,
            "p_reid_given_attack": self.p_reid_given_attack,
            "term": self.term,
            "certain_disclosure": self.certain_disclosure,
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "AttackScenario":
        try:
            return cls(
                label=str(doc["label"]),
                attack_type=str(doc["attack_type"]),
                p_attack=float(doc["p_attack"]),
                p_reid_given_attack=float(doc["p_reid_given_attack"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise AttackModelError(f"malformed scenario document: {exc}") from None


def scenarios_from_json(docs: Sequence[Mapping[str, Any]]) -> tuple[AttackScenario, ...]:
    return tuple(AttackScenario.from_json(doc) for doc in docs)


@dataclass(frozen=True)
class RiskBreakdown:
    """Total risk plus the per-scenario terms it was summed from.

    Hybrid sum-of-products strategies are fragile, so the breakdown is
    never collapsed away: callers always see each term and which scenarios
    would disclose with certainty if attempted.
    """

    scenarios: tuple[AttackScenario, ...]
    total: float

    @property
    def any_certain_disclosure(self) -> bool:
        return any(s.certain_disclosure for s in self.scenarios)

    def to_json(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "certain_disclosure": self.any_certain_disclosure,
            "scenarios": [s.to_json() for s in self.scenarios],
        }


def combined_risk(scenarios: Iterable[AttackScenario]) -> RiskBreakdown:
    """Sum p*q over scenarios. Labels must be unique."""
    scenarios = tuple(scenarios)
    labels = [s.label for s in scenarios]
    if len(set(labels)) != len(labels):
        seen = sorted({l for l in labels if labels.count(l) > 1})
        raise AttackModelError(f"duplicate scenario labels: {', '.join(seen)}")
    return RiskBreakdown(scenarios=scenarios, total=sum(s.term for s in scenarios))


def naive_reciprocal(class_size: int) -> float:
    """Optional success-probability estimator q = 1/class_size.

    This assumes the attacker picks uniformly inside the matching
    equivalence class, a specific behaviour real attackers need not
    follow. It is offered as an explicit opt-in, labelled estimate and is
    never applied anywhere by default.
    """
    if class_size < 1:
        raise AttackModelError("class size must be a positive integer")
    return float(Fraction(1, int(class_size)))


NAIVE_RECIPROCAL_LABEL = "naive-reciprocal"


# ---------------------------------------------------------------------------
# release policies


@dataclass(frozen=True)
class PolicyThresholds:
    """Risk ceiling and the class-size floor it implies for one environment."""

    name: str
    risk_threshold: float
    min_class_size: int
    assumed_p_attack: float
    environment: str

    def __post_init__(self) -> None:
        if not 0.0 < self.risk_threshold <= 1.0:
            raise AttackModelError("risk_threshold must lie in (0, 1]")
        if self.min_class_size < 1:
            raise AttackModelError("min_class_size must be at least 1")
        _check_probability(self.assumed_p_attack, "assumed_p_attack")
        if self.environment not in (OPEN_RELEASE_ENV, CONTROLLED_ENV):
            raise AttackModelError(f"unknown environment {self.environment!r}")

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "risk_threshold": self.risk_threshold,
            "min_class_size": self.min_class_size,
            "assumed_p_attack": self.assumed_p_attack,
            "environment": self.environment,
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "PolicyThresholds":
        try:
            return cls(
                name=str(doc["name"]),
                risk_threshold=float(doc["risk_threshold"]),
                min_class_size=int(doc["min_class_size"]),
                assumed_p_attack=float(doc["assumed_p_attack"]),
                environment=str(doc["environment"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise AttackModelError(f"malformed policy document: {exc}") from None


# Public, unrestricted release: an attack attempt must be assumed certain,
# and the regulator-convention ceiling of 0.09 requires classes of 11.
OPEN_RELEASE = PolicyThresholds(
    name="open-release",
    risk_threshold=0.09,
    min_class_size=11,
    assumed_p_attack=1.0,
    environment=OPEN_RELEASE_ENV,
)

# Contracted access in a controlled environment: the attempt probability is
# driven toward zero by contractual and technical controls, so a higher
# residual-risk ceiling (hence a smaller class-size floor) is acceptable.
CONTROLLED = PolicyThresholds(
    name="controlled",
    risk_threshold=0.2,
    min_class_size=5,
    assumed_p_attack=0.05,
    environment=CONTROLLED_ENV,
)

PRESETS: Mapping[str, PolicyThresholds] = {
    OPEN_RELEASE.name: OPEN_RELEASE,
    CONTROLLED.name: CONTROLLED,
}


def preset(name: str) -> PolicyThresholds:
    try:
        return PRESETS[name]
    except KeyError:
        raise AttackModelError(
            f"unknown policy preset {name!r}; expected one of "
            f"{', '.join(sorted(PRESETS))}"
        ) from None


GENERIC_CONVENTION = "generic"
REGULATOR_CONVENTION = "regulator-preset"


def required_min_class_size(threshold: float, convention: str = GENERIC_CONVENTION) -> int:
    """Smallest equivalence-class size consistent with a risk threshold.

    generic: smallest k with 1/k <= threshold, i.e. ceiling(1/threshold).
    regulator-preset: the convention used by health regulators, under
    which 1/k is rounded to two decimals before comparing, so 0.09 maps
    to class size 11 (1/11 rounds to 0.09) rather than 12.
    """
    if not 0.0 < threshold <= 1.0:
        raise AttackModelError("threshold must lie in (0, 1]")
    exact = Fraction(str(threshold))
    if convention == GENERIC_CONVENTION:
        return -((-exact.denominator) // exact.numerator)
    if convention == REGULATOR_CONVENTION:
        k = 1
        while round(1.0 / k, 2) > threshold:
            k += 1
        return k
    raise AttackModelError(
        f"unknown convention {convention!r}; expected "
        f"{GENERIC_CONVENTION!r} or {REGULATOR_CONVENTION!r}"
    )


def classify_environment(
    data_use_agreement: bool = False,
    secure_enclave: bool = False,
    download_blocked: bool = False,
    identity_verified: bool = False,
) -> PolicyThresholds:
    """Map access controls to a release policy, conservatively.

    Only the full set of controls earns the controlled preset; anything
    less is treated as an open release.
    """
    if data_use_agreement and secure_enclave and download_blocked and identity_verified:
        return CONTROLLED
    return OPEN_RELEASE
