from datetime import date

import pytest

from deident.model import MISSING, AttributeSchema, Dataset, Kind, Role


def make_dataset(
    columns,
    roles=None,
    kinds=None,
    hierarchies=None,
    domains=None,
    provenance="",
):
    """Build a small dataset column-wise, inferring kinds from the values.

    Every attribute defaults to the quasi-identifier role so metric tests
    can pass bare columns; override per name where it matters.
    """
    roles = roles or {}
    kinds = kinds or {}
    hierarchies = hierarchies or {}
    domains = domains or {}
    names = list(columns)
    lengths = {len(v) for v in columns.values()}
    assert len(lengths) <= 1, "all columns must have equal length"
    schema = []
    for name in names:
        kind = kinds.get(name)
        if kind is None:
            sample = next(
                (v for v in columns[name] if v is not MISSING and v is not None), ""
            )
            if isinstance(sample, bool):
                kind = Kind.CATEGORICAL
            elif isinstance(sample, int):
                kind = Kind.INTEGER
            elif isinstance(sample, date):
                kind = Kind.DATE
            else:
                kind = Kind.CATEGORICAL
        schema.append(
            AttributeSchema(
                name,
                roles.get(name, Role.QUASI),
                kind,
                hierarchy=hierarchies.get(name),
                domain=domains.get(name),
            )
        )
    rows = list(zip(*(columns[n] for n in names))) if names else []
    return Dataset(schema, rows, provenance=provenance)


@pytest.fixture(scope="session")
def raw_cohort():
    from deident.demo import demo_dataset

    return demo_dataset()


@pytest.fixture(scope="session")
def released_state():
    """The demo cohort after its plan: (dataset, ledger)."""
    from deident.demo import demo_released

    return demo_released()
