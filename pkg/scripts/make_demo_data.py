"""Write the bundled demo fixtures out as files for CLI experiments.

Produces a directory of inputs every `deident` subcommand can be pointed
at: the raw cohort and its schema, the anonymization plan, the released
output with its ledger, the annotated narrative with a rewrite policy,
and the summary table with a column grouping that clears its audit flags.
"""

import argparse
import json
from pathlib import Path

from deident.demo import (
    TABLE_MERGE,
    demo_dataset,
    demo_narrative,
    demo_narrative_policy,
    demo_plan,
    demo_released,
    demo_table,
)
from deident.model import save_dataset, schema_to_json


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default="demo-data",
        help="directory to write the fixture files into (default: demo-data)",
    )
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cohort = demo_dataset()
    save_dataset(cohort, out / "baseline.csv")
    _write_json(out / "schema.json", schema_to_json(cohort.schema))
    _write_json(out / "plan.json", demo_plan().to_json())

    released, ledger = demo_released()
    save_dataset(released, out / "released.csv")
    _write_json(out / "released_schema.json", schema_to_json(released.schema))
    _write_json(out / "ledger.json", ledger.to_json())

    _write_json(out / "narrative.json", demo_narrative().to_json())
    policy = demo_narrative_policy()
    _write_json(
        out / "narrative_policy.json",
        {
            "actions": {
                category: action.to_json()
                for category, action in policy.actions.items()
            },
            "seed": 7,
            "offset": {"mode": "per-subject"},
        },
    )

    _write_json(out / "table.json", demo_table().to_json())
    _write_json(out / "table_merge.json", TABLE_MERGE)

    for name in sorted(p.name for p in out.iterdir()):
        print(f"wrote {out / name}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
