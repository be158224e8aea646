"""Command-line interface: assess, apply, whatif, narrative, table-audit,
report, and serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Sequence

from .attack import PolicyThresholds, preset
from .metrics import DISTANCE_KINDS, TOTAL_VARIATION
from .model import Dataset, DeidentError, Role, hierarchy_from_json, load_dataset, save_dataset, schema_from_json
from .narrative import AnnotatedNarrative, apply_narrative_policy, policy_from_file
from .pipeline import (
    AnonymizationPlan,
    SessionRegistry,
    apply_plan,
    evaluate,
    plan_from_file,
    what_if,
)
from .tables import audit_table, merge_table_categories, table_from_file
from .transforms import TransformStep


def _print_json(doc: Any) -> None:
    print(json.dumps(doc, indent=2, ensure_ascii=False))


def _load_policy(text: str) -> PolicyThresholds:
    if text.endswith(".json") or os.path.sep in text:
        with open(text, encoding="utf-8") as fh:
            return PolicyThresholds.from_json(json.load(fh))
    return preset(text)


def _load_schema(args: argparse.Namespace):
    hierarchies = None
    if getattr(args, "hierarchies", None):
        with open(args.hierarchies, encoding="utf-8") as fh:
            hierarchies = {
                name: hierarchy_from_json(doc)
                for name, doc in json.load(fh).items()
            }
    with open(args.schema, encoding="utf-8") as fh:
        return schema_from_json(json.load(fh), hierarchies=hierarchies)


def _load_data(args: argparse.Namespace) -> Dataset:
    return load_dataset(args.data, _load_schema(args), provenance=args.data)


def _quasi_for(args: argparse.Namespace, dataset: Dataset) -> list[str]:
    if getattr(args, "quasi", None):
        return list(args.quasi)
    quasi = [a.name for a in dataset.schema if a.role is Role.QUASI]
    if not quasi:
        raise DeidentError(
            "the schema declares no quasi-identifier attributes; "
            "pass --quasi to name them explicitly"
        )
    return quasi


def _load_step(text: str) -> TransformStep:
    if text.lstrip().startswith("{"):
        return TransformStep.from_json(json.loads(text))
    with open(text, encoding="utf-8") as fh:
        return TransformStep.from_json(json.load(fh))


def _cmd_assess(args: argparse.Namespace) -> int:
    dataset = _load_data(args)
    policy = _load_policy(args.policy)
    report = evaluate(
        dataset,
        _quasi_for(args, dataset),
        policy,
        tau=args.tau,
        sensitive=args.sensitive,
        l=args.l,
        t=args.t,
        distance_kind=args.distance,
    )
    _print_json(report.to_json())
    return 0 if report.passed else 1


def _cmd_apply(args: argparse.Namespace) -> int:
    dataset = _load_data(args)
    plan = plan_from_file(args.plan)
    result, ledger = apply_plan(dataset, plan)
    save_dataset(result, args.out)
    if args.ledger:
        with open(args.ledger, "w", encoding="utf-8") as fh:
            json.dump(ledger.to_json(), fh, indent=2, ensure_ascii=False)
    print(
        f"applied {len(ledger.entries)} step(s): "
        f"{dataset.record_count} -> {result.record_count} records, "
        f"written to {args.out}"
    )
    return 0


def _cmd_whatif(args: argparse.Namespace) -> int:
    dataset = _load_data(args)
    original = dataset
    if args.plan:
        plan = plan_from_file(args.plan)
        dataset, _ = apply_plan(dataset, plan)
        quasi = list(plan.quasi_set)
        policy = plan.policy
        tau = plan.tau
    else:
        quasi = _quasi_for(args, dataset)
        policy = _load_policy(args.policy)
        tau = args.tau
    result = what_if(
        dataset,
        _load_step(args.candidate),
        quasi,
        policy,
        tau=tau,
        original=original,
    )
    _print_json(result.to_json())
    return 0


def _cmd_narrative(args: argparse.Namespace) -> int:
    with open(args.narrative, encoding="utf-8") as fh:
        narrative = AnnotatedNarrative.from_json(json.load(fh))
    policy = policy_from_file(args.policy)
    result = apply_narrative_policy(narrative, policy)
    _print_json(result.to_json())
    return 0


def _cmd_table_audit(args: argparse.Namespace) -> int:
    table = table_from_file(args.table)
    audit = audit_table(table, args.threshold)
    out: dict[str, Any] = {"audit": audit.to_json()}
    if args.merge:
        with open(args.merge, encoding="utf-8") as fh:
            grouping = json.load(fh)
        merged = merge_table_categories(table, grouping)
        out["merged"] = merged.to_json()
        out["post_merge_audit"] = audit_table(merged, args.threshold).to_json()
    _print_json(out)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    with open(args.ledger, encoding="utf-8") as fh:
        entries = json.load(fh)
    if not entries:
        print("empty ledger")
        return 0
    for entry in entries:
        index = entry.get("index", "?")
        description = entry.get("description", "")
        print(f"step {index}: {description}")
        for side in ("before", "after"):
            report = entry.get(side)
            if not report:
                print(f"  {side}: no assessable quasi-identifiers")
                continue
            metrics = report["metrics"]
            print(
                f"  {side}: records {report['record_count']}, "
                f"classes {report['class_count']}, "
                f"min class {report['min_class_size']}, "
                f"small-class {metrics['small_class_fraction']['fraction']}, "
                f"1/avg {metrics['inverse_average']['fraction']}, "
                f"1/min {metrics['inverse_min']['fraction']}, "
                f"policy {'pass' if report['passed'] else 'FAIL'}"
            )
        utility = entry.get("utility_after")
        if utility:
            print(
                f"  utility: attributes {utility['attribute_retention']:.3f}, "
                f"granularity {utility['granularity']:.3f}, "
                f"records {utility['record_retention']:.3f}"
            )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    registry = SessionRegistry()
    if args.demo:
        from .demo import demo_plan, demo_released

        released, _ = demo_released()
        plan = demo_plan()
        session = registry.create(
            released, plan.quasi_set, plan.policy, tau=plan.tau, label="demo"
        )
        print(f"demo session: {session.id}")
    app = create_app(registry)
    host = args.host or os.environ.get("DEIDENT_HOST", "127.0.0.1")
    port = args.port or int(os.environ.get("DEIDENT_PORT", "8000"))
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deident",
        description=(
            "Re-identification risk assessment and de-identification for "
            "tabular data, narratives, and summary tables."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--data", required=True, help="delimited dataset file")
        p.add_argument("--schema", required=True, help="attribute schema JSON")
        p.add_argument(
            "--hierarchies", help="JSON registry of named generalization hierarchies"
        )

    def add_policy_args(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--policy",
            default="open-release",
            help="policy preset name or JSON file (default open-release)",
        )
        p.add_argument("--tau", type=int, default=5, help="small-class threshold")
        p.add_argument(
            "--quasi",
            action="append",
            help="quasi-identifier attribute (repeatable; default: schema roles)",
        )

    p_assess = sub.add_parser("assess", help="risk-assess a dataset against a policy")
    add_data_args(p_assess)
    add_policy_args(p_assess)
    p_assess.add_argument("--sensitive", help="sensitive attribute for l/t checks")
    p_assess.add_argument("--l", type=int, help="distinct l-diversity level")
    p_assess.add_argument("--t", type=float, help="t-closeness bound")
    p_assess.add_argument(
        "--distance",
        default=TOTAL_VARIATION,
        choices=DISTANCE_KINDS,
        help="t-closeness distance kind",
    )
    p_assess.set_defaults(func=_cmd_assess)

    p_apply = sub.add_parser("apply", help="run a plan and write the result")
    add_data_args(p_apply)
    p_apply.add_argument("--plan", required=True, help="plan JSON file")
    p_apply.add_argument("--out", required=True, help="output dataset file")
    p_apply.add_argument("--ledger", help="write the audit ledger JSON here")
    p_apply.set_defaults(func=_cmd_apply)

    p_whatif = sub.add_parser(
        "whatif", help="evaluate a candidate step without applying it"
    )
    add_data_args(p_whatif)
    add_policy_args(p_whatif)
    p_whatif.add_argument("--plan", help="plan JSON to apply first (optional)")
    p_whatif.add_argument(
        "--candidate", required=True, help="candidate step JSON file or inline JSON"
    )
    p_whatif.set_defaults(func=_cmd_whatif)

    p_narrative = sub.add_parser(
        "narrative", help="anonymize an annotated narrative under a policy"
    )
    p_narrative.add_argument("--narrative", required=True, help="annotated narrative JSON")
    p_narrative.add_argument("--policy", required=True, help="narrative policy JSON")
    p_narrative.set_defaults(func=_cmd_narrative)

    p_table = sub.add_parser(
        "table-audit", help="audit a summary table for small-cell disclosure"
    )
    p_table.add_argument("--table", required=True, help="table JSON or delimited text")
    p_table.add_argument("--threshold", type=int, default=5, help="small-cell threshold")
    p_table.add_argument("--merge", help="column grouping JSON to apply and re-audit")
    p_table.set_defaults(func=_cmd_table_audit)

    p_report = sub.add_parser("report", help="summarize an audit ledger")
    p_report.add_argument("--ledger", required=True, help="ledger JSON file")
    p_report.set_defaults(func=_cmd_report)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", help="bind address (or DEIDENT_HOST)")
    p_serve.add_argument("--port", type=int, help="bind port (or DEIDENT_PORT)")
    p_serve.add_argument(
        "--demo", action="store_true", help="preload a session with the demo cohort"
    )
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DeidentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
