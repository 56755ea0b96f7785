"""Command-line front-end: runs the verification suites and writes
machine-readable JSON reports.

Exit status is 0 iff every assertion in the run passed; the report always
lands on disk (failures carry exact rational witnesses for offline replay).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import suites
from .sewing import config_from_toml, validate

REPORT_SCHEMA = 1


def _write_report(path, payload):
    payload = {"schema": REPORT_SCHEMA, "generated_unix": int(time.time()), **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, default=str)
    return path


def _finish(report, args):
    failed = sum(
        1
        for s in report["suites"]
        for a in s["assertions"]
        if not a["ok"]
    )
    report["failed_assertions"] = failed
    path = _write_report(args.report, report)
    for s in report["suites"]:
        for a in s["assertions"]:
            print(("PASS " if a["ok"] else "FAIL "), a["name"], sep="")
    print(f"report: {path} ({failed} failed assertions)")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="voawb",
        description="Exact verification workbench for the vertex-algebra double complex",
    )
    parser.add_argument("--report", default="voawb-report.json", help="JSON report path")
    parser.add_argument("--seed", type=int, default=7)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-complex", help="delta^2 = 0 suites")
    p.add_argument("--cutoff", type=int, default=4)
    p.add_argument("--ceiling", type=int, default=1)
    p.add_argument("--count", type=int, default=20)

    p = sub.add_parser("check-leibniz", help="the displayed Leibniz law per eps coefficient")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--pairs", type=int, default=10)

    p = sub.add_parser("check-properties", help="validators, locality, S_n, form, nilpotency")
    p.add_argument("--max-weight", type=int, default=5)

    p = sub.add_parser("cohomology", help="truncated cohomology ranks")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", default="2")
    p.add_argument("--cutoff", type=int, default=3)
    p.add_argument("--ceiling", type=int, default=1)

    p = sub.add_parser("classes", help="class representatives, pokaz, basis independence")
    p.add_argument("--order", type=int, default=1)

    p = sub.add_parser("lie-table", help="continual Lie algebra bracket table on a solved triple")
    p.add_argument("--order", type=int, default=1)

    p = sub.add_parser("sew-validate", help="validate a sewing TOML config")
    p.add_argument("config", nargs="?", help="TOML file; omitted runs the fixture suite")

    args = parser.parse_args(argv)

    if args.command == "check-complex":
        report = {
            "command": "check-complex",
            "config": {"cutoff": args.cutoff, "ceiling": args.ceiling,
                       "seed": args.seed, "count": args.count},
            "suites": [
                suites.suite_chain_complex(
                    cutoff=args.cutoff, ceiling=args.ceiling, seed=args.seed,
                    count=args.count,
                )
            ],
        }
        return _finish(report, args)

    if args.command == "check-leibniz":
        report = {
            "command": "check-leibniz",
            "config": {"order": args.order, "pairs": args.pairs, "seed": args.seed},
            "suites": [
                suites.suite_leibniz(order=args.order, pairs=args.pairs, seed=args.seed)
            ],
        }
        return _finish(report, args)

    if args.command == "check-properties":
        report = {
            "command": "check-properties",
            "config": {"max_weight": args.max_weight, "seed": args.seed},
            "suites": [
                suites.suite_validators(),
                suites.suite_sn_stability(),
                suites.suite_form_properties(max_weight=args.max_weight),
                suites.suite_nilpotency(seed=args.seed),
                suites.suite_correlator_oracle(),
            ],
        }
        return _finish(report, args)

    if args.command == "cohomology":
        from .differential import truncated_cohomology

        half = str(args.m) in ("1/2", "0.5", "half")
        if half:
            single = truncated_cohomology(
                args.n, "1/2", cutoff=args.cutoff, ceiling=args.ceiling, half_slot=True
            )
        else:
            single = truncated_cohomology(
                args.n, int(args.m), cutoff=args.cutoff, ceiling=args.ceiling
            )
        report = {
            "command": "cohomology",
            "config": {"n": args.n, "m": str(args.m), "cutoff": args.cutoff},
            "rank_report": single,
            "suites": [
                {
                    "suite": f"cohomology({args.n},{args.m})",
                    "ok": single["rank_nullity_ok"] and single["image_in_kernel"],
                    "assertions": [
                        {"name": "rank-nullity", "ok": single["rank_nullity_ok"]},
                        {"name": "image inside kernel", "ok": single["image_in_kernel"]},
                    ],
                    "seconds": single["seconds"],
                }
            ],
        }
        return _finish(report, args)

    if args.command == "classes":
        report = {
            "command": "classes",
            "config": {"order": args.order, "seed": args.seed},
            "suites": [
                suites.suite_invariants(order=args.order),
                suites.suite_basis_independence(order=min(args.order + 2, 3)),
            ],
        }
        return _finish(report, args)

    if args.command == "lie-table":
        report = {
            "command": "lie-table",
            "config": {"order": args.order, "seed": args.seed},
            "suites": [suites.suite_invariants(order=args.order)],
        }
        return _finish(report, args)

    if args.command == "sew-validate":
        if args.config:
            cfg = config_from_toml(args.config)
            rep = validate(cfg)
            report = {
                "command": "sew-validate",
                "config": {"path": args.config},
                "suites": [
                    {
                        "suite": "sew-validate",
                        "ok": rep["valid"],
                        "assertions": [
                            {
                                "name": f"sewing domain inequalities for {args.config}",
                                "ok": rep["valid"],
                                "witness": rep["violations"],
                            }
                        ],
                        "seconds": 0.0,
                    }
                ],
            }
        else:
            report = {
                "command": "sew-validate",
                "config": {},
                "suites": [suites.suite_sewing()],
            }
        return _finish(report, args)

    parser.error("unknown command")
    return 2


if __name__ == "__main__":
    sys.exit(main())
