#!/usr/bin/env python3
"""Pretty-print the subgroup F1 table from an audit_report.json.

Usage: python3 scripts/summarize_report.py path/to/audit_report.json
"""

import json
import sys


def main() -> None:
    if len(sys.argv) != 2:
        sys.exit(__doc__.strip())
    report = json.loads(open(sys.argv[1]).read())
    print(f"seed={report['run']['seed']}  config_hash={report['run']['config_hash']}")
    for question, block in report["questions"].items():
        for pipeline, result in block["pipelines"].items():
            print(f"\n{question} / {pipeline} ({result['model_family']})")
            for sub in result["subgroups"]:
                ref = sub.get("paper_reference_f1")
                suffix = f"  [reference {ref}]" if ref is not None else ""
                print(
                    f"  {sub['minority_name']:>18s}  "
                    f"F1={sub['f1_subgroup']:.3f}  n={sub['n_subgroup']}{suffix}"
                )


if __name__ == "__main__":
    main()
