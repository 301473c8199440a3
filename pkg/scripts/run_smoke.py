#!/usr/bin/env python3
"""Fast end-to-end smoke run on a tiny synthetic population.

Usage: python3 scripts/run_smoke.py [out_dir]
"""

import sys
from pathlib import Path

from fairdyn import load_config, run_audit

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    config = load_config(ROOT / "configs" / "smoke.toml")
    if len(sys.argv) > 1:
        config.out_dir = sys.argv[1]
    report = run_audit(config)
    print(f"wrote {config.out_dir}/audit_report.json")
    for question, block in report["questions"].items():
        for pipeline, result in block["pipelines"].items():
            general = next(
                s for s in result["subgroups"] if s["minority_name"] == "general"
            )
            print(f"{question:16s} {pipeline:9s} test F1 = {general['f1_subgroup']:.3f}")


if __name__ == "__main__":
    main()
