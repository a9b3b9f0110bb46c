"""Rewrite tests/golden/toy_wingbox_history.json from the current code.

Only run this after a deliberate change to the surrogate, optimizer or
loop; the golden file exists to catch accidental ones.
"""
import json
from pathlib import Path

from panelize.fixtures import toy_wingbox
from panelize.globalloop import run_global_local

OUT = Path(__file__).resolve().parents[1] / "tests" / "golden" / "toy_wingbox_history.json"


def main():
    specs, provider, cfg = toy_wingbox()
    result = run_global_local(specs, provider, cfg)
    doc = {"status": result.status, "history": [r.to_record() for r in result.history]}
    OUT.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    for r in result.history:
        print(r.iteration, r.total_weight, r.delta_pct)
    print(result.status, "->", OUT)


if __name__ == "__main__":
    main()
