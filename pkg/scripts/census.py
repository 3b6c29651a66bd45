"""Classify all 256 two-bit tasks and list the nontrivial ones.

    python scripts/census.py [--out census.csv]
"""

import argparse
import csv
import sys

from dclc.boolfn import classify_function, enumerate_tasks, output_ratio
from dclc.classical import census, classify_triviality, max_classical_success


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="write one row per task to this CSV file")
    args = ap.parse_args(argv)

    rows = []
    for t in enumerate_tasks(2):
        v = classify_triviality(t)
        rows.append(
            {
                "task": str(t),
                "verdict": v.verdict.value,
                "side": v.side or "",
                "inner_kind": classify_function(t.inner).kind,
                "ratio": "%d:%d" % output_ratio(t),
                "classical_max": str(max_classical_success(t)),
            }
        )
    print(census(2).as_dict())
    nontrivial = [r for r in rows if r["verdict"] == "nontrivial"]
    by_kind = {}
    for r in nontrivial:
        by_kind[r["inner_kind"]] = by_kind.get(r["inner_kind"], 0) + 1
    print("nontrivial by inner function:", by_kind)
    best = {}
    for r in nontrivial:
        best[r["classical_max"]] = best.get(r["classical_max"], 0) + 1
    print("best classical success among nontrivial tasks:", dict(sorted(best.items())))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
