"""Bell-pair protocols for balanced inner functions and the search for the rest.

    python scripts/quantum_protocols.py [--seed 0] [--grid 50] [--haar 200]
"""

import argparse
import math
import sys

from dclc.quantum import orthogonal_bipartition_ratios, verify_theorem1


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=int, default=50)
    ap.add_argument("--haar", type=int, default=200)
    ap.add_argument("--pauli", type=int, default=64)
    args = ap.parse_args(argv)

    rep = verify_theorem1(seed=args.seed, grid=args.grid, haar=args.haar, pauli=args.pauli)
    print(f"nontrivial tasks: {rep['nontrivial']}, balanced f: {rep['balanced']}")
    worst = max(r["max_deviation"] for r in rep["balanced_tasks"])
    print(f"balanced f: worst deviation from success 1 = {worst:.1e}")
    best = sorted(rep["unbalanced_tasks"], key=lambda r: -r["search_best"])
    print("unbalanced f, highest search scores:")
    for r in best[:5]:
        print(f"  {r['task']:<16} ratio {r['ratio']}  best {r['search_best']:.4f}  ({r['search_samples']} strategies)")

    print("orthogonal splits of the 16 encoded states:")
    for theta in (math.pi / 4, math.pi / 5, math.pi / 8, 0.0):
        a, b = math.cos(theta), math.sin(theta)
        res = orthogonal_bipartition_ratios(a, b)
        splits = sorted(p for p in res.ratios if 0 < p[0] < 16)
        tag = " (product state)" if res.degenerate else ""
        print(f"  a={a:.3f} b={b:.3f}: {splits}{tag}")
    return 0 if rep["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
