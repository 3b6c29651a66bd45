"""Perfect-decoding sweeps over polygon compositions.

    python scripts/nogo_sweep.py --n 4 5 --model type1 type2 [--jobs 2] [--out dir]
"""

import argparse
import json
import sys
from pathlib import Path

from dclc.nogo import proposition2_operational_check, verify_theorem2


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[4, 5])
    ap.add_argument("--model", nargs="+", default=["type1", "type2"], choices=["type1", "type2"])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--agreement-samples", type=int, default=8)
    ap.add_argument("--product-only", action="store_true", help="also compare product-only verdicts with the census")
    ap.add_argument("--out", help="directory for per-run JSON reports")
    args = ap.parse_args(argv)

    ok = True
    for n in args.n:
        for model in args.model:
            rep = verify_theorem2(n, model, jobs=args.jobs, agreement_samples=args.agreement_samples)
            d = rep.as_dict()
            top = max(r.max_agreement for r in rep.records)
            print(
                f"n={n} {model}: {d['infeasible']}/{d['tasks']} infeasible, "
                f"{d['indeterminate']} indeterminate, sanity {d['sanity']}, "
                f"best sampled agreement {top:.4f}, {d['elapsed_s']:.1f}s"
            )
            ok &= rep.passed
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                Path(args.out, f"nogo_n{n}_{model}.json").write_text(json.dumps(d, indent=2, default=str))
        if args.product_only:
            agree, bad = proposition2_operational_check(n, detail=True)
            print(f"n={n} product-only vs census: {'agree' if agree else bad}")
            ok &= agree
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
