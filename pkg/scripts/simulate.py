"""Monte Carlo comparison of the backends on one task.

    python scripts/simulate.py --task F:OR,f:XOR --trials 100000 --seed 42
"""

import argparse
import sys

from dclc.boolfn import parse_task
from dclc.harness import ProtocolRun, SimulationConfig, run_oblivious_trials, run_trials
from dclc.quantum import UnsupportedProtocolError


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--task", default="F:OR,f:XOR")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--gon", type=int, default=5)
    args = ap.parse_args(argv)

    task = parse_task(args.task)
    cfg = SimulationConfig(args.trials, args.seed)
    runs = [
        ("classical", ProtocolRun(task, "classical")),
        ("quantum", ProtocolRun(task, "quantum")),
        (f"polygon n={args.gon} type2", ProtocolRun(task, "polygon", options={"gon": args.gon, "composition": "type2"})),
    ]
    print(f"{'backend':<22}{'analytic':>10}{'empirical':>11}{'z':>8}")
    for name, run in runs:
        try:
            rep = run_trials(cfg, run)
        except UnsupportedProtocolError as e:
            print(f"{name:<22}  unsupported: {e}")
            continue
        print(f"{name:<22}{rep.analytic:>10.5f}{rep.empirical:>11.5f}{rep.z:>8.2f}")
    try:
        rep = run_oblivious_trials(cfg, ProtocolRun(task, "quantum", oblivious=True))
        print(f"{'quantum, F revealed late':<22}{rep.analytic:>10.5f}{rep.empirical:>11.5f}{rep.z:>8.2f}")
    except (UnsupportedProtocolError, ValueError) as e:
        print(f"oblivious run unavailable: {e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
