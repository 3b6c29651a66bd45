"""Command-line entry point: ``dclc <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 solver-indeterminate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import classical, nogo, polygon, quantum
from .boolfn import InputShapeError, UnsupportedArityError, enumerate_tasks, parse_function, parse_task
from .harness import (
    ProtocolRun,
    SimulationConfig,
    UnsupportedModeError,
    UsageError,
    emit_report,
    run_oblivious_trials,
    run_trials,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INDETERMINATE = 0, 1, 2, 3


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# -- classify -----------------------------------------------------------------


def cmd_classify(args) -> int:
    if args.n != 2:
        raise UnsupportedArityError("exhaustive classification is implemented for n = 2")
    if args.task:
        task = parse_task(args.task, 2)
        v = classical.classify_triviality(task)
        row = {
            "task": str(task),
            "verdict": v.verdict.value,
            "side": v.side or "",
            "criteria_predicate": classical.corollary1_sufficient_trivial(task),
            "max_classical_success": str(classical.max_classical_success(task)),
        }
        print(_csv([row]) if args.format == "csv" else json.dumps(row, indent=2))
        return EXIT_OK
    t0 = time.perf_counter()
    c = classical.census(2)
    out = c.as_dict()
    if args.format == "csv":
        print(_csv([{"metric": k, "value": v} for k, v in out.items()]), end="")
    else:
        out["runtime_s"] = round(time.perf_counter() - t0, 4)
        _print_json(out)
    return EXIT_OK


# -- quantum --------------------------------------------------------------------


def cmd_quantum(args) -> int:
    if args.qcmd == "verify-table1":
        rep = quantum.verify_theorem1(
            seed=args.seed, grid=args.grid, haar=args.haar, pauli=args.pauli, search=not args.no_search
        )
        if not args.verbose:
            rep = {k: v for k, v in rep.items() if not k.endswith("_tasks")}
        _print_json(rep)
        return EXIT_OK if rep["passed"] else EXIT_FAIL
    if args.qcmd == "oblivious":
        run = quantum.run_oblivious_protocol(args.x, args.y, args.inner)
        out = {"x": args.x, "y": args.y, "inner": args.inner, "bell_label": run.label}
        if args.outer:
            out["outer"] = args.outer
            out["output"] = run.finalize(parse_function(args.outer, 2))
        _print_json(out)
        return EXIT_OK
    if args.qcmd == "search":
        task = parse_task(args.task, 2)
        haar = args.haar
        if args.samples is not None:
            # total strategies = grid * (haar + pauli)
            haar = max(1, -(-args.samples // args.grid) - args.pauli)
        res = quantum.falsification_search(task, seed=args.seed, grid=args.grid, haar=haar, pauli=args.pauli)
        _print_json({"task": res.task, "samples": res.samples, "best": res.best, "best_params": res.best_params})
        return EXIT_OK if res.best < 1 - 1e-3 else EXIT_FAIL
    if args.qcmd == "bipartition":
        res = quantum.orthogonal_bipartition_ratios(args.a, args.b)
        _print_json({"a": args.a, "b": args.b, "degenerate": res.degenerate, "ratios": sorted(res.ratios)})
        return EXIT_OK
    raise UsageError("missing quantum subcommand")


# -- polygon --------------------------------------------------------------------


def polygon_checks(n: int, model: str) -> dict:
    m = polygon.build_bipartite(n, model)
    out = {
        "n": n,
        "parity": m.base.parity,
        "composition": m.composition.value,
        "states": len(m.states),
        "effects": len(m.effects),
        "consistent": polygon.consistency_check(m),
    }
    if n % 2 == 0:
        out["club_identity_max_dev"] = nogo.verify_club_identity(n)
    return out


def cmd_polygon(args) -> int:
    if args.dump:
        _print_json(polygon.build_bipartite(args.n, args.model).as_dict())
        return EXIT_OK
    out = polygon_checks(args.n, args.model)
    if args.format == "csv":
        print(_csv([out]), end="")
    else:
        _print_json(out)
    return EXIT_OK if out["consistent"] else EXIT_FAIL


# -- nogo -------------------------------------------------------------------------


def cmd_nogo(args) -> int:
    if args.ncmd == "verify":
        tasks = [parse_task(args.task, 2)] if args.task else None
        rep = nogo.verify_theorem2(
            args.n, args.model, tasks=tasks, jobs=args.jobs, agreement_samples=args.agreement_samples, seed=args.seed
        )
        d = rep.as_dict()
        if args.summary:
            d.pop("records")
        _print_json(d)
        if rep.indeterminate_count:
            return EXIT_INDETERMINATE
        if args.task:
            # a single requested task: report its verdict without judging it
            return EXIT_OK
        return EXIT_OK if rep.passed else EXIT_FAIL
    if args.ncmd == "tables":
        n = args.n
        out: dict = {"n": n}
        if n % 2:
            out["odd_type1_min_probability"] = nogo.verify_odd_type1_positivity(n)
            out["odd_type2_click_table"] = nogo.verify_type2_click_table(n)
            ok = out["odd_type1_min_probability"] > 0 and out["odd_type2_click_table"]
        else:
            out["even_formula_max_dev"] = nogo.verify_even_formulas(n)
            out["even_condition_tables"] = nogo.verify_even_condition_tables(n)
            out["club_identity_max_dev"] = nogo.verify_club_identity(n)
            out["quad_ratios_type1"] = sorted(nogo.quad_endpoint_ratios(n, "type1"))
            ok = out["even_formula_max_dev"] < 1e-9 and out["even_condition_tables"]
        out["quad_ratios_type2"] = sorted(nogo.quad_endpoint_ratios(n, "type2"))
        _print_json(out)
        return EXIT_OK if ok else EXIT_FAIL
    if args.ncmd == "product-only":
        ok, bad = nogo.proposition2_operational_check(args.n, detail=True)
        _print_json({"n": args.n, "agrees_with_classical": ok, "mismatches": bad})
        return EXIT_OK if ok else EXIT_FAIL
    raise UsageError("missing nogo subcommand")


# -- simulate / report ---------------------------------------------------------------


def _simulate(task_literal: str, backend: str, trials: int, seed: int, oblivious: bool, gon: int, model: str):
    task = parse_task(task_literal)
    options = {"gon": gon, "composition": model} if backend == "polygon" else {}
    run = ProtocolRun(task, backend, oblivious, options)
    cfg = SimulationConfig(trials, seed)
    return run_oblivious_trials(cfg, run) if oblivious else run_trials(cfg, run)


def cmd_simulate(args) -> int:
    rep = _simulate(args.task, args.backend, args.trials, args.seed, args.oblivious, args.gon, args.model)
    print(emit_report(rep, args.format), end="" if args.format == "csv" else "\n")
    return EXIT_OK


def cmd_report(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    (out / "census.json").write_text(json.dumps(classical.census(2).as_dict(), indent=2))
    q = quantum.verify_theorem1(seed=args.seed, grid=args.grid, haar=args.haar, pauli=args.pauli)
    (out / "quantum.json").write_text(json.dumps(q, indent=2, default=str))
    status = status or (EXIT_OK if q["passed"] else EXIT_FAIL)
    checks = [polygon_checks(n, m) for n in range(3, 13) for m in ("type1", "type2")]
    (out / "polygon.json").write_text(json.dumps(checks, indent=2))
    status = status or (EXIT_OK if all(c["consistent"] for c in checks) else EXIT_FAIL)
    for n in args.nogo_n:
        for m in ("type1", "type2"):
            rep = nogo.verify_theorem2(n, m, seed=args.seed)
            (out / f"nogo_n{n}_{m}.json").write_text(json.dumps(rep.as_dict(), indent=2, default=str))
            if rep.indeterminate_count:
                status = status or EXIT_INDETERMINATE
            elif not rep.passed:
                status = status or EXIT_FAIL
    sims = [
        ("F:OR,f:XOR", "classical", False),
        ("F:OR,f:XOR", "quantum", False),
        ("F:OR,f:XOR", "polygon", False),
        ("F:OR,f:XOR", "quantum", True),
    ]
    for lit, backend, obl in sims:
        rep = _simulate(lit, backend, args.trials, args.seed, obl, 4, "type2")
        stem = f"simulate_{backend}{'_oblivious' if obl else ''}"
        (out / f"{stem}.json").write_text(emit_report(rep, "json"))
        (out / f"{stem}.csv").write_text(emit_report(rep, "csv"))
    print(json.dumps({"out": str(out), "files": sorted(p.name for p in out.iterdir()), "exit": status}, indent=2))
    return status


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dclc", description="Dual-layer limited-communication computing toolkit")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("classify", help="classical triviality census or a single verdict")
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--task")
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(fn=cmd_classify)

    q = sub.add_parser("quantum", help="Bell-pair protocols and searches")
    qs = q.add_subparsers(dest="qcmd", required=True)
    v = qs.add_parser("verify-table1", help="perfect protocols for balanced f, search for the rest")
    for a, d in (("--seed", 0), ("--grid", 50), ("--haar", 200), ("--pauli", 64)):
        v.add_argument(a, type=int, default=d)
    v.add_argument("--no-search", action="store_true")
    v.add_argument("--verbose", action="store_true")
    o = qs.add_parser("oblivious", help="Bell label for one input pair, optional finalize")
    o.add_argument("--x", required=True)
    o.add_argument("--y", required=True)
    o.add_argument("--inner", default="XOR")
    o.add_argument("--outer")
    s = qs.add_parser("search", help="randomized search for a perfect strategy")
    s.add_argument("--task", required=True)
    for a, d in (("--seed", 0), ("--grid", 50), ("--haar", 200), ("--pauli", 64)):
        s.add_argument(a, type=int, default=d)
    s.add_argument("--samples", type=int, help="total strategies; overrides --haar")
    b = qs.add_parser("bipartition", help="orthogonal splits of the Pauli-encoded states")
    b.add_argument("--a", type=float, required=True)
    b.add_argument("--b", type=float, required=True)
    q.set_defaults(fn=cmd_quantum)

    g = sub.add_parser("polygon", help="polygon GPT construction checks")
    gs = g.add_subparsers(dest="gcmd", required=True)
    gc = gs.add_parser("check")
    gc.add_argument("--n", type=int, required=True)
    gc.add_argument("--model", choices=("type1", "type2"), required=True)
    gc.add_argument("--format", choices=("json", "csv"), default="json")
    gc.add_argument("--dump", action="store_true", help="print the full model as JSON")
    g.set_defaults(fn=cmd_polygon)

    ng = sub.add_parser("nogo", help="perfect-decoding feasibility sweeps")
    ns = ng.add_subparsers(dest="ncmd", required=True)
    nv = ns.add_parser("verify")
    nv.add_argument("--n", type=int, required=True)
    nv.add_argument("--model", choices=("type1", "type2"), required=True)
    nv.add_argument("--task")
    nv.add_argument("--jobs", type=int, default=1)
    nv.add_argument("--agreement-samples", type=int, default=8)
    nv.add_argument("--seed", type=int, default=0)
    nv.add_argument("--summary", action="store_true", help="omit per-task records")
    nt = ns.add_parser("tables", help="probability identities and click tables")
    nt.add_argument("--n", type=int, required=True)
    npo = ns.add_parser("product-only", help="product states and effects versus the classical census")
    npo.add_argument("--n", type=int, required=True)
    ng.set_defaults(fn=cmd_nogo)

    sm = sub.add_parser("simulate", help="Monte Carlo protocol runs")
    sm.add_argument("--task", required=True)
    sm.add_argument("--backend", choices=("classical", "quantum", "polygon"), required=True)
    sm.add_argument("--trials", type=int, required=True)
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--oblivious", action="store_true")
    sm.add_argument("--format", choices=("json", "csv"), default="json")
    sm.add_argument("--gon", type=int, default=4)
    sm.add_argument("--model", choices=("type1", "type2"), default="type2")
    sm.set_defaults(fn=cmd_simulate)

    r = sub.add_parser("report", help="write every verification and a few simulations to a directory")
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trials", type=int, default=100_000)
    r.add_argument("--grid", type=int, default=50)
    r.add_argument("--haar", type=int, default=200)
    r.add_argument("--pauli", type=int, default=64)
    r.add_argument("--nogo-n", type=int, nargs="*", default=[4, 5])
    r.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except nogo.IndeterminateError as e:
        print(f"indeterminate: {e}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except (
        UsageError,
        InputShapeError,
        UnsupportedArityError,
        UnsupportedModeError,
        quantum.UnsupportedProtocolError,
        polygon.DomainError,
        KeyError,
    ) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
