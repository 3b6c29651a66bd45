"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are collected in ``RESULTS`` and repeated in the pytest terminal
summary (see conftest.py), so they show up even when output is captured.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np

from dclc.boolfn import (
    BooleanFunction,
    DualLayerTask,
    all_strings,
    classify_function,
    corollary1_sufficient_trivial,
    enumerate_tasks,
    output_ratio,
    parse_function,
    parse_task,
    quad_group_scan,
)
from dclc.classical import (
    all_strategies,
    census,
    classify_triviality,
    max_classical_success,
    strategy_success,
)
from dclc.harness import ProtocolRun, QuantumBackend, SimulationConfig, TaskView, run_oblivious_trials, run_trials
from dclc.nogo import (
    EVEN_CLICK_TABLE,
    even_click_sets,
    proposition2_operational_check,
    verify_even_condition_tables,
    verify_even_formulas,
    verify_odd_type1_positivity,
    verify_theorem2,
    verify_type2_click_table,
)
from dclc.polygon import (
    SIGNS,
    U,
    build_bipartite,
    build_polygon,
    compose,
    consistency_check,
    pairing,
    product_effect,
    product_state,
)
from dclc.quantum import (
    PROTOCOL_ROWS,
    balanced_protocol_success,
    blockwise_success,
    falsification_search,
    orthogonal_bipartition_ratios,
    qubits_per_party,
    run_oblivious_protocol,
    run_table1_protocol,
)

RESULTS: list[str] = []
PAIRS = list(itertools.product(all_strings(2), repeat=2))


def record(num: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"[A{num:02d}] {'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
    RESULTS.append(line)
    print(line)


def _nontrivial():
    return [t for t in enumerate_tasks(2) if not classify_triviality(t).trivial]


def test_census_exactness():
    t0 = time.perf_counter()
    c = census(2)
    dt = time.perf_counter() - t0
    got = (c.total, c.trivial, c.nontrivial, c.no_comm, c.one_way, c.two_way)
    ok = got == (256, 176, 80, 60, 56, 60) and dt < 5
    record(1, "census exactness", ok, f"{got}, {dt:.2f}s")
    assert ok


def test_triviality_criteria_equivalence():
    t0 = time.perf_counter()
    bad = [str(t) for t in enumerate_tasks(2) if classify_triviality(t).trivial != corollary1_sufficient_trivial(t)]
    dt = time.perf_counter() - t0
    ok = not bad and dt < 10
    record(2, "triviality criteria match exhaustive verdict on 256 tasks", ok, f"{len(bad)} mismatches, {dt:.2f}s")
    assert ok


def test_balanced_inner_protocols_are_perfect():
    tasks = [t for t in _nontrivial() if classify_function(t.inner).kind == "balanced"]
    dev = max(abs(1 - balanced_protocol_success(t, x, y)) for t in tasks for x, y in PAIRS)
    right = all(run_table1_protocol(t, x, y) == t(x, y) for t in tasks for x, y in PAIRS)
    ok = len(tasks) == 2 * len(PROTOCOL_ROWS) and dev < 1e-12 and right
    record(3, "Bell-pair protocol perfect for every balanced-f nontrivial task", ok, f"{len(tasks)} tasks, max dev {dev:.1e}")
    assert ok


def test_output_ratio_characterization():
    """Literal form over all 256 tasks; trivial tasks such as (AND, 0011) violate it."""
    bad = []
    for t in enumerate_tasks(2):
        lhs = output_ratio(t) in ((4, 12), (12, 4))
        rhs = (not classify_triviality(t).trivial) and classify_function(t.inner).kind == "balanced"
        if lhs != rhs:
            bad.append(str(t))
    ok = not bad
    record(4, "1:3 output ratio iff (nontrivial and f balanced), all 256 tasks", ok,
           f"{len(bad)} counterexamples, e.g. {bad[0] if bad else '-'}")
    assert ok, f"{len(bad)} counterexamples: {bad[:5]}"


def test_every_nontrivial_task_has_a_one_three_quad():
    tasks = _nontrivial()
    scans = [quad_group_scan(t) for t in tasks]
    ok = len(tasks) == 80 and all(s.groups_scanned == 36 and s.has_1_3_group for s in scans)
    record(5, "each nontrivial task has a 1:3 quad group", ok, f"{sum(s.has_1_3_group for s in scans)}/80")
    assert ok


def test_oblivious_bell_protocol():
    expected = {(0, 0): "phi+", (1, 0): "phi-", (0, 1): "psi+", (1, 1): "psi-"}
    table_ok = all(
        run_oblivious_protocol(x, y).label == expected[(x[0] ^ y[0], x[1] ^ y[1])] for x, y in PAIRS
    )
    outers = [BooleanFunction.from_bits(f"{i:04b}") for i in range(16)]
    xor = parse_function("XOR", 2)
    fin_ok = all(
        run_oblivious_protocol(x, y).finalize(F) == DualLayerTask(F, xor)(x, y) for x, y in PAIRS for F in outers
    )
    rep = run_oblivious_trials(SimulationConfig(10_000, seed=0), ProtocolRun(parse_task("F:OR,f:XOR"), "quantum", True))
    ok = table_ok and fin_ok and rep.empirical == 1.0 and rep.early_outer_reads == 0
    record(6, "oblivious Bell protocol: label table, deferred finalize, simulation", ok,
           f"table {table_ok}, finalize {fin_ok}, empirical {rep.empirical}")
    assert ok


def test_blockwise_protocol():
    rng = np.random.default_rng(2024)
    balanced = [BooleanFunction(2, t) for t in itertools.product((0, 1), repeat=4) if sum(t) == 2]
    dev, qubits_ok, count = 0.0, True, 0
    for n in (3, 4):
        for _ in range(20):
            F = BooleanFunction(n, tuple(int(v) for v in rng.integers(0, 2, 2**n)))
            f = balanced[rng.integers(len(balanced))]
            task = DualLayerTask(F, f)
            count += 1
            dev = max(dev, max(abs(1 - blockwise_success(task, x, y)) for x, y in itertools.product(all_strings(n), repeat=2)))
            be = QuantumBackend(TaskView(task))
            qubits_ok &= qubits_per_party(n) == math.ceil(n / 2) and be.message_dimension == 2 ** math.ceil(n / 2)
    ok = dev < 1e-12 and qubits_ok
    record(7, "blockwise protocol perfect for n in {3, 4}", ok, f"{count} tasks, max dev {dev:.1e}, ceil(n/2) qubits {qubits_ok}")
    assert ok


def test_only_if_structure():
    r = orthogonal_bipartition_ratios(1 / math.sqrt(2), 1 / math.sqrt(2))
    max_ok = (4, 12) in r.ratios
    rng = np.random.default_rng(7)
    partial_ok = True
    for theta in rng.uniform(0.02, math.pi / 4 - 0.02, 20):
        a, b = math.cos(theta), math.sin(theta)
        rr = orthogonal_bipartition_ratios(a, b)
        partial_ok &= {p for p in rr.ratios if 0 < p[0] < 16} == {(8, 8)}
    res = falsification_search(parse_task("F:XOR,f:OR"), seed=0)
    ok = max_ok and partial_ok and res.samples >= 10_000 and res.best <= 1 - 1e-3
    record(8, "only-if structure: 4:12 at maximal entanglement, 8:8 otherwise, search below 1", ok,
           f"search best {res.best:.4f} over {res.samples} strategies")
    assert ok


def test_polygon_invariants():
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for n in range(3, 13):
        m = build_polygon(n)
        worst = max(worst, np.abs(m.states @ U - 1).max())
        P = m.single_effects @ m.states.T
        ok &= P.min() >= -1e-12 and P.max() <= 1 + 1e-12
        G = [(k, p) for k in range(n) for p in SIGNS]
        T = m.transforms
        ok &= len(T) == 2 * n
        for a, b in itertools.product(G, G):
            c = compose(n, a, b)
            ok &= c in T
            worst = max(worst, np.abs(T[a] @ T[b] - T[c]).max())
        if n % 2 == 0:
            worst = max(worst, max(np.abs(m.complements[j] - m.effects[m.complement_index(j)]).max() for j in range(n)))
        g = m.single_effects
        for ga, gb in itertools.product(g, g):
            for wa, wb in itertools.product(m.states, m.states):
                d = abs(pairing(product_effect(ga, gb), product_state(wa, wb)) - (ga @ wa) * (gb @ wb))
                worst = max(worst, d)
        for comp in ("type1", "type2"):
            ok &= consistency_check(build_bipartite(n, comp))
    dt = time.perf_counter() - t0
    ok = bool(ok) and worst < 1e-12 and dt < 10
    record(9, "polygon invariants for n = 3..12", ok, f"max dev {worst:.1e}, {dt:.2f}s")
    assert ok


def test_odd_type1_positivity():
    mins = {n: verify_odd_type1_positivity(n) for n in (5, 7, 9)}
    ok = all(v > 1e-6 for v in mins.values())
    record(10, "odd-gon complement products never vanish on entangled states", ok,
           ", ".join(f"n={n}: {v:.4f}" for n, v in mins.items()))
    assert ok


def test_even_formulas_and_click_tables():
    devs = {n: verify_even_formulas(n) for n in (4, 6, 8)}
    tables = all(verify_even_condition_tables(n) for n in (4, 6, 8))
    sets_exact = all(even_click_sets(n, s) == v for n in (4, 6, 8) for s, v in EVEN_CLICK_TABLE(n).items())
    odd = all(verify_type2_click_table(n) for n in (5, 7))
    ok = max(devs.values()) < 1e-9 and tables and sets_exact and odd
    record(11, "even-gon closed forms and click tables, odd-gon click table", ok,
           f"max dev {max(devs.values()):.1e}, even tables {tables and sets_exact}, odd table {odd}")
    assert ok


def test_polygon_nogo_sweeps():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for n, comp in ((4, "type1"), (4, "type2"), (5, "type1"), (5, "type2")):
        rep = verify_theorem2(n, comp, agreement_samples=2)
        good = rep.infeasible_count == 80 and rep.indeterminate_count == 0 and rep.feasible_count == 0 and all(rep.sanity.values())
        ok &= good
        parts.append(f"n={n} {comp}: {rep.infeasible_count}/80")
    dt = time.perf_counter() - t0
    ok = ok and dt <= 30 * 60
    record(12, "no perfect decoding for any nontrivial task in either composition", ok, ", ".join(parts) + f", {dt:.0f}s")
    assert ok


def test_product_only_matches_census():
    ok, bad = proposition2_operational_check(5, detail=True)
    record(13, "product states with product effects reproduce the classical census (n=5)", ok, f"{len(bad)} mismatches")
    assert ok


def test_classical_gap():
    task = parse_task("F:OR,f:XOR")
    exhaustive = max(strategy_success(task, s) for s in all_strategies())
    rep = run_trials(SimulationConfig(100_000, seed=0), ProtocolRun(task, "classical"))
    ok = exhaustive == max_classical_success(task) == Fraction(13, 16) and abs(rep.z) <= 4
    record(14, "classical optimum 13/16 and Monte Carlo agreement", ok, f"empirical {rep.empirical:.5f}, z {rep.z:.2f}")
    assert ok
