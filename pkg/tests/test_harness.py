import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dclc.boolfn import BooleanFunction, DualLayerTask, parse_function, parse_task
from dclc.harness import (
    Backend,
    ChannelBudgetError,
    ClassicalBackend,
    PolygonBackend,
    ProtocolRun,
    QuantumBackend,
    SimulationConfig,
    TaskView,
    UnsupportedModeError,
    UsageError,
    analytic_success,
    emit_report,
    make_backend,
    run_oblivious_trials,
    run_trials,
    trial_words,
)
from dclc.polygon import U
from dclc.quantum import ProtocolOrderError, UnsupportedProtocolError

OR_XOR = parse_task("F:OR,f:XOR")


def test_config_validation():
    with pytest.raises(UsageError):
        SimulationConfig(-1)
    with pytest.raises(UsageError):
        SimulationConfig(10, seed=2**64)
    with pytest.raises(UsageError):
        SimulationConfig(10, rng="mt19937")


def test_trial_words_are_per_trial():
    whole = trial_words(7, 0, 50)
    assert np.array_equal(whole[20:30], trial_words(7, 20, 10))
    assert np.array_equal(whole[13], trial_words(7, 13, 1)[0])
    assert not np.array_equal(whole, trial_words(8, 0, 50))


# -- analytic success ----------------------------------------------------------------


def test_analytic_examples():
    assert analytic_success(ProtocolRun(OR_XOR, "quantum")) == pytest.approx(1.0, abs=1e-12)
    assert analytic_success(ProtocolRun(OR_XOR, "classical")) == Fraction(13, 16)
    view = TaskView(OR_XOR)
    states = np.zeros((16, 3, 3))
    states[:] = np.outer(U, U)
    guess = PolygonBackend(view, states, 0.5 * np.outer(U, U), 4, "type2")
    T = np.array(OR_XOR.table())
    P = guess.probabilities()
    assert np.mean(np.where(T == 1, P, 1 - P)) == 0.5


def test_polygon_backend_values():
    perfect = analytic_success(ProtocolRun(parse_task("F:XOR,f:XOR"), "polygon", options={"gon": 4}))
    assert perfect == pytest.approx(1.0, abs=1e-9)
    p = analytic_success(ProtocolRun(OR_XOR, "polygon", options={"gon": 5, "composition": "type2"}))
    assert 13 / 16 - 1e-9 <= p < 1


def test_quantum_blockwise_backend_n3():
    F = BooleanFunction.from_callable(3, lambda a, b, c: a & (b | c))
    run = ProtocolRun(DualLayerTask(F, parse_function("XNOR", 2)), "quantum")
    assert analytic_success(run) == pytest.approx(1.0, abs=1e-12)
    _, be = run.build()
    assert be.mode == "blockwise" and be.message_dimension == 4


def test_quantum_backend_needs_balanced_inner():
    with pytest.raises(UnsupportedProtocolError):
        ProtocolRun(parse_task("F:XOR,f:OR"), "quantum").build()


def test_channel_budget():
    class TwoQubitMessages(Backend):
        message_dimension = 4

    assert ClassicalBackend(TaskView(OR_XOR)).message_dimension == 2
    with pytest.raises(ChannelBudgetError):
        TwoQubitMessages(TaskView(OR_XOR))
    n3 = DualLayerTask(BooleanFunction.from_bits("01101001"), parse_function("XOR", 2))
    assert TwoQubitMessages(TaskView(n3)).message_dimension == 4


def test_unknown_backend():
    with pytest.raises(UsageError):
        make_backend("cbits", TaskView(OR_XOR))


# -- trials ------------------------------------------------------------------------------


def test_quantum_trials_exact():
    rep = run_trials(SimulationConfig(100_000, seed=42), ProtocolRun(OR_XOR, "quantum"))
    assert rep.empirical == 1.0
    assert sum(r["trials"] for r in rep.per_input) == 100_000


def test_classical_trials_within_four_sigma():
    rep = run_trials(SimulationConfig(100_000, seed=1), ProtocolRun(OR_XOR, "classical"))
    assert rep.analytic == 13 / 16
    assert abs(rep.z) < 4


def test_zero_trials():
    rep = run_trials(SimulationConfig(0), ProtocolRun(OR_XOR, "classical"))
    assert rep.empirical is None and not rep.empirical_defined and rep.z is None
    assert all(r["trials"] == 0 for r in rep.per_input)


def test_reproducibility_and_digest():
    run = ProtocolRun(OR_XOR, "classical")
    a = run_trials(SimulationConfig(5000, seed=3), run)
    b = run_trials(SimulationConfig(5000, seed=3), run)
    c = run_trials(SimulationConfig(5000, seed=4), run)
    assert a.as_dict() == b.as_dict()
    assert a.digest != c.digest


def test_statistical_consistency():
    """Over 100 seeded runs, at most 2% land outside 3 sigma."""
    run = ProtocolRun(OR_XOR, "classical")
    outside = sum(abs(run_trials(SimulationConfig(10_000, seed=s), run).z) > 3 for s in range(100))
    assert outside <= 2


@settings(max_examples=10)
@given(st.integers(0, 2**64 - 1))
def test_counts_sum_to_trials(seed):
    rep = run_trials(SimulationConfig(300, seed=seed), ProtocolRun(parse_task("F:AND,f:XNOR"), "quantum"))
    assert sum(r["trials"] for r in rep.per_input) == 300
    assert 0 <= rep.empirical <= 1


# -- no-signaling --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "run",
    [
        ProtocolRun(OR_XOR, "classical"),
        ProtocolRun(OR_XOR, "quantum"),
        ProtocolRun(OR_XOR, "polygon", options={"gon": 5}),
        ProtocolRun(DualLayerTask(BooleanFunction.from_bits("01101001"), parse_function("XOR", 2)), "quantum"),
    ],
)
def test_alice_marginal_independent_of_y(run):
    _, be = run.build()
    N = 2**run.task.n
    for x in range(N):
        ref = be.alice_marginal(x, 0)
        for y in range(1, N):
            assert np.allclose(be.alice_marginal(x, y), ref, atol=1e-12)


def test_bob_marginal_independent_of_x():
    _, be = ProtocolRun(OR_XOR, "quantum").build()
    for y in range(4):
        ref = None
        for x in range(4):
            psi = be._state(x, y).reshape(2, 2)
            rho_b = psi.T @ psi.conj()
            ref = rho_b if ref is None else ref
            assert np.allclose(rho_b, ref, atol=1e-12)


# -- oblivious mode ----------------------------------------------------------------------------


def test_oblivious_quantum_cycle():
    run = ProtocolRun(parse_task("F:OR,f:XOR"), "quantum", oblivious=True)
    rep = run_oblivious_trials(SimulationConfig(16_000, seed=5), run)
    assert rep.empirical == 1.0 and rep.analytic == pytest.approx(1.0)
    assert rep.early_outer_reads == 0
    assert rep.task == "F:*,f:XOR"


def test_oblivious_random_schedule_reproducible():
    run = ProtocolRun(parse_task("F:AND,f:XNOR"), "quantum", oblivious=True)
    a = run_oblivious_trials(SimulationConfig(2000, seed=9), run, schedule="random")
    b = run_oblivious_trials(SimulationConfig(2000, seed=9), run, schedule="random")
    assert a.digest == b.digest and a.empirical == 1.0
    c = run_oblivious_trials(SimulationConfig(2000, seed=9), run, schedule="cycle")
    assert c.digest != a.digest


def test_outer_hidden_until_reveal():
    view = TaskView(OR_XOR, oblivious=True)
    _ = view.inner
    with pytest.raises(ProtocolOrderError):
        _ = view.outer
    assert view.early_outer_reads == 1
    view.reveal()
    assert view.outer == OR_XOR.outer


def test_oblivious_backend_never_reads_outer():
    view = TaskView(OR_XOR, oblivious=True)
    be = make_backend("quantum", view)
    for x in range(4):
        for y in range(4):
            r = be.oblivious_run(x, y)
            r.measure()
    assert view.early_outer_reads == 0
    assert all(what == "inner" for what, _ in view.access_log)


@pytest.mark.parametrize("backend", ["classical", "polygon"])
def test_oblivious_unsupported(backend):
    with pytest.raises(UnsupportedModeError):
        ProtocolRun(OR_XOR, backend, oblivious=True).build()


def test_oblivious_requires_flag():
    with pytest.raises(UsageError):
        run_oblivious_trials(SimulationConfig(10), ProtocolRun(OR_XOR, "quantum"))
    with pytest.raises(UsageError):
        run_trials(SimulationConfig(10), ProtocolRun(OR_XOR, "quantum", oblivious=True))


# -- reports ------------------------------------------------------------------------------------


def test_json_round_trip():
    rep = run_trials(SimulationConfig(1000, seed=2), ProtocolRun(OR_XOR, "classical"))
    doc = emit_report(rep, "json")
    back = json.loads(doc)
    assert back == json.loads(json.dumps(rep.as_dict()))
    for key in ("task", "backend", "n", "trials", "seed", "empirical", "analytic", "z", "per_input"):
        assert key in back
    assert {"x", "y", "successes", "trials"} <= set(back["per_input"][0])


def test_csv_schema():
    rep = run_trials(SimulationConfig(1000, seed=2), ProtocolRun(OR_XOR, "classical"))
    rows = list(csv.reader(io.StringIO(emit_report(rep, "csv"))))
    assert rows[0] == ["x", "y", "successes", "trials", "analytic_p"]
    assert len(rows) == 1 + 16 + 1
    assert rows[-1][:2] == ["all", "all"] and int(rows[-1][3]) == 1000


def test_unknown_format():
    rep = run_trials(SimulationConfig(10), ProtocolRun(OR_XOR, "classical"))
    with pytest.raises(UsageError):
        emit_report(rep, "xml")
