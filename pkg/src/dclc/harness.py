"""Monte Carlo simulation of the server / Alice / Bob / Charlie scenario.

Each backend turns an input pair into the state Charlie receives and the
probability that his decoder outputs 1, computed by the backend's own
physics (strategy tables, statevectors, GPT pairings).  Those per-input
distributions are exact; trials then sample inputs and outcomes from a
counter-based Philox stream, so trial ``i`` depends only on ``(seed, i)``.

Trial ``i`` draws the four 64-bit words of Philox block ``i``: word 0 picks
``x`` and ``y``, word 1 the measurement outcome, word 2 the revealed outer
function in oblivious runs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .boolfn import (
    BooleanFunction,
    DualLayerTask,
    UnsupportedArityError,
    bits_of,
    classify_function,
)
from .classical import ClassicalStrategy, best_strategy, strategy_success
from .nogo import Sweeper, optimal_effect
from .polygon import U, Composition
from .quantum import (
    BELL,
    M2,
    ObliviousRun,
    ProtocolOrderError,
    UnsupportedProtocolError,
    _pauli,
    affine_form,
    apply_encoding,
    blockwise_success,
    measure,
    protocol_row,
    qubits_per_party,
)

__all__ = [
    "UnsupportedModeError",
    "UsageError",
    "ChannelBudgetError",
    "SimulationConfig",
    "TaskView",
    "ClassicalBackend",
    "QuantumBackend",
    "PolygonBackend",
    "ProtocolRun",
    "Report",
    "make_backend",
    "trial_words",
    "analytic_success",
    "run_trials",
    "run_oblivious_trials",
    "emit_report",
    "RNG_ALGORITHM",
]

RNG_ALGORITHM = "philox4x64"


class UnsupportedModeError(RuntimeError):
    pass


class UsageError(ValueError):
    pass


class ChannelBudgetError(ValueError):
    """A message exceeds operational dimension 2**(n-1)."""


@dataclass(frozen=True)
class SimulationConfig:
    trials: int
    seed: int = 0
    rng: str = RNG_ALGORITHM

    def __post_init__(self):
        if self.trials < 0:
            raise UsageError("trials must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if self.rng != RNG_ALGORITHM:
            raise UsageError(f"only {RNG_ALGORITHM} is supported")


def trial_words(seed: int, start: int, count: int) -> np.ndarray:
    """Philox blocks ``start .. start + count - 1`` as a ``(count, 4)`` uint64 array.

    Block ``i`` is the first output of ``Philox(key=seed, counter=i)``; a
    stream started at ``start`` yields consecutive blocks, so chunks agree
    with per-trial generation.
    """
    bg = np.random.Philox(key=seed, counter=[start, 0, 0, 0])
    return bg.random_raw(4 * count).reshape(count, 4)


def _uniform(words: np.ndarray) -> np.ndarray:
    return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53


class TaskView:
    """What a strategy may see: the inner function always, the outer one only after reveal."""

    def __init__(self, task: DualLayerTask, oblivious: bool = False):
        self._task = task
        self.oblivious = oblivious
        self.revealed = not oblivious
        self.access_log: list[tuple[str, bool]] = []

    @property
    def n(self) -> int:
        return self._task.n

    @property
    def inner(self) -> BooleanFunction:
        self.access_log.append(("inner", self.revealed))
        return self._task.inner

    @property
    def outer(self) -> BooleanFunction:
        self.access_log.append(("outer", self.revealed))
        if not self.revealed:
            raise ProtocolOrderError("outer function read before the messages were sent")
        return self._task.outer

    @property
    def task(self) -> DualLayerTask:
        _ = self.outer
        return self._task

    def reveal(self):
        self.revealed = True

    @property
    def early_outer_reads(self) -> int:
        return sum(1 for what, ok in self.access_log if what == "outer" and not ok)


# -- backends -----------------------------------------------------------------


class Backend:
    name = "base"
    supports_oblivious = False
    message_dimension = 2

    def __init__(self, view: TaskView):
        self.view = view
        n = view.n
        if self.message_dimension > 2 ** (n - 1):
            raise ChannelBudgetError(
                f"{self.name} messages have dimension {self.message_dimension} > {2 ** (n - 1)}"
            )

    def p_one(self, x: int, y: int) -> float:
        """Probability that Charlie outputs 1 on the input pair."""
        raise NotImplementedError

    def alice_marginal(self, x: int, y: int) -> np.ndarray:
        """Description of Alice's outgoing system alone."""
        raise NotImplementedError

    def probabilities(self) -> np.ndarray:
        N = 2**self.view.n
        return np.array([[self.p_one(x, y) for y in range(N)] for x in range(N)])


class ClassicalBackend(Backend):
    name = "classical"

    def __init__(self, view: TaskView, strategy: ClassicalStrategy | None = None):
        if view.n != 2:
            raise UnsupportedArityError("classical backend strategies are tabulated for n = 2")
        if strategy is None:
            strategy = best_strategy(view.task)[0]
        self.strategy = strategy
        self.message_dimension = 2 ** (strategy.n - 1)
        super().__init__(view)

    def p_one(self, x, y):
        return float(self.strategy.output(x, y))

    def alice_marginal(self, x, y):
        out = np.zeros(self.message_dimension)
        out[self.strategy.encode_a[x]] = 1.0
        return out

    def exact(self) -> Fraction:
        return strategy_success(self.view.task, self.strategy)


class QuantumBackend(Backend):
    """Bell-pair protocols: the two-outcome protocol for n = 2, blockwise otherwise.

    In oblivious mode (n = 2, f in {XOR, XNOR}) Charlie runs the four-outcome
    Bell measurement and applies F to the decoded bits after the reveal.
    """

    name = "quantum"
    supports_oblivious = True

    def __init__(self, view: TaskView, mode: str = "auto"):
        n = view.n
        self.message_dimension = 2 ** qubits_per_party(n)
        super().__init__(view)
        if mode == "auto":
            mode = "oblivious" if view.oblivious else ("bell-pair" if n == 2 else "blockwise")
            if mode == "bell-pair":
                try:
                    protocol_row(view.task)
                except UnsupportedProtocolError:
                    mode = "blockwise"
        if mode not in ("bell-pair", "blockwise", "oblivious"):
            raise UsageError(f"unknown quantum mode {mode!r}")
        self.mode = mode
        inner = view.inner
        if classify_function(inner).kind != "balanced":
            raise UnsupportedProtocolError(f"no perfect Bell-pair protocol for inner function {inner}")
        if mode == "oblivious" and n != 2:
            raise UnsupportedModeError("oblivious protocol is defined for n = 2")

    def _state(self, x, y):
        mask, _ = protocol_row(self.view.task)
        xb, yb = bits_of(x, 2), bits_of(y, 2)
        y_hat = tuple(a ^ b for a, b in zip(yb, mask))
        return apply_encoding(BELL["phi+"], _pauli(xb, "dense"), _pauli(y_hat, "dense"))

    def p_one(self, x, y):
        task = self.view.task
        n = task.n
        if self.mode == "blockwise":
            xb, yb = bits_of(x, n), bits_of(y, n)
            ok = blockwise_success(task, xb, yb)
            return ok if task(xb, yb) == 1 else 1 - ok
        _, on_phi = protocol_row(task)
        p_phi, p_rest = measure(self._state(x, y), M2)
        return float(p_phi if on_phi == 1 else p_rest)

    def oblivious_run(self, x, y) -> ObliviousRun:
        return ObliviousRun(bits_of(x, 2), bits_of(y, 2), self.view.inner)

    def alice_marginal(self, x, y):
        n = self.view.n
        if self.mode == "blockwise":
            # each Alice block is half of a Bell pair; an odd last bit is |alpha x_n>
            alpha = affine_form(self.view.inner)[0]
            parts = [np.eye(2) / 2] * (n // 2)
            if n % 2:
                b = alpha * bits_of(x, n)[-1]
                parts.append(np.diag([1.0 - b, float(b)]))
            return np.stack(parts)
        state = self.oblivious_run(x, y).state if self.mode == "oblivious" else self._state(x, y)
        psi = state.reshape(2, 2)
        return psi @ psi.conj().T


class PolygonBackend(Backend):
    """Polygon composition with explicit encodings and a two-outcome decoder.

    ``states`` holds the 16 encoded bipartite states and ``effect`` the
    decoder's output-1 effect.  ``for_task`` picks a perfect encoding when
    the sweep finds one, otherwise the LP-optimal decoder for encodings
    derived from the best classical strategy.
    """

    name = "polygon"

    def __init__(self, view: TaskView, states: np.ndarray, effect: np.ndarray, gon: int, composition: str):
        if view.n != 2:
            raise UnsupportedArityError("polygon systems carry operational dimension 2, so n = 2")
        super().__init__(view)
        self.states = np.asarray(states)
        self.effect = np.asarray(effect)
        self.gon = gon
        self.composition = composition

    @classmethod
    def for_task(cls, view: TaskView, gon: int = 4, composition: str = "type2") -> "PolygonBackend":
        task = view.task
        comp = Composition.parse(composition)
        sw = Sweeper(gon, comp, agreement_samples=0)
        res = sw.product_sweep(task)
        T = np.array(task.table())
        if res["witness"] is not None:
            a = np.array(res["witness"]["alice_vertices"])
            b = np.array(res["witness"]["bob_vertices"])
        else:
            s, _ = best_strategy(task)
            d = gon // 2 if gon % 2 == 0 else (gon + 1) // 2
            a = np.array([d * m for m in s.encode_a])
            b = np.array([d * m for m in s.encode_b])
        prob = sw._config_problem(a, b, T)
        _, E = optimal_effect(prob)
        return cls(view, prob.encoded_states, E, gon, comp.value)

    def p_one(self, x, y):
        p = float(np.sum(self.effect * self.states[4 * x + y]))
        return min(1.0, max(0.0, p))

    def alice_marginal(self, x, y):
        return self.states[4 * x + y] @ U


def make_backend(name: str, view: TaskView, **kw) -> Backend:
    name = name.lower()
    if name == "classical":
        if view.oblivious:
            raise UnsupportedModeError("classical messages depend on F; no oblivious mode")
        return ClassicalBackend(view, **kw)
    if name == "quantum":
        return QuantumBackend(view, **kw)
    if name == "polygon":
        if view.oblivious:
            raise UnsupportedModeError("polygon backend has no deferred finalization")
        return PolygonBackend.for_task(view, **kw)
    raise UsageError(f"unknown backend {name!r}")


# -- runs and reports -------------------------------------------------------------


@dataclass
class ProtocolRun:
    task: DualLayerTask
    backend: str = "quantum"
    oblivious: bool = False
    options: dict = field(default_factory=dict)

    def build(self) -> tuple[TaskView, Backend]:
        view = TaskView(self.task, self.oblivious)
        return view, make_backend(self.backend, view, **self.options)


@dataclass
class Report:
    task: str
    backend: str
    n: int
    trials: int
    seed: int
    empirical: float | None
    analytic: float
    stderr: float
    z: float | None
    per_input: list[dict]
    digest: str
    oblivious: bool = False
    early_outer_reads: int = 0

    @property
    def empirical_defined(self) -> bool:
        return self.empirical is not None

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "backend": self.backend,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "empirical": self.empirical,
            "analytic": self.analytic,
            "z": self.z,
            "per_input": self.per_input,
            "stderr": self.stderr,
            "digest": self.digest,
            "oblivious": self.oblivious,
            "early_outer_reads": self.early_outer_reads,
            "rng": RNG_ALGORITHM,
        }


def analytic_success(run: ProtocolRun) -> Fraction | float:
    """Mean over all input pairs of the backend's exact success probability."""
    view, backend = run.build()
    if isinstance(backend, ClassicalBackend):
        return backend.exact()
    task = run.task
    P = backend.probabilities()
    T = np.array(task.table())
    return float(np.mean(np.where(T == 1, P, 1 - P)))


def _summarize(run: ProtocolRun, config: SimulationConfig, xs, ys, ok, analytic_p, digest, early=0, label=None) -> Report:
    n = run.task.n
    N = 2**n
    trials = config.trials
    succ = np.zeros((N, N), dtype=np.int64)
    cnt = np.zeros((N, N), dtype=np.int64)
    np.add.at(cnt, (xs, ys), 1)
    np.add.at(succ, (xs, ys), ok.astype(np.int64))
    analytic = float(np.mean(analytic_p))
    fmt = lambda v: "".join(map(str, bits_of(v, n)))  # noqa: E731
    per_input = [
        {
            "x": fmt(x),
            "y": fmt(y),
            "successes": int(succ[x, y]),
            "trials": int(cnt[x, y]),
            "analytic_p": float(analytic_p[x, y]),
        }
        for x in range(N)
        for y in range(N)
    ]
    if trials == 0:
        empirical, z = None, None
        stderr = float("nan")
    else:
        empirical = float(ok.mean())
        stderr = math.sqrt(analytic * (1 - analytic) / trials)
        if stderr > 0:
            z = (empirical - analytic) / stderr
        else:
            z = 0.0 if abs(empirical - analytic) < 1e-12 else math.copysign(math.inf, empirical - analytic)
    return Report(
        task=label or str(run.task),
        backend=run.backend,
        n=n,
        trials=trials,
        seed=config.seed,
        empirical=empirical,
        analytic=analytic,
        stderr=stderr,
        z=z,
        per_input=per_input,
        digest=digest,
        oblivious=run.oblivious,
        early_outer_reads=early,
    )


def _digest(config: SimulationConfig, *columns: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(f"{RNG_ALGORITHM}:{config.seed}:{config.trials}".encode())
    for c in columns:
        h.update(np.ascontiguousarray(c, dtype=np.int64).tobytes())
    return h.hexdigest()


def run_trials(config: SimulationConfig, run: ProtocolRun) -> Report:
    """Sample inputs, run encode -> transmit -> decode, and tally successes."""
    if run.oblivious:
        raise UsageError("use run_oblivious_trials for oblivious runs")
    view, backend = run.build()
    n = run.task.n
    N = 2**n
    P = backend.probabilities()
    T = np.array(run.task.table())
    words = trial_words(config.seed, 0, config.trials)
    xs = (words[:, 0] & np.uint64(N - 1)).astype(np.int64)
    ys = ((words[:, 0] >> np.uint64(n)) & np.uint64(N - 1)).astype(np.int64)
    out = (_uniform(words[:, 1]) < P[xs, ys]).astype(np.int64)
    ok = out == T[xs, ys]
    analytic_p = np.where(T == 1, P, 1 - P)
    return _summarize(run, config, xs, ys, ok, analytic_p, _digest(config, xs, ys, out))


def run_oblivious_trials(
    config: SimulationConfig,
    run: ProtocolRun,
    schedule: str | Sequence[BooleanFunction] = "cycle",
) -> Report:
    """F is fixed only after Charlie's measurement; success is judged against it.

    ``schedule``: "cycle" runs through all 16 two-bit outer functions by trial
    index, "random" draws one per trial from word 2, or give explicit functions.
    """
    if not run.oblivious:
        raise UsageError("run is not oblivious")
    view, backend = run.build()
    if not backend.supports_oblivious:
        raise UnsupportedModeError(f"{backend.name} backend has no deferred finalization")
    if run.task.n != 2:
        raise UnsupportedModeError("oblivious protocol is defined for n = 2")
    outers = [BooleanFunction(2, bits_of(i, 4)) for i in range(16)]
    if isinstance(schedule, str):
        if schedule not in ("cycle", "random"):
            raise UsageError(f"unknown schedule {schedule!r}")
        fixed = None
    else:
        fixed = list(schedule)
    inner = view.inner
    dists = {(x, y): backend.oblivious_run(x, y).distribution() for x in range(4) for y in range(4)}
    words = trial_words(config.seed, 0, config.trials)
    xs = (words[:, 0] & np.uint64(3)).astype(np.int64)
    ys = ((words[:, 0] >> np.uint64(2)) & np.uint64(3)).astype(np.int64)
    us = _uniform(words[:, 1])
    outs = np.zeros(config.trials, dtype=np.int64)
    ok = np.zeros(config.trials, dtype=bool)
    fidx = np.zeros(config.trials, dtype=np.int64)
    for i in range(config.trials):
        x, y = int(xs[i]), int(ys[i])
        r = backend.oblivious_run(x, y)
        r.measure(float(us[i]))  # messages are sent and measured here
        if fixed is not None:
            F = fixed[i % len(fixed)]
        elif schedule == "cycle":
            F = outers[i % 16]
        else:
            F = outers[int(words[i, 2] % np.uint64(16))]
        fidx[i] = int(F.bits, 2)
        zx, zy = bits_of(x, 2), bits_of(y, 2)
        target = F(inner(zx[0], zy[0]), inner(zx[1], zy[1]))
        outs[i] = r.finalize(F)
        ok[i] = outs[i] == target
    view.reveal()
    # exact success averaged over the schedule's outer functions
    pool = fixed if fixed is not None else outers
    analytic_p = np.zeros((4, 4))
    for (x, y), dist in dists.items():
        zx, zy = bits_of(x, 2), bits_of(y, 2)
        acc = 0.0
        for F in pool:
            target = F(inner(zx[0], zy[0]), inner(zx[1], zy[1]))
            for lab, p in dist.items():
                probe = ObliviousRun(zx, zy, inner)
                probe.label = lab
                acc += p * (probe.finalize(F) == target)
        analytic_p[x, y] = acc / len(pool)
    label = f"F:*,f:{inner}"
    return _summarize(
        run, config, xs, ys, ok, analytic_p, _digest(config, xs, ys, outs, fidx), view.early_outer_reads, label
    )


def emit_report(report: Report, fmt: str = "json") -> str:
    fmt = fmt.lower()
    if fmt == "json":
        return json.dumps(report.as_dict(), indent=2, sort_keys=True)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "successes", "trials", "analytic_p"])
        for row in report.per_input:
            w.writerow([row["x"], row["y"], row["successes"], row["trials"], repr(row["analytic_p"])])
        succ = sum(r["successes"] for r in report.per_input)
        w.writerow(["all", "all", succ, report.trials, repr(report.analytic)])
        return buf.getvalue()
    raise UsageError(f"unknown report format {fmt!r}")
