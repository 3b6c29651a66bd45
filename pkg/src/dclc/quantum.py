"""Exact two-qubit simulation of the Bell-pair DCLC protocols.

Encoding convention: the 2-bit input ``(b1, b2)`` is encoded by
``X**b2 @ Z**b1`` (dense-coding order).  With it,
``(sigma(x) (x) sigma(y)) |phi+>`` is, up to phase, the Bell state labelled
by ``(x1^y1, x2^y2)``: 00 -> phi+, 10 -> phi-, 01 -> psi+, 11 -> psi-.
The listed order ``I, X, XZ, Z`` by index ``2*b1 + b2`` is kept as
``LISTED_PAULIS``; it is used by the Gram-matrix analysis and still gives
perfect balanced-f protocols, but permutes the phi-/psi- labels.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .boolfn import (
    BooleanFunction,
    DualLayerTask,
    InputShapeError,
    UnsupportedArityError,
    _as_bits,
    all_strings,
    bits_of,
    classify_function,
    enumerate_tasks,
    output_ratio,
    parse_function,
)
from .classical import classify_triviality

__all__ = [
    "I2", "X", "Z", "XZ",
    "LISTED_PAULIS",
    "BELL",
    "BELL_LABELS",
    "InvalidMeasurementError",
    "UnsupportedProtocolError",
    "ProtocolOrderError",
    "Measurement",
    "M2",
    "M4",
    "encoding_pauli",
    "schmidt_state",
    "apply_encoding",
    "measure",
    "same_up_to_phase",
    "bell_label",
    "PROTOCOL_ROWS",
    "protocol_row",
    "balanced_protocol_success",
    "run_table1_protocol",
    "ObliviousRun",
    "run_oblivious_protocol",
    "affine_form",
    "qubits_per_party",
    "blockwise_success",
    "run_blockwise_protocol",
    "BipartitionResult",
    "orthogonal_bipartition_ratios",
    "SearchResult",
    "falsification_search",
    "verify_theorem1",
]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
XZ = X @ Z
LISTED_PAULIS = (I2, X, XZ, Z)

_s = 1 / math.sqrt(2)
BELL = {
    "phi+": np.array([_s, 0, 0, _s], dtype=complex),
    "phi-": np.array([_s, 0, 0, -_s], dtype=complex),
    "psi+": np.array([0, _s, _s, 0], dtype=complex),
    "psi-": np.array([0, _s, -_s, 0], dtype=complex),
}
BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")
# Bell label -> (x1 ^ y1, x2 ^ y2)
_LABEL_DIFF = {"phi+": (0, 0), "phi-": (1, 0), "psi+": (0, 1), "psi-": (1, 1)}
_DIFF_LABEL = {v: k for k, v in _LABEL_DIFF.items()}

PHASE_TOL = 1e-10


class InvalidMeasurementError(ValueError):
    pass


class UnsupportedProtocolError(ValueError):
    pass


class ProtocolOrderError(RuntimeError):
    pass


@dataclass(frozen=True)
class Measurement:
    effects: tuple[np.ndarray, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.effects) != len(self.labels):
            raise InvalidMeasurementError("one label per effect")
        dim = self.effects[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for E in self.effects:
            if not np.allclose(E, E.conj().T, atol=1e-12):
                raise InvalidMeasurementError("effect is not Hermitian")
            if np.linalg.eigvalsh(E).min() < -1e-12:
                raise InvalidMeasurementError("effect is not positive semidefinite")
            total = total + E
        if not np.allclose(total, np.eye(dim), atol=1e-12):
            raise InvalidMeasurementError("effects do not sum to the identity")

    @classmethod
    def projective(cls, vectors: dict[str, np.ndarray], rest: str | None = None) -> "Measurement":
        effects = [np.outer(v, v.conj()) for v in vectors.values()]
        labels = list(vectors)
        if rest is not None:
            effects.append(np.eye(effects[0].shape[0]) - sum(effects))
            labels.append(rest)
        return cls(tuple(effects), tuple(labels))


M2 = Measurement.projective({"phi+": BELL["phi+"]}, rest="not phi+")
M4 = Measurement.projective(dict(BELL))


def encoding_pauli(bits: Sequence[int]) -> np.ndarray:
    b1, b2 = bits
    return np.linalg.matrix_power(X, b2) @ np.linalg.matrix_power(Z, b1)


def schmidt_state(a: float, b: float) -> np.ndarray:
    if abs(a * a + b * b - 1) > 1e-12:
        raise InputShapeError("a**2 + b**2 must equal 1")
    return np.array([a, 0, 0, b], dtype=complex)


def apply_encoding(state: np.ndarray, op_a: np.ndarray, op_b: np.ndarray) -> np.ndarray:
    out = np.kron(op_a, op_b) @ state
    return out / np.linalg.norm(out)


def measure(state: np.ndarray, m: Measurement) -> np.ndarray:
    probs = np.array([np.real(state.conj() @ E @ state) for E in m.effects])
    return np.clip(probs, 0.0, 1.0)


def same_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = PHASE_TOL) -> bool:
    return abs(abs(np.vdot(u, v)) - 1.0) < tol


def bell_label(state: np.ndarray) -> str:
    for name, vec in BELL.items():
        if same_up_to_phase(state, vec):
            return name
    raise ValueError("state is not a Bell state")


# (F when f = XNOR, F when f = XOR, complement mask on Bob's bits, bit for outcome phi+)
PROTOCOL_ROWS = (
    ("1110", "0111", (0, 0), 0),
    ("0001", "1000", (0, 0), 1),
    ("1000", "0001", (1, 1), 1),
    ("0111", "1110", (1, 1), 0),
    ("0100", "0010", (1, 0), 1),
    ("1011", "1101", (1, 0), 0),
    ("0010", "0100", (0, 1), 1),
    ("1101", "1011", (0, 1), 0),
)


def protocol_row(task: DualLayerTask) -> tuple[tuple[int, int], int]:
    """Bob's complement mask and the bit announced on outcome phi+."""
    if task.n != 2:
        raise UnsupportedProtocolError("the Bell-pair protocols are for n = 2")
    inner = task.inner.bits
    if inner not in ("0110", "1001"):
        raise UnsupportedProtocolError(f"inner function {task.inner} is not XOR/XNOR")
    col = 1 if inner == "0110" else 0
    for row in PROTOCOL_ROWS:
        if row[col] == task.outer.bits:
            return row[2], row[3]
    raise UnsupportedProtocolError(f"outer function {task.outer} has no perfect Bell-pair protocol")


def _pauli(bits, convention: str) -> np.ndarray:
    if convention == "dense":
        return encoding_pauli(bits)
    if convention == "listed":
        return LISTED_PAULIS[2 * bits[0] + bits[1]]
    raise ValueError(convention)


def balanced_protocol_success(task: DualLayerTask, x, y, convention: str = "dense") -> float:
    """Probability that the balanced-f protocol outputs the right bit on ``(x, y)``."""
    mask, on_phi = protocol_row(task)
    x, y = _as_bits(x, 2), _as_bits(y, 2)
    y_hat = tuple(yi ^ mi for yi, mi in zip(y, mask))
    state = apply_encoding(BELL["phi+"], _pauli(x, convention), _pauli(y_hat, convention))
    p_phi, p_rest = measure(state, M2)
    target = task(x, y)
    return float(p_phi if on_phi == target else p_rest)


def run_table1_protocol(task: DualLayerTask, x, y, convention: str = "dense") -> int:
    """Output bit of the balanced-f protocol (outcomes are deterministic)."""
    mask, on_phi = protocol_row(task)
    x, y = _as_bits(x, 2), _as_bits(y, 2)
    y_hat = tuple(yi ^ mi for yi, mi in zip(y, mask))
    state = apply_encoding(BELL["phi+"], _pauli(x, convention), _pauli(y_hat, convention))
    p_phi, _ = measure(state, M2)
    return on_phi if p_phi > 0.5 else 1 - on_phi


class ObliviousRun:
    """Bell-measurement run where F arrives only after the measurement."""

    def __init__(self, x, y, inner: BooleanFunction, convention: str = "dense"):
        if inner.bits not in ("0110", "1001"):
            raise UnsupportedProtocolError("oblivious protocol needs f = XOR or XNOR")
        self.inner = inner
        x, y = _as_bits(x, 2), _as_bits(y, 2)
        self.state = apply_encoding(BELL["phi+"], _pauli(x, convention), _pauli(y, convention))
        self.label: str | None = None

    def distribution(self) -> dict[str, float]:
        return dict(zip(M4.labels, measure(self.state, M4)))

    def measure(self, u: float | None = None) -> str:
        """Record a Bell outcome; ``u`` in [0, 1) samples it, default takes the mode."""
        dist = self.distribution()
        if u is None:
            self.label = max(dist, key=dist.get)
        else:
            acc = 0.0
            for lab, p in dist.items():
                acc += p
                if u < acc:
                    break
            self.label = lab
        return self.label

    def z_bits(self) -> tuple[int, int]:
        if self.label is None:
            raise ProtocolOrderError("finalize called before the Bell measurement")
        d = _LABEL_DIFF[self.label]
        flip = 1 if self.inner.bits == "1001" else 0
        return d[0] ^ flip, d[1] ^ flip

    def finalize(self, outer: BooleanFunction) -> int:
        return outer(*self.z_bits())


def run_oblivious_protocol(x, y, inner: BooleanFunction | str = "XOR") -> ObliviousRun:
    if isinstance(inner, str):
        inner = parse_function(inner, 2)
    run = ObliviousRun(x, y, inner)
    run.measure()
    return run


def affine_form(f: BooleanFunction) -> tuple[int, int, int]:
    """``(alpha, beta, gamma)`` with ``f(a, b) = alpha*a ^ beta*b ^ gamma`` for balanced f."""
    for alpha, beta, gamma in itertools.product((0, 1), repeat=3):
        if (alpha or beta) and all(
            f(a, b) == (alpha * a) ^ (beta * b) ^ gamma for a, b in itertools.product((0, 1), repeat=2)
        ):
            return alpha, beta, gamma
    raise UnsupportedProtocolError(f"inner function {f} is not balanced")


def qubits_per_party(n: int) -> int:
    return -(-n // 2)


def _block_distribution(xa, yb, alpha, beta) -> dict[tuple[int, int], float]:
    """Bell outcome distribution, keyed by the decoded difference bits."""
    xa = tuple(alpha * v for v in xa)
    yb = tuple(beta * v for v in yb)
    state = apply_encoding(BELL["phi+"], encoding_pauli(xa), encoding_pauli(yb))
    probs = measure(state, M4)
    return {_LABEL_DIFF[lab]: float(p) for lab, p in zip(M4.labels, probs)}


def _single_distribution(xb, yb, alpha, beta) -> dict[tuple[int], float]:
    """Unentangled qubits |alpha*x>|beta*y> read in the computational basis."""
    state = np.zeros(4, dtype=complex)
    state[2 * (alpha * xb) + beta * yb] = 1.0
    probs = np.abs(state) ** 2
    out: dict[tuple[int], float] = {}
    for idx, p in enumerate(probs):
        key = ((idx >> 1) ^ (idx & 1),)
        out[key] = out.get(key, 0.0) + float(p)
    return out


def _blockwise_outcomes(task: DualLayerTask, x, y):
    alpha, beta, gamma = affine_form(task.inner)
    n = task.n
    blocks = []
    for k in range(0, n - 1, 2):
        blocks.append(_block_distribution(x[k:k + 2], y[k:k + 2], alpha, beta))
    if n % 2:
        blocks.append(_single_distribution(x[-1], y[-1], alpha, beta))
    return blocks, gamma


def blockwise_success(task: DualLayerTask, x, y) -> float:
    """Exact success probability of the blockwise Bell-pair protocol on ``(x, y)``."""
    if task.n < 2:
        raise UnsupportedArityError("n must be at least 2")
    x, y = _as_bits(x, task.n), _as_bits(y, task.n)
    blocks, gamma = _blockwise_outcomes(task, x, y)
    target = task(x, y)
    total = 0.0
    for combo in itertools.product(*(b.items() for b in blocks)):
        p = math.prod(pr for _, pr in combo)
        if p == 0.0:
            continue
        z = tuple(v ^ gamma for bits, _ in combo for v in bits)
        total += p * (task.outer(*z) == target)
    return total


def run_blockwise_protocol(task: DualLayerTask, x, y) -> int:
    """Output bit of the blockwise protocol, taking the most likely outcome per block."""
    x, y = _as_bits(x, task.n), _as_bits(y, task.n)
    blocks, gamma = _blockwise_outcomes(task, x, y)
    z = tuple(v ^ gamma for b in blocks for v in max(b, key=b.get))
    return task.outer(*z)


@dataclass
class BipartitionResult:
    ratios: set[tuple[int, int]]
    degenerate: bool
    classes: list[list[tuple[int, int]]]
    components: list[list[int]]


def encoded_states(a: float, b: float, paulis=LISTED_PAULIS) -> dict[tuple[int, int], np.ndarray]:
    psi = schmidt_state(a, b)
    return {(i, j): apply_encoding(psi, paulis[i], paulis[j]) for i in range(4) for j in range(4)}


def orthogonal_bipartition_ratios(a: float, b: float) -> BipartitionResult:
    """Splits of the 16 Pauli-encoded states into two mutually orthogonal groups.

    States equal up to phase are merged; merged classes that are not
    orthogonal must land on the same side, so the achievable splits are
    the subset sums of the non-orthogonality components' multiplicities.
    """
    states = encoded_states(a, b)
    keys = list(states)
    classes: list[list[tuple[int, int]]] = []
    for k in keys:
        for cl in classes:
            if same_up_to_phase(states[cl[0]], states[k]):
                cl.append(k)
                break
        else:
            classes.append([k])
    degenerate = min(abs(a), abs(b)) < 1e-12
    reps = [states[cl[0]] for cl in classes]
    m = len(reps)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if abs(np.vdot(reps[i], reps[j])) >= PHASE_TOL:
                parent[find(i)] = find(j)
    comps: dict[int, list[int]] = {}
    for i in range(m):
        comps.setdefault(find(i), []).append(i)
    components = list(comps.values())
    sizes = [sum(len(classes[i]) for i in c) for c in components]
    sums = {0}
    for s in sizes:
        sums |= {t + s for t in sums}
    ratios = {(s, 16 - s) for s in sums}
    return BipartitionResult(ratios, degenerate, classes, components)


@dataclass
class SearchResult:
    task: str
    samples: int
    best: float
    best_params: dict = field(default_factory=dict)


def _haar_unitaries(rng: np.random.Generator, count: int) -> np.ndarray:
    z = (rng.standard_normal((count, 2, 2)) + 1j * rng.standard_normal((count, 2, 2))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def _projector_success(states: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Best success of 'project onto the span of one target class' decoders.

    ``states``: (S, 16, 4) encoded states; returns (S,) best mean success.
    """
    best = np.zeros(states.shape[0])
    for label in (0, 1):
        sel = states[:, targets == label, :]  # (S, k, 4)
        if sel.shape[1] == 0:
            continue
        # orthonormal basis of the span via SVD
        u, s, vh = np.linalg.svd(sel, full_matrices=False)
        rank_mask = s > 1e-9 * s[:, :1]
        basis = vh.conj() * rank_mask[:, :, None]  # rows span the subspace
        overlap = np.einsum("skd,snd->snk", basis.conj(), states)
        p_in = np.clip((np.abs(overlap) ** 2).sum(axis=2), 0.0, 1.0)  # (S, 16)
        succ = np.where(targets == label, p_in, 1.0 - p_in).mean(axis=1)
        best = np.maximum(best, succ)
    return best


def falsification_search(
    task: DualLayerTask,
    seed: int = 0,
    grid: int = 50,
    haar: int = 200,
    pauli: int = 64,
) -> SearchResult:
    """Random strategies (Schmidt state, local unitaries, projective decoders).

    For each of ``grid`` Schmidt angles in (0, pi/4], draws ``haar`` Haar
    local-unitary assignments and ``pauli`` random Pauli assignments.  Each
    strategy is scored with the two 'span of one output class' projective
    decoders.  Deterministic given ``seed``.
    """
    if task.n != 2:
        raise UnsupportedArityError("search is implemented for n = 2")
    targets = np.array([task(bits_of(x, 2), bits_of(y, 2)) for x in range(4) for y in range(4)])
    root = np.random.SeedSequence(seed)
    best, best_params, total = -1.0, {}, 0
    thetas = np.linspace(math.pi / 4 / grid, math.pi / 4, grid)
    paulis = np.stack([encoding_pauli(bits_of(i, 2)) for i in range(4)])
    for gi, (theta, child) in enumerate(zip(thetas, root.spawn(grid))):
        rng = np.random.default_rng(child)
        psi = np.array([math.cos(theta), 0, 0, math.sin(theta)], dtype=complex)
        ua = _haar_unitaries(rng, haar * 4).reshape(haar, 4, 2, 2)
        ub = _haar_unitaries(rng, haar * 4).reshape(haar, 4, 2, 2)
        pa = paulis[rng.integers(0, 4, size=(pauli, 4))]
        pb = paulis[rng.integers(0, 4, size=(pauli, 4))]
        UA = np.concatenate([ua, pa])
        UB = np.concatenate([ub, pb])
        ops = np.einsum("sxab,sycd->sxyacbd", UA, UB).reshape(UA.shape[0], 16, 4, 4)
        states = ops @ psi
        scores = _projector_success(states, targets)
        total += len(scores)
        i = int(scores.argmax())
        if scores[i] > best:
            best = float(scores[i])
            best_params = {"theta": float(theta), "grid_index": gi, "sample": i}
    return SearchResult(str(task), total, best, best_params)


def _outcome_record(task: DualLayerTask, x, y) -> dict:
    mask, on_phi = protocol_row(task)
    y_hat = tuple(yi ^ mi for yi, mi in zip(y, mask))
    state = apply_encoding(BELL["phi+"], encoding_pauli(x), encoding_pauli(y_hat))
    probs = measure(state, M2)
    return {
        "x": "".join(map(str, x)),
        "y": "".join(map(str, y)),
        "outcomes": dict(zip(M2.labels, map(float, probs))),
        "output": run_table1_protocol(task, x, y),
        "target": task(x, y),
    }


def verify_theorem1(seed: int = 0, grid: int = 50, haar: int = 200, pauli: int = 64, search: bool = True) -> dict:
    """Both directions of the n = 2 quantum characterization.

    Balanced f: the Bell-pair protocol is perfect on all inputs.  Unbalanced
    f: the output ratio rules out the 1:3 / 1:1 splits and the randomized
    search stays below 1.
    """
    balanced, unbalanced = [], []
    for task in enumerate_tasks(2):
        if classify_triviality(task).trivial:
            continue
        row = {"task": str(task)}
        if classify_function(task.inner).kind == "balanced":
            dev = max(
                abs(1.0 - balanced_protocol_success(task, x, y))
                for x in all_strings(2)
                for y in all_strings(2)
            )
            row["max_deviation"] = dev
            row["per_input"] = [_outcome_record(task, x, y) for x in all_strings(2) for y in all_strings(2)]
            row["perfect"] = dev < 1e-12
            balanced.append(row)
        else:
            ratio = output_ratio(task)
            row["ratio"] = ratio
            row["ratio_excluded"] = ratio not in ((4, 12), (12, 4), (8, 8))
            if search:
                res = falsification_search(task, seed=seed, grid=grid, haar=haar, pauli=pauli)
                row["search_best"] = res.best
                row["search_samples"] = res.samples
            unbalanced.append(row)
    ok = all(r["perfect"] for r in balanced) and all(r["ratio_excluded"] for r in unbalanced)
    if search:
        ok = ok and all(r["search_best"] < 1 - 1e-3 for r in unbalanced)
    return {
        "nontrivial": len(balanced) + len(unbalanced),
        "balanced": len(balanced),
        "protocol_rows_covered": 2 * len(PROTOCOL_ROWS),
        "passed": ok,
        "balanced_tasks": balanced,
        "unbalanced_tasks": unbalanced,
    }
