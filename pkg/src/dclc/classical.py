"""Exhaustive classical strategies for DCLC(2).

With the operational-dimension bound ``2**(n-1)`` each party sends one
bit when n = 2, so a deterministic strategy is a pair of encoders
``{0,1}^2 -> {0,1}`` and a decoder ``{0,1}^2 -> {0,1}``: 16 * 16 * 16 = 4096
strategies per task.  Shared randomness is irrelevant for perfect
computation (every component of a perfect mixture must itself be perfect)
and cannot beat the deterministic optimum by convexity.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .boolfn import (
    DualLayerTask,
    InputShapeError,
    UnsupportedArityError,
    all_strings,
    bits_of,
    corollary1_sufficient_trivial,
    enumerate_tasks,
    index_of,
)

__all__ = [
    "ClassicalStrategy",
    "Verdict",
    "TrivialityVerdict",
    "Census",
    "strategy_success",
    "all_strategies",
    "perfect_strategies",
    "classify_triviality",
    "census",
    "max_classical_success",
    "best_strategy",
    "mixture_success",
    "verify_proposition1",
]


@dataclass(frozen=True)
class ClassicalStrategy:
    """Encoders map input strings (as integers) to messages; decode reads a message pair."""

    n: int
    encode_a: tuple[int, ...]
    encode_b: tuple[int, ...]
    decode: tuple[tuple[int, ...], ...]  # decode[a][b]

    def __post_init__(self):
        alphabet = 2 ** (self.n - 1)
        for enc in (self.encode_a, self.encode_b):
            if len(enc) != 2**self.n:
                raise InputShapeError("encoder must be defined on all input strings")
            if any(not 0 <= m < alphabet for m in enc):
                raise InputShapeError(f"message outside alphabet of size {alphabet}")
        if len(self.decode) != alphabet or any(len(r) != alphabet for r in self.decode):
            raise InputShapeError("decoder must be an alphabet x alphabet table")

    @classmethod
    def from_tables(cls, enc_a: Sequence[int], enc_b: Sequence[int], dec: Sequence[int]) -> "ClassicalStrategy":
        """n = 2 shorthand: 4-entry encoders and a 4-entry decoder indexed ``2a + b``."""
        return cls(2, tuple(enc_a), tuple(enc_b), ((dec[0], dec[1]), (dec[2], dec[3])))

    def output(self, x: int, y: int) -> int:
        return self.decode[self.encode_a[x]][self.encode_b[y]]


def strategy_success(task: DualLayerTask, s: ClassicalStrategy) -> Fraction:
    if s.n != task.n:
        raise InputShapeError(f"strategy for n={s.n} used on a task with n={task.n}")
    table = task.table()
    N = 2**task.n
    hits = sum(s.output(x, y) == table[x][y] for x in range(N) for y in range(N))
    return Fraction(hits, N * N)


_FUNCS4 = np.array([bits_of(i, 4) for i in range(16)], dtype=np.int8)  # [k, input]


def all_strategies() -> list[ClassicalStrategy]:
    return [
        ClassicalStrategy.from_tables(a, b, d)
        for a, b, d in itertools.product(_FUNCS4.tolist(), repeat=3)
    ]


def _cell_counts(task: DualLayerTask) -> np.ndarray:
    """counts[ea, eb, ma, mb, t]: number of inputs landing on message pair (ma, mb) with target t."""
    if task.n != 2:
        raise UnsupportedArityError("exhaustive search is implemented for n = 2 only")
    T = np.array(task.table(), dtype=np.int64)
    counts = np.zeros((16, 16, 2, 2, 2), dtype=np.int64)
    ia = np.arange(16)[:, None]
    ib = np.arange(16)[None, :]
    for x in range(4):
        for y in range(4):
            counts[ia, ib, _FUNCS4[ia, x], _FUNCS4[ib, y], T[x, y]] += 1
    return counts


def _perfect_encoder_pairs(counts: np.ndarray) -> np.ndarray:
    # perfect iff no message pair receives both targets
    clash = (counts[..., 0] > 0) & (counts[..., 1] > 0)
    return ~clash.any(axis=(2, 3))


def perfect_strategies(task: DualLayerTask) -> list[ClassicalStrategy]:
    counts = _cell_counts(task)
    out = []
    for ia, ib in zip(*np.nonzero(_perfect_encoder_pairs(counts))):
        cell = counts[ia, ib]
        fixed = {(a, b): int(cell[a, b, 1] > 0) for a in (0, 1) for b in (0, 1) if cell[a, b].sum()}
        free = [(a, b) for a in (0, 1) for b in (0, 1) if (a, b) not in fixed]
        for bits in itertools.product((0, 1), repeat=len(free)):
            d = dict(fixed)
            d.update(zip(free, bits))
            out.append(
                ClassicalStrategy.from_tables(
                    _FUNCS4[ia], _FUNCS4[ib], [d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)]]
                )
            )
    return out


class Verdict(enum.Enum):
    NO_COMM = "no_comm"
    ONE_WAY = "one_way"
    TWO_WAY = "two_way"
    NONTRIVIAL = "nontrivial"


@dataclass(frozen=True)
class TrivialityVerdict:
    verdict: Verdict
    side: str | None = None  # "A" or "B" for one-way

    @property
    def trivial(self) -> bool:
        return self.verdict is not Verdict.NONTRIVIAL


def classify_triviality(task: DualLayerTask) -> TrivialityVerdict:
    """Finest strategy class achieving success 1.

    No-comm: constant decoder.  One-way: decoder reading only one message.
    Two-way: any of the 4096 strategies.
    """
    counts = _cell_counts(task)
    T = np.array(task.table())
    if T.min() == T.max():
        return TrivialityVerdict(Verdict.NO_COMM)
    # one-way from A: decoder ignores b, so collapse over mb
    for side, axis in (("A", 3), ("B", 2)):
        c = counts.sum(axis=axis)  # [ea, eb, m, t]
        ok = ~((c[..., 0] > 0) & (c[..., 1] > 0)).any(axis=2)
        if ok.any():
            return TrivialityVerdict(Verdict.ONE_WAY, side)
    if _perfect_encoder_pairs(counts).any():
        return TrivialityVerdict(Verdict.TWO_WAY)
    return TrivialityVerdict(Verdict.NONTRIVIAL)


@dataclass(frozen=True)
class Census:
    total: int
    trivial: int
    no_comm: int
    one_way: int
    two_way: int
    nontrivial: int

    def as_dict(self) -> dict:
        return dict(
            total=self.total,
            trivial=self.trivial,
            no_comm=self.no_comm,
            one_way=self.one_way,
            two_way=self.two_way,
            nontrivial=self.nontrivial,
        )


def census(n: int = 2) -> Census:
    tally = {v: 0 for v in Verdict}
    for task in enumerate_tasks(n):
        tally[classify_triviality(task).verdict] += 1
    total = sum(tally.values())
    return Census(
        total=total,
        trivial=total - tally[Verdict.NONTRIVIAL],
        no_comm=tally[Verdict.NO_COMM],
        one_way=tally[Verdict.ONE_WAY],
        two_way=tally[Verdict.TWO_WAY],
        nontrivial=tally[Verdict.NONTRIVIAL],
    )


def best_strategy(task: DualLayerTask) -> tuple[ClassicalStrategy, Fraction]:
    """An optimal deterministic strategy: majority decoding per message cell."""
    counts = _cell_counts(task)
    score = counts.max(axis=-1).sum(axis=(2, 3))
    ia, ib = np.unravel_index(int(score.argmax()), score.shape)
    cell = counts[ia, ib]
    dec = [int(cell[a, b, 1] > cell[a, b, 0]) for a in (0, 1) for b in (0, 1)]
    s = ClassicalStrategy.from_tables(_FUNCS4[ia], _FUNCS4[ib], dec)
    return s, Fraction(int(score.max()), 16)


def max_classical_success(task: DualLayerTask) -> Fraction:
    return best_strategy(task)[1]


def mixture_success(task: DualLayerTask, strategies: Sequence[ClassicalStrategy], weights: Sequence[float]) -> float:
    """Success of a shared-randomness mixture of deterministic strategies."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    return float(sum(wi * float(strategy_success(task, s)) for wi, s in zip(w, strategies)))


def verify_proposition1() -> bool:
    """Exhaustive verdict agrees with the criteria predicate on all 256 tasks."""
    return all(
        classify_triviality(t).trivial == corollary1_sufficient_trivial(t)
        for t in enumerate_tasks(2)
    )
