"""Regular-polygon GPTs and their two extreme bipartite compositions.

Single-system states and effects are 3-vectors with the pairing
``p(e|w) = e . w``.  Bipartite states and effects are 3x3 matrices paired
by ``Tr(E^T W)``, which factorizes on products ``g_A g_B^T`` and
``w_A w_B^T``; local transformations act as ``W -> T_A W T_B^T`` and the
swap as transposition.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "DomainError",
    "Composition",
    "PolygonModel",
    "BipartiteGptModel",
    "build_polygon",
    "radius",
    "probability",
    "transform",
    "apply_transform",
    "compose",
    "transform_index",
    "product_state",
    "product_effect",
    "entangled_state",
    "entangled_effect",
    "pairing",
    "local_transform_bipartite",
    "swap",
    "build_bipartite",
    "consistency_check",
    "SIGNS",
]

SIGNS = (1, -1)
U = np.array([0.0, 0.0, 1.0])
O = np.zeros(3)
TOL = 1e-12


class DomainError(ValueError):
    pass


class Composition(enum.Enum):
    TYPE_I = "type1"  # entangled states, product effects
    TYPE_II = "type2"  # product states, entangled effects

    @classmethod
    def parse(cls, s: str) -> "Composition":
        s = s.lower().replace("-", "").replace("_", "")
        return {"type1": cls.TYPE_I, "typei": cls.TYPE_I, "type2": cls.TYPE_II, "typeii": cls.TYPE_II}[s]


def radius(n: int) -> float:
    return math.sqrt(1.0 / math.cos(math.pi / n))


def _check_n(n: int):
    if n < 3:
        raise DomainError("a polygon needs at least 3 vertices")


def transform(n: int, k: int, p: int) -> np.ndarray:
    """Rotation (p=+1) or reflection (p=-1) by index k."""
    _check_n(n)
    if p not in SIGNS:
        raise DomainError("p must be +1 or -1")
    c, s = math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)
    return np.array([[c, -p * s, 0.0], [s, p * c, 0.0], [0.0, 0.0, 1.0]])


def compose(n: int, t1: tuple[int, int], t2: tuple[int, int]) -> tuple[int, int]:
    """Index of ``T[t1] @ T[t2]`` in the dihedral group (exact index arithmetic)."""
    (k1, p1), (k2, p2) = t1, t2
    return ((k1 + p1 * k2) % n, p1 * p2)


def transform_index(n: int, M: np.ndarray, tol: float = 1e-9) -> tuple[int, int]:
    for k in range(n):
        for p in SIGNS:
            if np.allclose(M, transform(n, k, p), atol=tol):
                return k, p
    raise DomainError("matrix is not in the dihedral group")


@dataclass(frozen=True)
class PolygonModel:
    n: int

    def __post_init__(self):
        _check_n(self.n)

    @property
    def parity(self) -> str:
        return "even" if self.n % 2 == 0 else "odd"

    @property
    def r(self) -> float:
        return radius(self.n)

    unit = U
    zero = O

    @cached_property
    def states(self) -> np.ndarray:
        n, r = self.n, self.r
        a = 2 * np.pi * np.arange(n) / n
        return np.stack([r * np.cos(a), r * np.sin(a), np.ones(n)], axis=1)

    @cached_property
    def effects(self) -> np.ndarray:
        n, r = self.n, self.r
        j = np.arange(n)
        if n % 2 == 0:
            a = (2 * j - 1) * np.pi / n
            return 0.5 * np.stack([r * np.cos(a), r * np.sin(a), np.ones(n)], axis=1)
        a = 2 * j * np.pi / n
        return np.stack([r * np.cos(a), r * np.sin(a), np.ones(n)], axis=1) / (1 + r * r)

    @cached_property
    def complements(self) -> np.ndarray:
        return U[None, :] - self.effects

    def complement_index(self, j: int) -> int:
        """Even n: the effect index equal to ``u - e_j``."""
        if self.n % 2:
            raise DomainError("complements are extremal effects only for even n")
        return (j + self.n // 2) % self.n

    @cached_property
    def transforms(self) -> dict[tuple[int, int], np.ndarray]:
        return {(k, p): transform(self.n, k, p) for k in range(self.n) for p in SIGNS}

    @cached_property
    def single_effects(self) -> np.ndarray:
        """Generators of the effect set: O, u, e_j and their complements."""
        return np.vstack([O[None], U[None], self.effects, self.complements])

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "parity": self.parity,
            "states": self.states.tolist(),
            "effects": self.effects.tolist(),
            "complements": self.complements.tolist(),
            "unit": U.tolist(),
            "zero": O.tolist(),
        }


def build_polygon(n: int) -> PolygonModel:
    return PolygonModel(n)


def probability(e: np.ndarray, w: np.ndarray) -> float:
    return float(np.dot(e, w))


def apply_transform(t: np.ndarray, w: np.ndarray) -> np.ndarray:
    return t @ w


def product_state(wa: np.ndarray, wb: np.ndarray) -> np.ndarray:
    return np.outer(wa, wb)


product_effect = product_state


def pairing(E: np.ndarray, W: np.ndarray) -> float:
    return float(np.sum(E * W))


def _block(angle: float, same: bool) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    if same:
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return np.array([[c, s, 0.0], [s, -c, 0.0], [0.0, 0.0, 1.0]])


def _entangled_block(n: int, k: int, l: int, p: int, q: int) -> np.ndarray:
    _check_n(n)
    if not (0 <= k < n and 0 <= l < n):
        raise DomainError("k, l must lie in 0..n-1")
    if p not in SIGNS or q not in SIGNS:
        raise DomainError("p, q must be +1 or -1")
    base = 2 * math.pi * ((k - l) if p == q else (k + l)) / n
    if n % 2 == 0:
        base -= p * math.pi / n
    return _block(base, p == q)


def entangled_state(n: int, k: int, l: int, p: int, q: int) -> np.ndarray:
    return _entangled_block(n, k, l, p, q)


def entangled_effect(n: int, k: int, l: int, p: int, q: int) -> np.ndarray:
    scale = 0.5 if n % 2 == 0 else 1.0 / (1.0 + radius(n) ** 2)
    return scale * _entangled_block(n, k, l, p, q)


def local_transform_bipartite(ta: np.ndarray, tb: np.ndarray, W: np.ndarray) -> np.ndarray:
    return ta @ W @ tb.T


def swap(W: np.ndarray) -> np.ndarray:
    return W.T


def _all_entangled(n: int, fn) -> dict[tuple[int, int, int, int], np.ndarray]:
    return {
        (k, l, p, q): fn(n, k, l, p, q)
        for k, l in itertools.product(range(n), repeat=2)
        for p, q in itertools.product(SIGNS, repeat=2)
    }


@dataclass
class BipartiteGptModel:
    base: PolygonModel
    composition: Composition
    states: dict = field(init=False)
    effects: dict = field(init=False)

    def __post_init__(self):
        m = self.base
        n = m.n
        prod_states = {("prod", i, j): np.outer(m.states[i], m.states[j]) for i in range(n) for j in range(n)}
        singles = {"O": O, "u": U}
        singles.update({f"e{j}": m.effects[j] for j in range(n)})
        singles.update({f"e~{j}": m.complements[j] for j in range(n)})
        prod_effects = {("prod", a, b): np.outer(ga, gb) for a, ga in singles.items() for b, gb in singles.items()}
        if self.composition is Composition.TYPE_I:
            self.states = dict(prod_states)
            self.states.update({("ent",) + key: W for key, W in _all_entangled(n, entangled_state).items()})
            self.effects = prod_effects
        else:
            self.states = prod_states
            self.effects = dict(prod_effects)
            self.effects.update({("ent",) + key: E for key, E in _all_entangled(n, entangled_effect).items()})
            if n % 2 == 0:
                for i, j in itertools.product(range(n), repeat=2):
                    ei, ej = m.effects[i], m.effects[j]
                    self.effects[("club", i, j)] = np.outer(ei, ej) + np.outer(U - ei, U - ej)

    @property
    def n(self) -> int:
        return self.base.n

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "parity": self.base.parity,
            "composition": self.composition.value,
            "states": [{"key": list(map(str, k)), "matrix": W.tolist()} for k, W in self.states.items()],
            "effects": [{"key": list(map(str, k)), "matrix": E.tolist()} for k, E in self.effects.items()],
        }


def build_bipartite(n: int, composition: Composition | str) -> BipartiteGptModel:
    if isinstance(composition, str):
        composition = Composition.parse(composition)
    return BipartiteGptModel(build_polygon(n), composition)


def probability_table(model: BipartiteGptModel) -> np.ndarray:
    E = np.stack(list(model.effects.values())).reshape(len(model.effects), 9)
    W = np.stack(list(model.states.values())).reshape(len(model.states), 9)
    return E @ W.T


def consistency_check(model: BipartiteGptModel, tol: float = TOL) -> bool:
    """Every effect/state pair admitted by the composition gives a probability in [0, 1]."""
    P = probability_table(model)
    return bool(P.min() >= -tol and P.max() <= 1 + tol)
