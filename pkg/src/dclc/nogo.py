"""Perfect-decoding infeasibility for polygon compositions.

A DCLC(2) task is computable in a composition iff some choice of local
reversible encodings makes the 16 encoded states separable by a valid
two-outcome effect ``E`` with ``p(E|state) = F(f(x, y))`` exactly.  That is
a linear feasibility problem in ``E``; this module sets it up, decides it
with certificates, and sweeps it over every encoding.

Sweep reductions (all exact):

* Product shared states.  A local transformation maps vertices to vertices,
  so the encoded states are ``w_a(x) (x) w_b(y)`` for vertex maps ``a, b``.
  Feasibility depends only on the labelled grid of occupied vertex pairs,
  and is invariant under the local dihedral action because both cones are.
  Grids are canonicalized under that action and each class is decided once.
* Entangled shared state (Type-I).  Every state in the orbit of
  ``w00(++)`` is ``T_g w00(++)``, so the orbit has ``2n`` elements.  The
  feasible {0, 1, unlabelled} labelings of the orbit are enumerated once by
  depth-first search with LP pruning (feasibility is closed under removing
  labels).  A task is feasible iff for some labeling and some Alice
  assignment every target column is produced by some Bob transformation.
  Alice's first transformation is fixed to the identity: left-multiplying
  all of Alice's choices by a group element permutes the orbit by a cone
  automorphism, which maps feasible labelings to feasible labelings.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .boolfn import DualLayerTask, enumerate_tasks, parse_task
from .classical import classify_triviality, perfect_strategies
from .lp import DEFAULT_TOL, LinearSystem, LPResult, Status, maximize, solve_feasibility
from .polygon import (
    SIGNS,
    U,
    BipartiteGptModel,
    Composition,
    DomainError,
    build_bipartite,
    build_polygon,
    entangled_effect,
    entangled_state,
    pairing,
    radius,
    transform,
)

__all__ = [
    "IndeterminateError",
    "EncodingAssignment",
    "GeneratorCone",
    "FacetCone",
    "DecodingFeasibilityProblem",
    "encoded_states",
    "decide",
    "perfect_decoding_feasible",
    "max_success",
    "optimal_effect",
    "verify_odd_type1_positivity",
    "verify_type2_click_table",
    "odd_click_sets",
    "verify_even_formulas",
    "verify_club_identity",
    "even_click_sets",
    "EVEN_CLICK_TABLE",
    "UNAMBIGUOUS_SECTORS",
    "verify_even_condition_tables",
    "quad_endpoint_ratios",
    "TaskRecord",
    "NoGoReport",
    "Sweeper",
    "verify_theorem2",
    "proposition2_operational_check",
    "classical_witness_states",
]

Transform = tuple[int, int]
SECTORS = ((1, 1), (-1, -1), (1, -1), (-1, 1))
CLICK_TOL = 1e-9


class IndeterminateError(RuntimeError):
    """The LP solver could neither certify feasibility nor infeasibility."""


def _key(M: np.ndarray) -> bytes:
    return (np.round(np.asarray(M, dtype=float), 9) + 0.0).tobytes()  # +0.0 folds -0.0


def group(n: int) -> list[Transform]:
    """Dihedral transformations with the identity first."""
    return [(k, p) for p in SIGNS for k in range(n)]


# -- encodings ---------------------------------------------------------------


@dataclass(frozen=True)
class EncodingAssignment:
    alice: tuple[Transform, Transform, Transform, Transform]
    bob: tuple[Transform, Transform, Transform, Transform]

    def __post_init__(self):
        for side in (self.alice, self.bob):
            if len(side) != 4 or any(p not in SIGNS for _, p in side):
                raise DomainError("an assignment maps the four inputs to transformations (k, p)")


def encoded_states(
    model: BipartiteGptModel,
    shared: np.ndarray,
    assign_a: Sequence[Transform],
    assign_b: Sequence[Transform],
) -> np.ndarray:
    """``T_A(x) shared T_B(y)^T`` for all 16 ``(x, y)``, indexed ``4x + y``."""
    shared = np.asarray(shared, dtype=float)
    if not any(np.allclose(shared, W, atol=1e-12) for W in model.states.values()):
        raise DomainError("shared state is not an extreme state of the composition")
    n = model.n
    TA = [transform(n, k, p) for k, p in assign_a]
    TB = [transform(n, k, p) for k, p in assign_b]
    return np.stack([TA[x] @ shared @ TB[y].T for x in range(4) for y in range(4)])


# -- cones and feasibility problems -----------------------------------------


def _single_generators(n: int) -> np.ndarray:
    m = build_polygon(n)
    gens, seen = [], set()
    for g in np.vstack([U[None], m.effects, m.complements]):
        k = _key(g)
        if k not in seen:
            seen.add(k)
            gens.append(g)
    return np.array(gens)


@dataclass
class GeneratorCone:
    """Conic hull of ``g_A g_B^T`` with ``g`` in {u, e_i, complements}."""

    generators: np.ndarray  # (m, 3, 3)

    @classmethod
    def product(cls, n: int) -> "GeneratorCone":
        g = _single_generators(n)
        return cls(np.einsum("ai,bj->abij", g, g).reshape(-1, 3, 3))

    def system(self, states: np.ndarray, targets: np.ndarray) -> LinearSystem:
        G = self.generators.reshape(len(self.generators), 9)
        m = len(G)
        S = np.asarray(states).reshape(len(states), 9)
        A_eq = np.vstack(
            [
                np.hstack([G.T, G.T]),  # E + (u u^T - E) = u u^T
                np.hstack([S @ G.T, np.zeros((len(S), m))]),
            ]
        )
        b_eq = np.concatenate([np.outer(U, U).ravel(), targets])
        return LinearSystem(A_eq, b_eq)

    def effect(self, x: np.ndarray) -> np.ndarray:
        m = len(self.generators)
        return np.tensordot(x[:m], self.generators, axes=1)


@dataclass
class FacetCone:
    """Effects bounded in [0, 1] on every product of vertices."""

    extremes: np.ndarray  # (N, 3, 3)

    @classmethod
    def product_states(cls, n: int) -> "FacetCone":
        w = build_polygon(n).states
        return cls(np.einsum("ai,bj->abij", w, w).reshape(-1, 3, 3))

    def system(self, states: np.ndarray, targets: np.ndarray) -> LinearSystem:
        P = self.extremes.reshape(len(self.extremes), 9)
        S = np.asarray(states).reshape(len(states), 9)
        A_ub = np.vstack([P, -P])
        b_ub = np.concatenate([np.ones(len(P)), np.zeros(len(P))])
        free = np.full(9, -np.inf)
        return LinearSystem(S, np.asarray(targets, dtype=float), A_ub, b_ub, lo=free)

    def effect(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(3, 3)


@dataclass
class DecodingFeasibilityProblem:
    encoded_states: np.ndarray  # (k, 3, 3)
    targets: np.ndarray  # (k,) bits
    cone: GeneratorCone | FacetCone

    def __post_init__(self):
        self.encoded_states = np.asarray(self.encoded_states, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if len(self.encoded_states) != len(self.targets):
            raise ValueError("one target per encoded state")

    def deduplicated(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Distinct states with their targets; None if a state carries both bits."""
        seen: dict[bytes, float] = {}
        states, targets = [], []
        for W, t in zip(self.encoded_states, self.targets):
            k = _key(W)
            if k in seen:
                if seen[k] != t:
                    return None
                continue
            seen[k] = t
            states.append(W)
            targets.append(t)
        return np.array(states), np.array(targets)


def decide(problem: DecodingFeasibilityProblem, tol: float = DEFAULT_TOL) -> LPResult:
    if problem.targets.min() == problem.targets.max():
        # E = u u^T or E = 0
        E = np.outer(U, U) * problem.targets[0]
        return LPResult(Status.FEASIBLE, x=E.ravel(), violation=0.0, message="constant targets")
    dd = problem.deduplicated()
    if dd is None:
        return LPResult(Status.INFEASIBLE, message="identical encoded states need different outputs")
    states, targets = dd
    return solve_feasibility(problem.cone.system(states, targets), tol)


def perfect_decoding_feasible(problem: DecodingFeasibilityProblem, tol: float = DEFAULT_TOL) -> bool:
    r = decide(problem, tol)
    if r.status is Status.INDETERMINATE:
        raise IndeterminateError(r.message)
    return r.feasible


def optimal_effect(problem: DecodingFeasibilityProblem) -> tuple[float, np.ndarray]:
    """Best average probability of the right output, and an effect attaining it."""
    S, t = problem.encoded_states, problem.targets
    sys = problem.cone.system(S[:0], t[:0])
    if isinstance(problem.cone, FacetCone):
        Eflat = np.eye(9)
    else:
        m = len(problem.cone.generators)
        Eflat = np.hstack([problem.cone.generators.reshape(m, 9).T, np.zeros((9, m))])
    # success = mean(t p + (1 - t)(1 - p)) = mean(1 - t) + mean((2t - 1) p)
    w = (2 * t - 1) @ S.reshape(len(S), 9) / len(S)
    out = maximize(sys, w @ Eflat)
    if out is None:
        return float("nan"), np.full((3, 3), np.nan)
    return float(np.mean(1 - t) + out[0]), (Eflat @ out[1]).reshape(3, 3)


def max_success(problem: DecodingFeasibilityProblem) -> float:
    """Best average probability of the right output with one valid effect."""
    return optimal_effect(problem)[0]


# -- probability identities and click tables -------------------------------


def verify_odd_type1_positivity(n: int) -> float:
    """Minimum of ``p(e~_i (x) e~_j | w_kl(p, q))`` over all indices."""
    if n % 2 == 0 or n < 5:
        raise DomainError("defined for odd n >= 5")
    comp = build_polygon(n).complements
    states = np.stack([entangled_state(n, k, l, p, q) for k in range(n) for l in range(n) for p, q in SECTORS])
    vals = np.einsum("ai,sij,bj->sab", comp, states, comp)
    return float(vals.min())


def odd_click_sets(n: int) -> tuple[set, set]:
    """Vertex pairs ``(k, s)`` where ``e00(++)`` resp. its complement clicks sharply."""
    m = build_polygon(n)
    E = entangled_effect(n, 0, 0, 1, 1)
    P = m.states @ E @ m.states.T  # p(E | w_k (x) w_s)
    on = {(k, s) for k in range(n) for s in range(n) if abs(P[k, s] - 1) < CLICK_TOL}
    off = {(k, s) for k in range(n) for s in range(n) if abs(P[k, s]) < CLICK_TOL}
    return on, off


def verify_type2_click_table(n: int) -> bool:
    """Sharp clicks of ``{e00(++), complement}`` on product vertex pairs.

    Expected: the effect clicks iff ``k = s``; the complement iff
    ``k = s + (n +- 1)/2 (mod n)``.  The rows for the other input pairs
    differ only in which vertex indices are named, so each is the same set
    equality on its own index pair.
    """
    if n % 2 == 0 or n < 5:
        raise DomainError("defined for odd n >= 5")
    on, off = odd_click_sets(n)
    exp_on = {(s, s) for s in range(n)}
    exp_off = {((s + d) % n, s) for s in range(n) for d in ((n - 1) // 2, (n + 1) // 2)}
    rows = ("x,y", "x',y'", "x,y'", "x',y")
    return all(on == exp_on and off == exp_off for _ in rows)


def club_effect(n: int, i: int = 0, j: int = 0) -> np.ndarray:
    m = build_polygon(n)
    e, c = m.effects, m.complements
    return np.outer(e[i], e[j]) + np.outer(c[i], c[j])


def _even_formula(n: int, k: int, l: int, p: int, q: int) -> float:
    r2 = radius(n) ** 2
    a = math.pi / n
    if (p, q) == (1, 1):
        arg = a - 2 * a * (k - l)
    elif (p, q) == (-1, -1):
        arg = a + 2 * a * (k - l)
    elif (p, q) == (1, -1):
        arg = a + 2 * a * (k + l)
    else:
        arg = 3 * a + 2 * a * (k + l)
    return 0.5 * (1 + r2 * math.cos(arg))


def verify_even_formulas(n: int) -> float:
    """Max deviation between direct traces of ``E_{0(x)0}`` and the closed forms."""
    if n % 2 or n < 4:
        raise DomainError("defined for even n >= 4")
    E = club_effect(n)
    dev = 0.0
    for k, l in itertools.product(range(n), repeat=2):
        for p, q in SECTORS:
            direct = pairing(E, entangled_state(n, k, l, p, q))
            dev = max(dev, abs(direct - _even_formula(n, k, l, p, q)))
    return dev


def verify_club_identity(n: int) -> float:
    """Max of ``|p(e_i e_j | w) - p(e~_i e~_j | w)|`` over the entangled orbit."""
    m = build_polygon(n)
    e, c = m.effects, m.complements
    states = np.stack([entangled_state(n, k, l, p, q) for k in range(n) for l in range(n) for p, q in SECTORS])
    a = np.einsum("ai,sij,bj->sab", e, states, e)
    b = np.einsum("ai,sij,bj->sab", c, states, c)
    return float(np.abs(a - b).max())


def _sector_offset(n: int, k: int, l: int, p: int, q: int) -> int:
    return (k - l) % n if p == q else (k + l) % n


def even_click_sets(n: int, sector: tuple[int, int]) -> tuple[set, set]:
    """Offsets (``k - l`` for p = q, ``k + l`` otherwise) where ``E_{0(x)0}`` gives 1 resp. 0.

    Raises if the click pattern is not a function of the offset alone.
    """
    E = club_effect(n)
    p, q = sector
    on: dict[int, bool] = {}
    off: dict[int, bool] = {}
    for k, l in itertools.product(range(n), repeat=2):
        d = _sector_offset(n, k, l, p, q)
        v = pairing(E, entangled_state(n, k, l, p, q))
        for table, hit in ((on, abs(v - 1) < CLICK_TOL), (off, abs(v) < CLICK_TOL)):
            if table.setdefault(d, hit) != hit:
                raise AssertionError("click pattern depends on more than the offset")
    return {d for d, h in on.items() if h}, {d for d, h in off.items() if h}


def EVEN_CLICK_TABLE(n: int) -> dict[tuple[int, int], tuple[set, set]]:
    """Expected sharp-click offsets per sector, as (E clicks, complement clicks)."""
    h = n // 2
    mod = lambda *v: {x % n for x in v}  # noqa: E731
    return {
        (1, 1): (mod(0, 1), mod(h, h + 1)),
        (-1, -1): (mod(0, n - 1), mod(h, h - 1)),
        (1, -1): (mod(n, n - 1), mod(h, h - 1)),
        (-1, 1): (mod(n - 1, 2 * (n - 1)), mod(h - 1, h - 2)),
    }


# input pair -> sector of its encoded state for Alice (+, -) and Bob (+, -)
UNAMBIGUOUS_SECTORS = {"x,y": (1, 1), "x',y'": (-1, -1), "x,y'": (1, -1), "x',y": (-1, 1)}


def verify_even_condition_tables(n: int) -> bool:
    """Click sets per sector and the derived unambiguous-decoding conditions.

    For every input pair the encoded state is decoded unambiguously exactly
    when its offset lies in the union of the two click sets of its sector.
    """
    if n % 2 or n < 4:
        raise DomainError("defined for even n >= 4")
    expected = EVEN_CLICK_TABLE(n)
    E = club_effect(n)
    for sector, (exp_on, exp_off) in expected.items():
        on, off = even_click_sets(n, sector)
        if on != exp_on or off != exp_off:
            return False
    for pair, (p, q) in UNAMBIGUOUS_SECTORS.items():
        allowed = expected[(p, q)][0] | expected[(p, q)][1]
        sharp = {
            (k, l)
            for k, l in itertools.product(range(n), repeat=2)
            if min(abs(v := pairing(E, entangled_state(n, k, l, p, q))), abs(v - 1)) < CLICK_TOL
        }
        want = {(k, l) for k, l in itertools.product(range(n), repeat=2) if _sector_offset(n, k, l, p, q) in allowed}
        if sharp != want:
            return False
    return True


def quad_endpoint_ratios(n: int, composition: Composition | str) -> set[tuple[int, int]]:
    """Click ratios (E count, complement count) of all sharply decoded quads.

    Type-I (even n): encodings ``T`` on the shared ``w00(++)``, decoder
    ``{E_{0(x)0}, complement}``.  Type-II: product vertex encodings, decoder
    ``{e00(++), complement}``.  Only quads whose four states all click
    sharply are recorded.
    """
    if isinstance(composition, str):
        composition = Composition.parse(composition)
    if composition is Composition.TYPE_I:
        if n % 2:
            raise DomainError("the clubbed decoder exists for even n only")
        E = club_effect(n)
        W0 = entangled_state(n, 0, 0, 1, 1)
        Ts = [transform(n, k, p) for k, p in group(n)]
        P = np.array([[pairing(E, A @ W0 @ B.T) for B in Ts] for A in Ts])
    else:
        m = build_polygon(n)
        E = entangled_effect(n, 0, 0, 1, 1)
        P = m.states @ E @ m.states.T
    sharp = (np.abs(P) < CLICK_TOL) | (np.abs(P - 1) < CLICK_TOL)
    bit = (np.abs(P - 1) < CLICK_TOL).astype(int)
    N, M = P.shape
    out = set()
    for a, a2 in itertools.combinations(range(N), 2):
        for b, b2 in itertools.combinations(range(M), 2):
            cells = [(a, b), (a, b2), (a2, b), (a2, b2)]
            if all(sharp[c] for c in cells):
                ones = sum(bit[c] for c in cells)
                out.add((int(ones), int(4 - ones)))
    return out


# -- sweeps -------------------------------------------------------------------


@dataclass
class TaskRecord:
    task: str
    assignments_checked: int
    configurations: int
    feasible: bool
    indeterminate: int
    max_agreement: float
    witness: dict | None = None


@dataclass
class NoGoReport:
    n: int
    composition: str
    records: list[TaskRecord]
    sanity: dict[str, bool] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def feasible_count(self) -> int:
        return sum(r.feasible for r in self.records)

    @property
    def indeterminate_count(self) -> int:
        return sum(r.indeterminate > 0 and not r.feasible for r in self.records)

    @property
    def infeasible_count(self) -> int:
        return len(self.records) - self.feasible_count - self.indeterminate_count

    @property
    def passed(self) -> bool:
        return (
            self.feasible_count == 0
            and self.indeterminate_count == 0
            and all(self.sanity.values())
        )

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "composition": self.composition,
            "tasks": len(self.records),
            "infeasible": self.infeasible_count,
            "feasible": self.feasible_count,
            "indeterminate": self.indeterminate_count,
            "sanity": self.sanity,
            "passed": self.passed,
            "elapsed_s": round(self.elapsed, 3),
            "records": [asdict(r) for r in self.records],
        }


def _vertex_maps(n: int, rows_equal: np.ndarray, fix_first: bool) -> np.ndarray:
    """Maps {0..3} -> vertices that only merge inputs with identical rows."""
    firsts = (0,) if fix_first else range(n)
    maps = []
    for a0 in firsts:
        for rest in itertools.product(range(n), repeat=3):
            a = (a0,) + rest
            if all(rows_equal[x, x2] for x in range(4) for x2 in range(x + 1, 4) if a[x] == a[x2]):
                maps.append(a)
    return np.array(maps, dtype=np.int64)


def _grid_perms(n: int) -> np.ndarray:
    """For each local dihedral pair, the cell permutation ``new[c] = old[perm[c]]``."""
    G = group(n)
    perms = []
    for (ka, pa), (kb, pb) in itertools.product(G, G):
        # g maps vertex i to k + p i; new cell (i, j) holds old cell (g^-1 i, g^-1 j)
        inv_a = [(pa * (i - ka)) % n for i in range(n)]
        inv_b = [(pb * (j - kb)) % n for j in range(n)]
        perms.append([inv_a[i] * n + inv_b[j] for i in range(n) for j in range(n)])
    return np.array(perms, dtype=np.int64)


def classical_witness_states(n: int, task: DualLayerTask) -> tuple[np.ndarray, np.ndarray] | None:
    """Vertex maps built from a perfect classical strategy (bit b -> vertex b * d).

    ``d`` is a vertex perfectly distinguishable from vertex 0 by ``e_0``.
    """
    strats = perfect_strategies(task)
    if not strats:
        return None
    s = strats[0]
    d = n // 2 if n % 2 == 0 else (n + 1) // 2
    return np.array([d * m for m in s.encode_a]), np.array([d * m for m in s.encode_b])


@dataclass
class _Labeling:
    values: np.ndarray  # -1 unlabelled
    certain: bool


class Sweeper:
    """Decides every nontrivial task for one (n, composition); caches LP verdicts."""

    def __init__(
        self,
        n: int,
        composition: Composition | str,
        product_effects_only: bool = False,
        include_entangled: bool = True,
        agreement_samples: int = 8,
        seed: int = 0,
        tol: float = DEFAULT_TOL,
        reduce_symmetry: bool = True,
    ):
        if isinstance(composition, str):
            composition = Composition.parse(composition)
        self.n = n
        self.composition = composition
        self.model = build_bipartite(n, composition)
        self.tol = tol
        self.seed = seed
        self.reduce_symmetry = reduce_symmetry
        self.agreement_samples = agreement_samples
        if composition is Composition.TYPE_II and not product_effects_only:
            self.product_cone: GeneratorCone | FacetCone = FacetCone.product_states(n)
        else:
            self.product_cone = GeneratorCone.product(n)
        self.vertices = build_polygon(n).states
        self.perms = _grid_perms(n)
        self.grid_cache: dict[bytes, Status] = {}
        self.entangled = composition is Composition.TYPE_I and include_entangled and not product_effects_only
        self.lp_calls = 0
        if self.entangled:
            self._init_orbit()

    # product shared states ------------------------------------------------

    def _grid_states(self, cells: np.ndarray) -> np.ndarray:
        n = self.n
        w = self.vertices
        return np.einsum("ci,cj->cij", w[cells // n], w[cells % n])

    def _grid_status(self, row: np.ndarray) -> Status:
        key = row.tobytes()
        hit = self.grid_cache.get(key)
        if hit is not None:
            return hit
        cells = np.nonzero(row < 2)[0]
        prob = DecodingFeasibilityProblem(self._grid_states(cells), row[cells].astype(float), self.product_cone)
        self.lp_calls += 1
        st = decide(prob, self.tol).status
        self.grid_cache[key] = st
        return st

    def _config_problem(self, a: np.ndarray, b: np.ndarray, T: np.ndarray) -> DecodingFeasibilityProblem:
        n = self.n
        cells = (a[:, None] * n + b[None, :]).ravel()
        return DecodingFeasibilityProblem(self._grid_states(cells), T.ravel().astype(float), self.product_cone)

    def product_sweep(self, task: DualLayerTask) -> dict:
        n = self.n
        T = np.array(task.table(), dtype=np.int8)
        rows_eq = (T[:, None, :] == T[None, :, :]).all(-1)
        cols_eq = (T.T[:, None, :] == T.T[None, :, :]).all(-1)
        A = _vertex_maps(n, rows_eq, self.reduce_symmetry)
        B = _vertex_maps(n, cols_eq, self.reduce_symmetry)
        # witness from a classical strategy first, so trivial tasks exit early
        wit = classical_witness_states(n, task)
        if wit is not None:
            a, b = wit
            a, b = (a - a[0]) % n, (b - b[0]) % n
            st = decide(self._config_problem(a, b, T), self.tol).status
            if st is Status.FEASIBLE:
                return {"status": st, "configurations": 1, "witness": {"alice_vertices": a.tolist(), "bob_vertices": b.tolist()}, "A": A, "B": B, "indeterminate": 0}
        cells = (A[:, None, :, None] * n + B[None, :, None, :]).reshape(-1, 16)
        K = len(cells)
        lab = np.full((K, n * n), 2, dtype=np.int8)
        lab[np.arange(K)[:, None], cells] = np.broadcast_to(T.ravel(), (K, 16))
        G = len(self.perms)
        allp = lab[:, self.perms].reshape(K * G, n * n)
        uniq, inv = np.unique(allp, axis=0, return_inverse=True)
        canon = inv.reshape(K, G).min(axis=1)
        classes, first = np.unique(canon, return_index=True)
        indet = 0
        for c, k in zip(classes, first):
            st = self._grid_status(uniq[c])
            if st is Status.FEASIBLE:
                ka, kb = divmod(int(k), len(B))
                return {"status": st, "configurations": len(classes), "witness": {"alice_vertices": A[ka].tolist(), "bob_vertices": B[kb].tolist()}, "A": A, "B": B, "indeterminate": indet}
            indet += st is Status.INDETERMINATE
        status = Status.INDETERMINATE if indet else Status.INFEASIBLE
        return {"status": status, "configurations": len(classes), "witness": None, "A": A, "B": B, "indeterminate": indet}

    # entangled shared state ------------------------------------------------

    def _init_orbit(self):
        n = self.n
        W0 = entangled_state(n, 0, 0, 1, 1)
        Ts = [transform(n, k, p) for k, p in group(n)]
        orbit, index = [], {}
        for T in Ts:
            W = T @ W0
            k = _key(W)
            if k not in index:
                index[k] = len(orbit)
                orbit.append(W)
        self.orbit = np.array(orbit)
        self.orbit_index = np.array([[index[_key(A @ W0 @ B.T)] for B in Ts] for A in Ts])
        self.labelings = self._enumerate_labelings()
        self._init_columns()

    def _labeling_status(self, lab: tuple[int, ...]) -> Status:
        vals = np.array(lab)
        idx = np.nonzero(vals >= 0)[0]
        if len(idx) == 0:
            return Status.FEASIBLE
        prob = DecodingFeasibilityProblem(self.orbit[idx], vals[idx].astype(float), self.product_cone)
        self.lp_calls += 1
        return decide(prob, self.tol).status

    def _enumerate_labelings(self) -> list[_Labeling]:
        N = len(self.orbit)
        leaves: list[_Labeling] = []
        lab = [-1] * N

        def rec(i: int, certain: bool):
            if i == N:
                leaves.append(_Labeling(np.array(lab), certain))
                return
            for v in (0, 1):
                lab[i] = v
                st = self._labeling_status(tuple(lab))
                if st is not Status.INFEASIBLE:
                    rec(i + 1, certain and st is Status.FEASIBLE)
            lab[i] = -1
            rec(i + 1, certain)

        rec(0, True)
        V = np.array([l.values for l in leaves])
        # keep maximal labelings only (not strictly contained in another)
        keep = []
        for i, v in enumerate(V):
            sub = ((v[None, :] < 0) | (v[None, :] == V)).all(1)
            sub[i] = False
            larger = sub & ((V >= 0).sum(1) > (v >= 0).sum())
            if not larger.any() or not all(leaves[j].certain for j in np.nonzero(larger)[0]):
                keep.append(leaves[i])
        return keep

    def _init_columns(self):
        N2 = len(group(self.n))
        firsts = (0,) if self.reduce_symmetry else range(N2)
        A = np.array([(a0,) + r for a0 in firsts for r in itertools.product(range(N2), repeat=3)])
        self.alice_assignments = A
        idx = self.orbit_index[A[:, :, None], np.arange(N2)[None, None, :]]  # (K, 4, b)
        ach = []
        for lab in self.labelings:
            v = lab.values[idx]  # (K, 4, b)
            valid = (v >= 0).all(1)
            code = (v * np.array([8, 4, 2, 1])[None, :, None]).sum(1)
            a = np.zeros((len(A), 16), dtype=bool)
            kk, bb = np.nonzero(valid)
            a[kk, code[kk, bb]] = True
            ach.append(a)
        self.achievable = np.array(ach) if ach else np.zeros((0, len(A), 16), dtype=bool)

    def entangled_sweep(self, task: DualLayerTask) -> dict:
        T = np.array(task.table(), dtype=np.int64)
        codes = (T * np.array([8, 4, 2, 1])[:, None]).sum(0)  # column y as bits over x
        ok = np.ones(self.achievable.shape[:2], dtype=bool)
        for c in codes:
            ok &= self.achievable[:, :, c]
        hits = np.argwhere(ok)
        certain = [h for h in hits if self.labelings[h[0]].certain]
        if certain:
            h, a = certain[0]
            return {"status": Status.FEASIBLE, "witness": self._entangled_witness(h, a, codes)}
        if len(hits):
            return {"status": Status.INDETERMINATE, "witness": None}
        return {"status": Status.INFEASIBLE, "witness": None}

    def _entangled_witness(self, h: int, a: int, codes: np.ndarray) -> dict:
        G = group(self.n)
        lab = self.labelings[h].values
        alice = self.alice_assignments[a]
        bob = []
        for c in codes:
            for b in range(len(G)):
                col = lab[self.orbit_index[alice, b]]
                if (col >= 0).all() and int((col * np.array([8, 4, 2, 1])).sum()) == c:
                    bob.append(b)
                    break
        return {"alice": [G[i] for i in alice], "bob": [G[i] for i in bob]}

    # agreement --------------------------------------------------------------

    def max_agreement(self, task: DualLayerTask, A: np.ndarray, B: np.ndarray) -> float:
        rng = np.random.default_rng(self.seed)
        T = np.array(task.table())
        best = 0.0
        for _ in range(self.agreement_samples):
            a = A[rng.integers(len(A))]
            b = B[rng.integers(len(B))]
            best = max(best, max_success(self._config_problem(a, b, T)))
        if self.entangled:
            G = len(group(self.n))
            for _ in range(self.agreement_samples):
                a = rng.integers(G, size=4)
                b = rng.integers(G, size=4)
                S = self.orbit[self.orbit_index[a[:, None], b[None, :]].ravel()]
                best = max(best, max_success(DecodingFeasibilityProblem(S, T.ravel(), self.product_cone)))
        return best

    def run_task(self, task: DualLayerTask, agreement: bool = True) -> TaskRecord:
        G = 2 * self.n
        classes = 2 if self.entangled else 1
        prod = self.product_sweep(task)
        status, witness = prod["status"], prod["witness"]
        indet = prod["indeterminate"]
        configs = prod["configurations"]
        if witness is not None:
            witness = {"shared": "product", **witness}
        if self.entangled and status is not Status.FEASIBLE:
            ent = self.entangled_sweep(task)
            configs += len(self.alice_assignments) * len(self.labelings)
            if ent["status"] is Status.FEASIBLE:
                status, witness = Status.FEASIBLE, {"shared": "entangled", **ent["witness"]}
            elif ent["status"] is Status.INDETERMINATE:
                indet += 1
                status = Status.INDETERMINATE
        feasible = status is Status.FEASIBLE
        agree = 1.0 if feasible else (self.max_agreement(task, prod["A"], prod["B"]) if agreement else float("nan"))
        return TaskRecord(
            task=str(task),
            assignments_checked=classes * G**7,
            configurations=int(configs),
            feasible=feasible,
            indeterminate=int(indet),
            max_agreement=round(agree, 12),
            witness=witness,
        )


def _run_chunk(args) -> list[TaskRecord]:
    n, comp, literals, kwargs = args
    sw = Sweeper(n, comp, **kwargs)
    return [sw.run_task(parse_task(t)) for t in literals]


def _nontrivial_tasks() -> list[DualLayerTask]:
    return [t for t in enumerate_tasks(2) if not classify_triviality(t).trivial]


def verify_theorem2(
    n: int,
    composition: Composition | str,
    tasks: Iterable[DualLayerTask] | None = None,
    sanity: Sequence[str] = ("F:XOR,f:XOR",),
    jobs: int = 1,
    agreement_samples: int = 8,
    seed: int = 0,
) -> NoGoReport:
    """Sweep every nontrivial task (or the given ones) in one composition."""
    if not 4 <= n <= 9:
        raise DomainError("desk-scale sweep supports 4 <= n <= 9")
    if isinstance(composition, str):
        composition = Composition.parse(composition)
    start = time.perf_counter()
    tasks = list(tasks) if tasks is not None else _nontrivial_tasks()
    kwargs = {"agreement_samples": agreement_samples, "seed": seed}
    if jobs > 1 and len(tasks) > 1:
        lits = [str(t) for t in tasks]
        chunks = [(n, composition.value, lits[i::jobs], kwargs) for i in range(jobs)]
        with ProcessPoolExecutor(jobs) as ex:
            parts = list(ex.map(_run_chunk, chunks))
        order = {lit: i for i, lit in enumerate(lits)}
        records = sorted((r for p in parts for r in p), key=lambda r: order[r.task])
        sw = Sweeper(n, composition, **kwargs)
    else:
        sw = Sweeper(n, composition, **kwargs)
        records = [sw.run_task(t) for t in tasks]
    checks = {lit: sw.run_task(parse_task(lit), agreement=False).feasible for lit in sanity}
    return NoGoReport(n, composition.value, records, checks, time.perf_counter() - start)


def proposition2_operational_check(n: int, detail: bool = False):
    """Product states with product effects only: feasible exactly for the classically trivial tasks."""
    if not 4 <= n <= 9:
        raise DomainError("supported for 4 <= n <= 9")
    sw = Sweeper(n, Composition.TYPE_II, product_effects_only=True)
    mismatches = []
    for task in enumerate_tasks(2):
        trivial = classify_triviality(task).trivial
        st = sw.product_sweep(task)["status"]
        if st is Status.INDETERMINATE or (st is Status.FEASIBLE) != trivial:
            mismatches.append(str(task))
    ok = not mismatches
    return (ok, mismatches) if detail else ok
