"""Feasibility LPs with verified outcomes.

Problems have the form ``A_eq x = b_eq, A_ub x <= b_ub, lo <= x <= hi``.
Floating-point problems go to HiGHS; a feasible answer is accepted only if
the returned point satisfies every constraint to ``tol``, and an infeasible
answer only if a Farkas certificate is found and checked.  Anything else
is INDETERMINATE.  Rational problems can instead be decided exactly by a
phase-1 simplex over ``Fraction`` with Bland's rule.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "Status",
    "LPResult",
    "LinearSystem",
    "solve_feasibility",
    "maximize",
    "exact_feasibility",
    "DEFAULT_TOL",
    "STRICT_TOL",
]

DEFAULT_TOL = 1e-9
STRICT_TOL = 1e-12


class Status(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    INDETERMINATE = "indeterminate"


@dataclass
class LPResult:
    status: Status
    x: np.ndarray | None = None
    certificate: tuple[np.ndarray, np.ndarray] | None = None  # (z >= 0 on G rows, y on eq rows)
    violation: float = float("nan")
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


@dataclass
class LinearSystem:
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    lo: np.ndarray | None = None  # None means all zero
    hi: np.ndarray | None = None  # None means +inf

    def __post_init__(self):
        self.A_eq = np.atleast_2d(np.asarray(self.A_eq, dtype=float))
        self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()
        m = self.A_eq.shape[1]
        if self.A_ub is None:
            self.A_ub = np.zeros((0, m))
            self.b_ub = np.zeros(0)
        self.A_ub = np.atleast_2d(np.asarray(self.A_ub, dtype=float)).reshape(-1, m)
        self.b_ub = np.asarray(self.b_ub, dtype=float).ravel()
        self.lo = np.zeros(m) if self.lo is None else np.asarray(self.lo, dtype=float)
        self.hi = np.full(m, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float)

    @property
    def nvars(self) -> int:
        return self.A_eq.shape[1]

    def bounds(self):
        return [
            (None if np.isinf(a) else a, None if np.isinf(b) else b) for a, b in zip(self.lo, self.hi)
        ]

    def inequality_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """All inequalities, bounds included, as ``G x <= h``."""
        m = self.nvars
        eye = np.eye(m)
        up = ~np.isinf(self.hi)
        dn = ~np.isinf(self.lo)
        G = np.vstack([self.A_ub, eye[up], -eye[dn]])
        h = np.concatenate([self.b_ub, self.hi[up], -self.lo[dn]])
        return G, h

    def violation(self, x: np.ndarray) -> float:
        G, h = self.inequality_rows()
        v = 0.0
        if len(h):
            v = max(v, float(np.max(G @ x - h)))
        if len(self.b_eq):
            v = max(v, float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        return v


def _highs_options(tol: float) -> dict:
    t = max(tol, 1e-10)  # HiGHS rejects tighter feasibility tolerances
    return {"primal_feasibility_tolerance": t, "dual_feasibility_tolerance": t, "presolve": True}


def _farkas(sys: LinearSystem, tol: float) -> tuple[np.ndarray, np.ndarray] | None:
    """Find ``z >= 0, y`` with ``G^T z + A^T y = 0`` and ``h.z + b.y = -1``."""
    G, h = sys.inequality_rows()
    A, b = sys.A_eq, sys.b_eq
    nz, ny = len(h), len(b)
    M = np.hstack([G.T, A.T])
    M = np.vstack([M, np.concatenate([h, b])[None, :]])
    rhs = np.zeros(M.shape[0])
    rhs[-1] = -1.0
    bounds = [(0, None)] * nz + [(None, None)] * ny
    # a small L1-type objective keeps the certificate bounded
    c = np.concatenate([np.ones(nz), np.zeros(ny)])
    res = linprog(c, A_eq=M, b_eq=rhs, bounds=bounds, method="highs", options=_highs_options(tol))
    if res.status != 0:
        return None
    z, y = res.x[:nz], res.x[nz:]
    z = np.maximum(z, 0.0)
    scale = max(1.0, float(np.abs(res.x).max()))
    resid = np.abs(G.T @ z + A.T @ y).max() if M.shape[1] else 0.0
    gap = float(h @ z + b @ y)
    if resid <= tol * scale and gap <= -1 + 1e-6:
        return z, y
    return None


def _solve_once(sys: LinearSystem, tol: float) -> LPResult:
    m = sys.nvars
    res = linprog(
        np.zeros(m),
        A_ub=sys.A_ub if len(sys.b_ub) else None,
        b_ub=sys.b_ub if len(sys.b_ub) else None,
        A_eq=sys.A_eq if len(sys.b_eq) else None,
        b_eq=sys.b_eq if len(sys.b_eq) else None,
        bounds=sys.bounds(),
        method="highs",
        options=_highs_options(tol),
    )
    if res.status == 0:
        v = sys.violation(res.x)
        if v <= tol:
            return LPResult(Status.FEASIBLE, x=res.x, violation=v)
        return LPResult(Status.INDETERMINATE, x=res.x, violation=v, message="solution violates tolerance")
    if res.status == 2:
        cert = _farkas(sys, tol)
        if cert is not None:
            return LPResult(Status.INFEASIBLE, certificate=cert)
        return LPResult(Status.INDETERMINATE, message="infeasible without a verified certificate")
    return LPResult(Status.INDETERMINATE, message=res.message)


def solve_feasibility(sys: LinearSystem, tol: float = DEFAULT_TOL) -> LPResult:
    """Decide feasibility; borderline answers are rerun at the strict tolerance."""
    r = _solve_once(sys, tol)
    borderline = r.status is Status.INDETERMINATE or (
        r.status is Status.FEASIBLE and r.violation > tol / 10
    )
    if borderline:
        r2 = _solve_once(sys, STRICT_TOL)
        if r2.status is not Status.INDETERMINATE:
            return r2
        if r.status is Status.FEASIBLE:
            return r
        return r2
    return r


def maximize(sys: LinearSystem, c: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[float, np.ndarray] | None:
    """Maximize ``c.x`` over the system; None when infeasible or unsolved."""
    res = linprog(
        -np.asarray(c, dtype=float),
        A_ub=sys.A_ub if len(sys.b_ub) else None,
        b_ub=sys.b_ub if len(sys.b_ub) else None,
        A_eq=sys.A_eq if len(sys.b_eq) else None,
        b_eq=sys.b_eq if len(sys.b_eq) else None,
        bounds=sys.bounds(),
        method="highs",
        options=_highs_options(tol),
    )
    if res.status != 0:
        return None
    return float(-res.fun), res.x


# -- exact rational simplex ------------------------------------------------


@dataclass
class ExactResult:
    feasible: bool
    x: list[Fraction] | None
    phase1_optimum: Fraction


def _to_fracs(rows) -> list[list[Fraction]]:
    return [[Fraction(v) for v in r] for r in rows]


def exact_feasibility(
    A_eq: Sequence[Sequence],
    b_eq: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    free: Sequence[bool] | None = None,
) -> ExactResult:
    """Phase-1 simplex over the rationals (Bland's rule, so it terminates).

    Variables are nonnegative unless flagged ``free``.  Infeasibility is
    certified by a strictly positive phase-1 optimum, computed exactly.
    """
    A_eq, A_ub = _to_fracs(A_eq), _to_fracs(A_ub)
    b_eq, b_ub = [Fraction(v) for v in b_eq], [Fraction(v) for v in b_ub]
    m = len(A_eq[0]) if A_eq else len(A_ub[0])
    free = list(free) if free is not None else [False] * m
    # split free variables, add slacks to inequalities
    cols = []
    for j in range(m):
        cols.append((j, 1))
        if free[j]:
            cols.append((j, -1))
    nslack = len(A_ub)
    rows, rhs = [], []
    for r, b in zip(A_eq, b_eq):
        rows.append([r[j] * s for j, s in cols] + [Fraction(0)] * nslack)
        rhs.append(b)
    for i, (r, b) in enumerate(zip(A_ub, b_ub)):
        slack = [Fraction(0)] * nslack
        slack[i] = Fraction(1)
        rows.append([r[j] * s for j, s in cols] + slack)
        rhs.append(b)
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    nr, nc = len(rows), len(cols) + nslack
    # tableau with artificials; basis starts on the artificials
    T = [rows[i] + [Fraction(int(i == k)) for k in range(nr)] + [rhs[i]] for i in range(nr)]
    basis = [nc + i for i in range(nr)]
    ncols = nc + nr
    cost = [Fraction(0)] * nc + [Fraction(1)] * nr
    while True:
        # reduced costs for the phase-1 objective
        red = [cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(nr)) for j in range(ncols)]
        enter = next((j for j in range(ncols) if red[j] < 0), None)
        if enter is None:
            break
        ratios = [(T[i][-1] / T[i][enter], basis[i], i) for i in range(nr) if T[i][enter] > 0]
        if not ratios:  # unbounded cannot happen for phase 1
            break
        _, _, leave = min(ratios)
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(nr):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * b for a, b in zip(T[i], T[leave])]
        basis[leave] = enter
    opt = sum(cost[basis[i]] * T[i][-1] for i in range(nr))
    if opt > 0:
        return ExactResult(False, None, opt)
    z = [Fraction(0)] * ncols
    for i in range(nr):
        z[basis[i]] = T[i][-1]
    x = [Fraction(0)] * m
    for k, (j, s) in enumerate(cols):
        x[j] += s * z[k]
    return ExactResult(True, x, opt)
