"""Bounded-variable primal simplex for minimization LPs over atoms.

Each row ``lb <= a.x <= ub`` becomes ``a.x - s = 0`` with a slack ``s``
bounded by ``[lb, ub]``, so range rows need no duplication. Phase 1 drives
per-row artificial columns to zero; phase 2 optimizes the real objective
with the artificials fixed at zero.

Dual sign convention: ``reduced_cost[j] = c[j] - sum_i duals[i] * a[i, j]``.
Under minimization a row at its lower bound has a nonnegative dual and a row
at its upper bound a nonpositive one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .model import FomipError, LinCons

FEAS_TOL = 1e-6
PIVOT_TOL = 1e-9
DUAL_TOL = 1e-9
ZERO_DUAL = 1e-6
BLAND_AFTER = 1000  # degenerate pivots before switching to Bland's rule
REFACTOR_EVERY = 50


class NumericalFailure(FomipError):
    pass


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    atoms: list
    objective: dict
    bounds: dict  # atom -> (lb, ub)
    constraints: list
    # When set, every row gets an elastic column of this cost so the LP is
    # never infeasible.
    artificial_cost: Optional[float] = None

    def __post_init__(self):
        known = set(self.atoms)
        for row in self.constraints:
            for a in row.atoms:
                if a not in known:
                    raise ValueError(f"constraint uses {a}, which is not in the problem")
        for a in self.atoms:
            lo, hi = self.bounds.get(a, (0.0, math.inf))
            if lo > hi:
                raise ValueError(f"{a}: lower bound {lo} exceeds upper bound {hi}")


@dataclass
class LpSolution:
    status: LpStatus
    objective_value: float = math.nan
    primal: dict = field(default_factory=dict)
    duals: list = field(default_factory=list)
    reduced_costs: dict = field(default_factory=dict)
    basic: frozenset = frozenset()
    artificial: list = field(default_factory=list)  # elastic amount per row
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def artificial_total(self) -> float:
        return float(sum(self.artificial))


@dataclass
class _Result:
    status: LpStatus
    x: np.ndarray
    y: np.ndarray
    d: np.ndarray
    basic: np.ndarray
    iterations: int


def solve_arrays(c, A, row_lb, row_ub, col_lb, col_ub, max_iter=None) -> _Result:
    """Solve ``min c.x  s.t.  row_lb <= A x <= row_ub,  col_lb <= x <= col_ub``.

    Returns structural values, row duals, structural reduced costs and a
    boolean mask of basic structurals.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(row_lb), len(c))
    m, n = A.shape
    row_lb = np.asarray(row_lb, float)
    row_ub = np.asarray(row_ub, float)
    col_lb = np.asarray(col_lb, float)
    col_ub = np.asarray(col_ub, float)
    if np.any(col_lb > col_ub) or np.any(row_lb > row_ub):
        return _Result(LpStatus.INFEASIBLE, np.full(n, np.nan), np.zeros(m), np.zeros(n), np.zeros(n, bool), 0)

    # structurals, then slacks, then artificials
    N = n + 2 * m
    x = np.zeros(N)
    lo = np.concatenate([col_lb, row_lb, np.zeros(m)])
    hi = np.concatenate([col_ub, row_ub, np.full(m, np.inf)])
    xs = np.where(np.isfinite(col_lb), col_lb, np.where(np.isfinite(col_ub), col_ub, 0.0))
    x[:n] = xs
    act = A @ xs if m else np.zeros(0)
    sign = np.ones(m)
    basis = np.empty(m, dtype=int)
    for i in range(m):
        if row_lb[i] <= act[i] <= row_ub[i]:
            basis[i] = n + i
            x[n + i] = act[i]
        else:
            bound = row_lb[i] if act[i] < row_lb[i] else row_ub[i]
            x[n + i] = bound
            sign[i] = 1.0 if bound - act[i] > 0 else -1.0
            basis[i] = n + m + i
            x[n + m + i] = abs(bound - act[i])
    M = np.hstack([A, -np.eye(m), np.diag(sign)]) if m else np.zeros((0, N))

    s = _Simplex(M, x, lo, hi, basis, max_iter or 50 * (N + m) + 1000)
    phase1 = np.zeros(N)
    phase1[n + m:] = 1.0
    if np.any(basis >= n + m):
        s.run(phase1)
        if phase1 @ s.x > FEAS_TOL:
            return _Result(LpStatus.INFEASIBLE, s.x[:n].copy(), np.zeros(m), np.zeros(n), np.zeros(n, bool), s.iters)
    s.hi[n + m:] = 0.0
    s.x[n + m:] = np.clip(s.x[n + m:], 0.0, 0.0)
    s.x[s.basis] = s.basic_values()
    cost = np.concatenate([c, np.zeros(2 * m)])
    status = s.run(cost)
    y, d = s.duals(cost)
    basic = np.zeros(N, bool)
    basic[s.basis] = True
    return _Result(status, s.x[:n].copy(), y, d[:n], basic[:n], s.iters)


class _Simplex:
    def __init__(self, M, x, lo, hi, basis, max_iter):
        self.M = M
        self.x = x
        self.lo = lo
        self.hi = hi
        self.basis = basis
        self.m, self.N = M.shape
        self.max_iter = max_iter
        self.iters = 0
        self.is_basic = np.zeros(self.N, bool)
        self.is_basic[basis] = True
        self.refactor()

    def refactor(self):
        B = self.M[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B) if self.m else np.zeros((0, 0))
        except np.linalg.LinAlgError:
            raise NumericalFailure("basis matrix became singular") from None
        if not np.all(np.isfinite(self.Binv)):
            raise NumericalFailure("basis inverse is not finite")

    def basic_values(self):
        nb = ~self.is_basic
        return -self.Binv @ (self.M[:, nb] @ self.x[nb])

    def duals(self, cost):
        y = cost[self.basis] @ self.Binv
        return y, cost - y @ self.M

    def run(self, cost) -> LpStatus:
        degenerate = 0
        bland = False
        since_refactor = 0
        while True:
            if self.iters >= self.max_iter:
                raise NumericalFailure(f"simplex iteration limit {self.max_iter} reached")
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                self.x[self.basis] = self.basic_values()
                since_refactor = 0
            y, d = self.duals(cost)
            j, direction = self._entering(d, bland)
            if j < 0:
                return LpStatus.OPTIMAL
            alpha = self.Binv @ self.M[:, j]
            delta = -direction * alpha  # change of basic values per unit step
            t, r = self._ratio(delta, bland)
            span = self.hi[j] - self.lo[j]
            if span <= t:
                t, r = span, -1
            if not math.isfinite(t):
                return LpStatus.UNBOUNDED
            self.iters += 1
            since_refactor += 1
            if t <= 1e-12:
                degenerate += 1
                if degenerate >= BLAND_AFTER:
                    bland = True
            self.x[j] += direction * t
            self.x[self.basis] += delta * t
            if r < 0:
                # bound flip, basis unchanged
                self.x[j] = self.hi[j] if direction > 0 else self.lo[j]
                continue
            leaving = self.basis[r]
            self.x[leaving] = self.lo[leaving] if delta[r] < 0 else self.hi[leaving]
            piv = alpha[r]
            if abs(piv) < PIVOT_TOL:
                raise NumericalFailure(f"pivot {piv:.3g} below tolerance")
            row = self.Binv[r] / piv
            self.Binv -= np.outer(alpha, row)
            self.Binv[r] = row
            self.basis[r] = j
            self.is_basic[leaving] = False
            self.is_basic[j] = True

    def _entering(self, d, bland):
        nb = ~self.is_basic
        x, lo, hi = self.x, self.lo, self.hi
        up = nb & (d < -DUAL_TOL) & (x < hi)
        down = nb & (d > DUAL_TOL) & (x > lo)
        cand = up | down
        if not cand.any():
            return -1, 0
        if bland:
            j = int(np.flatnonzero(cand)[0])
        else:
            score = np.where(cand, np.abs(d), -1.0)
            j = int(np.argmax(score))
        return j, (1.0 if up[j] else -1.0)

    def _ratio(self, delta, bland):
        xb = self.x[self.basis]
        lo = self.lo[self.basis]
        hi = self.hi[self.basis]
        limits = np.full(self.m, np.inf)
        dec = delta < -PIVOT_TOL
        inc = delta > PIVOT_TOL
        with np.errstate(invalid="ignore", divide="ignore"):
            limits[dec] = (xb[dec] - lo[dec]) / -delta[dec]
            limits[inc] = (hi[inc] - xb[inc]) / delta[inc]
        limits = np.maximum(limits, 0.0)
        limits[np.isnan(limits)] = np.inf
        if not self.m:
            return math.inf, -1
        t = float(limits.min())
        if not math.isfinite(t):
            return t, -1
        ties = np.flatnonzero(limits <= t + 1e-12)
        if bland:
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            r = int(ties[np.argmax(np.abs(delta[ties]))])
        return t, r


def solve_lp(p: LpProblem) -> LpSolution:
    atoms = list(p.atoms)
    index = {a: k for k, a in enumerate(atoms)}
    rows = list(p.constraints)
    m = len(rows)
    n = len(atoms)
    c = [float(p.objective.get(a, 0.0)) for a in atoms]
    col_lb = [p.bounds.get(a, (0.0, math.inf))[0] for a in atoms]
    col_ub = [p.bounds.get(a, (0.0, math.inf))[1] for a in atoms]
    A = np.zeros((m, n))
    for i, row in enumerate(rows):
        for coef, atom in row.terms:
            A[i, index[atom]] += coef
    art_rows = []
    if p.artificial_cost is not None:
        cols = []
        for i, row in enumerate(rows):
            for finite, sgn in ((row.lb, 1.0), (row.ub, -1.0)):
                if math.isfinite(finite):
                    col = np.zeros(m)
                    col[i] = sgn
                    cols.append(col)
                    art_rows.append(i)
        if cols:
            A = np.hstack([A, np.array(cols).T])
        k = len(cols)
        c += [float(p.artificial_cost)] * k
        col_lb += [0.0] * k
        col_ub += [math.inf] * k
    res = solve_arrays(c, A, [r.lb for r in rows], [r.ub for r in rows], col_lb, col_ub)
    if res.status is not LpStatus.OPTIMAL:
        return LpSolution(res.status, iterations=res.iterations)
    x = res.x
    artificial = [0.0] * m
    for k, i in enumerate(art_rows):
        artificial[i] += float(x[n + k])
    primal = {a: float(x[k]) for k, a in enumerate(atoms)}
    obj = float(np.dot(c, x))
    return LpSolution(
        LpStatus.OPTIMAL,
        objective_value=obj,
        primal=primal,
        duals=[float(v) for v in res.y],
        reduced_costs={a: float(res.d[k]) for k, a in enumerate(atoms)},
        basic=frozenset(a for k, a in enumerate(atoms) if res.basic[k]),
        artificial=artificial,
        iterations=res.iterations,
    )


def reduced_cost(sol: LpSolution, cost: float, column) -> float:
    """``cost - sum(dual[i] * coef)`` over a column given as (row index, coef) pairs.

    The atom need not be part of the LP that produced ``sol``.
    """
    return float(cost) - sum(sol.duals[i] * coef for i, coef in column)


def activity(x: dict, row: LinCons) -> float:
    """Value of ``row``'s linear expression at ``x``; atoms missing from ``x`` read as 0."""
    return sum(coef * x.get(atom, 0.0) for coef, atom in row.terms)


def dual_objective(p: LpProblem, sol: LpSolution) -> float:
    """Objective of the bounded-variable dual at ``sol``'s duals.

    Equals ``sol.objective_value`` at an optimum (strong duality).
    """
    pairs = [(y, row.lb, row.ub) for y, row in zip(sol.duals, p.constraints)]
    pairs += [(sol.reduced_costs[a],) + tuple(p.bounds.get(a, (0.0, math.inf))) for a in p.atoms]
    total = 0.0
    for v, lo, hi in pairs:
        bound = lo if v > 0 else hi
        if math.isfinite(bound):
            total += v * bound
        elif abs(v) > ZERO_DUAL:
            return -math.inf  # dual infeasible
    return total
