"""Branch-and-bound drivers: full grounding, branch-price-and-cut, enumeration.

All three minimize and return a :class:`SolveReport`. ``solve_bpc`` keeps a
pool of created atoms and active rows shared by every node; each node runs
separation until quiet, then pricing, until a pass adds nothing, and only
then fathoms, accepts or branches.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .grounder import ground, ground_constraints, ground_variables, is_declared
from .lp import FEAS_TOL, LpProblem, LpSolution, LpStatus, solve_lp
from .model import Atom, FomipError, LinCons, Model, ModelError, VarType, atom_info
from .pricing import PRICING_THRESHOLD, PricingResult, price_guided, price_naive
from .separation import VIOLATION_THRESHOLD, separate_guided, separate_naive

INT_TOL = 1e-6
OBJ_TOL = 1e-6


class NoFractionalVariable(FomipError):
    pass


class IterationLimit(FomipError):
    """A node or cut-round limit stopped the search; ``report`` holds bound and gap."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class EnumSizeExceeded(FomipError):
    pass


class Status(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    LIMIT = "limit"


class NodeStatus(Enum):
    OPEN = "open"
    FATHOMED = "fathomed"
    BRANCHED = "branched"
    INTEGRAL = "integral"


@dataclass
class Node:
    id: int
    parent: Optional[int] = None
    extra_bounds: dict = field(default_factory=dict)  # atom -> (lb, ub)
    lp_bound: float = -math.inf
    status: NodeStatus = NodeStatus.OPEN
    depth: int = 0


@dataclass
class SolveOptions:
    separator: str = "guided"  # naive | guided
    pricer: str = "guided"  # naive | guided | off
    max_nodes: int = 10_000
    max_cut_rounds: int = 1_000
    max_cuts_per_round: Optional[int] = None
    violation_threshold: float = VIOLATION_THRESHOLD
    pricing_threshold: float = PRICING_THRESHOLD
    artificial_cost: float = 1e6
    max_ground_atoms: Optional[int] = 100_000
    max_ground_constraints: Optional[int] = 100_000
    trace: bool = False

    def __post_init__(self):
        if self.separator not in ("naive", "guided"):
            raise ValueError(f"unknown separator {self.separator!r}")
        if self.pricer not in ("naive", "guided", "off"):
            raise ValueError(f"unknown pricer {self.pricer!r}")


@dataclass
class Stats:
    nodes: int = 0
    branches: int = 0
    lp_solves: int = 0
    cut_rounds: int = 0
    cuts_added: int = 0
    price_rounds: int = 0
    atoms_priced: int = 0
    atoms_created: int = 0
    constraints_created: int = 0
    separation_enumerated: int = 0
    separation_pruned: int = 0
    pricing_enumerated: int = 0
    columns_built: int = 0


@dataclass
class SolveReport:
    status: Status
    objective: Optional[float]
    assignment: dict
    bound: float
    gap: float
    stats: Stats = field(default_factory=Stats)
    trace: list = field(default_factory=list)
    bound_history: list = field(default_factory=list)


def relative_gap(value: Optional[float], bound: float) -> float:
    """``|value - bound| / max(1, |value|)``; infinite while there is no incumbent."""
    if value is None or not math.isfinite(bound):
        return math.inf
    return abs(value - bound) / max(1.0, abs(value))


def most_fractional(x: dict, integer_atoms) -> Optional[Atom]:
    best, best_dist = None, INT_TOL
    for atom in sorted(integer_atoms):
        v = x.get(atom, 0.0)
        dist = abs(v - round(v))
        if dist > best_dist + 1e-12:
            best, best_dist = atom, dist
    return best


def branch(node: Node, x: dict, integer_bounds: dict, next_id: Callable[[], int]) -> tuple[Node, Node]:
    """Split on the most fractional integer atom: ``ub = floor`` and ``lb = ceil`` children.

    ``integer_bounds`` maps each integer atom to its bounds before this
    node's branching decisions.
    """
    atom = most_fractional(x, integer_bounds)
    if atom is None:
        raise NoFractionalVariable("every integer atom is integral")
    v = x[atom]
    lo, hi = node.extra_bounds.get(atom, integer_bounds[atom])
    down = dict(node.extra_bounds)
    down[atom] = (lo, float(math.floor(v)))
    up = dict(node.extra_bounds)
    up[atom] = (float(math.ceil(v)), hi)
    return (
        Node(next_id(), node.id, down, node.lp_bound, depth=node.depth + 1),
        Node(next_id(), node.id, up, node.lp_bound, depth=node.depth + 1),
    )


class _Tree:
    """Best-bound branch and bound; subclasses supply ``evaluate``."""

    def __init__(self, opts: SolveOptions):
        self.opts = opts
        self.stats = Stats()
        self.trace: list = []
        self.bound_history: list = []
        self.incumbent: Optional[tuple[dict, float]] = None
        self._ids = itertools.count()

    def integer_bounds(self) -> dict:
        raise NotImplementedError

    def evaluate(self, node: Node):
        """Return (LpSolution or None if infeasible, bound)."""
        raise NotImplementedError

    def finish_assignment(self, sol: LpSolution) -> dict:
        ints = self.integer_bounds()
        return {a: (float(round(v)) if a in ints else v) for a, v in sol.primal.items()}

    def objective_of(self, assignment: dict) -> float:
        raise NotImplementedError

    def _report(self, status, open_bound):
        inc = self.incumbent
        value = inc[1] if inc else None
        if status is Status.OPTIMAL:
            bound = value
        elif status is Status.INFEASIBLE:
            bound = math.inf
        else:
            bound = open_bound
            if inc is not None:
                bound = min(bound, value)
        return SolveReport(
            status,
            value,
            inc[0] if inc else {},
            bound,
            relative_gap(value, bound) if status is Status.LIMIT else 0.0,
            self.stats,
            self.trace,
            self.bound_history,
        )

    def run(self) -> SolveReport:
        root = Node(next(self._ids))
        heap = [(root.lp_bound, root.id, root)]
        while heap:
            open_bound = heap[0][0]
            if self.incumbent is not None:
                open_bound = min(open_bound, self.incumbent[1])
            self.bound_history.append(open_bound)
            if self.stats.nodes >= self.opts.max_nodes:
                rep = self._report(Status.LIMIT, heap[0][0])
                raise IterationLimit(f"node limit {self.opts.max_nodes} reached", rep)
            _, _, node = heapq.heappop(heap)
            if self.incumbent is not None and node.lp_bound >= self.incumbent[1] - OBJ_TOL:
                node.status = NodeStatus.FATHOMED
                continue
            self.stats.nodes += 1
            try:
                sol, bound = self.evaluate(node)
            except IterationLimit as exc:
                rest = [b for b, _, _ in heap] + [node.lp_bound]
                exc.report = self._report(Status.LIMIT, min(rest))
                raise
            entry = {"event": "node", "node": node.id, "parent": node.parent, "depth": node.depth}
            if sol is None:
                node.status = NodeStatus.FATHOMED
                entry.update(status="infeasible")
            else:
                node.lp_bound = max(node.lp_bound, bound)
                entry.update(bound=node.lp_bound)
                if self.incumbent is not None and node.lp_bound >= self.incumbent[1] - OBJ_TOL:
                    node.status = NodeStatus.FATHOMED
                    entry.update(status="fathomed")
                elif most_fractional(sol.primal, self.integer_bounds()) is None:
                    assignment = self.finish_assignment(sol)
                    value = self.objective_of(assignment)
                    node.status = NodeStatus.INTEGRAL
                    entry.update(status="integral", value=value)
                    if self.incumbent is None or value < self.incumbent[1] - OBJ_TOL:
                        self.incumbent = (assignment, value)
                else:
                    children = branch(node, sol.primal, self.integer_bounds(), lambda: next(self._ids))
                    node.status = NodeStatus.BRANCHED
                    self.stats.branches += 1
                    entry.update(status="branched")
                    for child in children:
                        heapq.heappush(heap, (child.lp_bound, child.id, child))
            if self.opts.trace:
                self.trace.append(entry)
        if self.incumbent is None:
            self.bound_history.append(math.inf)
            return self._report(Status.INFEASIBLE, math.inf)
        self.bound_history.append(self.incumbent[1])
        return self._report(Status.OPTIMAL, self.incumbent[1])


def _bounds_with(base: dict, extra: dict) -> dict:
    out = dict(base)
    for a, (lo, hi) in extra.items():
        blo, bhi = out[a]
        out[a] = (max(blo, lo), min(bhi, hi))
    return out


class _GroundTree(_Tree):
    def __init__(self, model: Model, opts: SolveOptions):
        super().__init__(opts)
        self.problem = ground(model, opts.max_ground_atoms, opts.max_ground_constraints)
        gp = self.problem
        self.base = {a: (gp.infos[a].lb, gp.infos[a].ub) for a in gp.atoms}
        self.cost = {a: gp.infos[a].objective for a in gp.atoms}
        self._ints = {a: self.base[a] for a in gp.atoms if gp.infos[a].vartype is VarType.INTEGER}
        self.stats.atoms_created = len(gp.atoms)
        self.stats.constraints_created = len(gp.constraints)

    def integer_bounds(self):
        return self._ints

    def objective_of(self, assignment):
        return sum(self.cost[a] * v for a, v in assignment.items())

    def evaluate(self, node):
        bounds = _bounds_with(self.base, node.extra_bounds)
        if any(lo > hi for lo, hi in bounds.values()):
            return None, math.inf
        lp = LpProblem(self.problem.atoms, self.cost, bounds, self.problem.constraints)
        sol = solve_lp(lp)
        self.stats.lp_solves += 1
        if sol.status is LpStatus.INFEASIBLE:
            return None, math.inf
        if sol.status is LpStatus.UNBOUNDED:
            raise ModelError("LP relaxation is unbounded")
        return sol, sol.objective_value


def solve_ground(model: Model, opts: Optional[SolveOptions] = None) -> SolveReport:
    """Ground every atom and row, then branch and bound on the full problem."""
    tree = _GroundTree(model, opts or SolveOptions(pricer="off"))
    return tree.run()


class _BpcTree(_Tree):
    def __init__(self, model: Model, opts: SolveOptions):
        super().__init__(opts)
        self.model = model
        self._info_cache: dict = {}
        self._declared_cache: dict = {}
        self.pool: dict[Atom, None] = {}
        self.active: dict[LinCons, None] = {}
        self._all_atoms = None
        if opts.pricer == "off" or _needs_explicit(model):
            self._all_atoms = ground_variables(model)
        if opts.pricer == "off":
            initial = self._all_atoms
        elif self._all_atoms is not None:
            initial = [a for a in self._all_atoms if self.info(a).lb != 0.0]
        else:
            initial = []
        for a in initial:
            self._add_atom(a)
        self.separate = separate_guided if opts.separator == "guided" else separate_naive
        self.last_pricing: Optional[PricingResult] = None

    def info(self, atom):
        vi = self._info_cache.get(atom)
        if vi is None:
            vi = self._info_cache[atom] = atom_info(self.model, atom)
        return vi

    def declared(self, atom):
        ok = self._declared_cache.get(atom)
        if ok is None:
            ok = self._declared_cache[atom] = is_declared(self.model, atom)
        return ok

    def _add_atom(self, atom):
        self.pool[atom] = None
        self.stats.atoms_created = len(self.pool)

    def integer_bounds(self):
        out = {}
        for a in self.pool:
            vi = self.info(a)
            if vi.vartype is VarType.INTEGER:
                out[a] = (vi.lb, vi.ub)
        return out

    def objective_of(self, assignment):
        return sum(self.info(a).objective * v for a, v in assignment.items())

    def restricted_lp(self, node: Node) -> LpProblem:
        atoms = list(self.pool)
        base = {a: (self.info(a).lb, self.info(a).ub) for a in atoms}
        bounds = _bounds_with(base, node.extra_bounds)
        rows = [LinCons(r.lb, tuple(t for t in r.terms if t.atom in self.pool), r.ub) for r in self.active]
        cost = {a: self.info(a).objective for a in atoms}
        return LpProblem(atoms, cost, bounds, rows, artificial_cost=self.opts.artificial_cost)

    def solve_restricted(self, node):
        lp = self.restricted_lp(node)
        if any(lo > hi for lo, hi in lp.bounds.values()):
            return lp, None
        sol = solve_lp(lp)
        self.stats.lp_solves += 1
        if sol.status is LpStatus.UNBOUNDED:
            raise ModelError("LP relaxation is unbounded")
        if sol.status is LpStatus.INFEASIBLE:
            return lp, None
        return lp, sol

    def price(self, sol):
        active = list(self.active)
        if self.opts.pricer == "naive":
            if self._all_atoms is None:
                self._all_atoms = ground_variables(self.model)
            return price_naive(self.model, self.pool, sol, active, self.opts.pricing_threshold,
                               self.info, self._all_atoms)
        return price_guided(self.model, self.pool, sol, active, self.opts.pricing_threshold, self.info)

    def _note(self, **entry):
        if self.opts.trace:
            self.trace.append(entry)

    def _add_rows(self, rows, node) -> bool:
        rows = [r for r in rows if r not in self.active]
        if self.opts.max_cuts_per_round is not None:
            rows = rows[: self.opts.max_cuts_per_round]
        for r in rows:
            self.active[r] = None
        self.stats.cuts_added += len(rows)
        self.stats.constraints_created = len(self.active)
        return bool(rows)

    def evaluate(self, node):
        rounds = 0
        while True:
            lp, sol = self.solve_restricted(node)
            if sol is None:
                return None, math.inf
            self._note(node=node.id, event="lp", objective=sol.objective_value,
                       atoms=len(self.pool), rows=len(self.active))
            if self.opts.pricer == "off":
                # every atom exists, so dropping rows only relaxes: a valid bound
                node.lp_bound = max(node.lp_bound, sol.objective_value)
            sep = self.separate(self.model, sol.primal, self.opts.violation_threshold, declared=self.declared)
            self.stats.separation_enumerated += sep.candidates_enumerated
            self.stats.separation_pruned += sep.candidates_pruned
            if self._add_rows(sep.rows, node):
                rounds += 1
                self.stats.cut_rounds += 1
                self._note(node=node.id, event="cut")
                if rounds >= self.opts.max_cut_rounds:
                    raise IterationLimit(f"cut round limit {self.opts.max_cut_rounds} reached", None)
                continue
            if self.opts.pricer != "off":
                pr = self.last_pricing = self.price(sol)
                self.stats.price_rounds += 1
                self.stats.pricing_enumerated += pr.candidates_enumerated
                self.stats.columns_built += pr.columns_built
                if pr.priced:
                    for a, _ in pr.priced:
                        self._add_atom(a)
                    self.stats.atoms_priced += len(pr.priced)
                    self._note(node=node.id, event="price")
                    continue
                node.lp_bound = max(node.lp_bound, sol.objective_value)
            if sol.artificial_total > FEAS_TOL:
                return None, math.inf
            if most_fractional(sol.primal, self.integer_bounds()) is None:
                # active rows are a subset: re-check the rounded point on the full model
                check = separate_naive(self.model, self.finish_assignment(sol),
                                       self.opts.violation_threshold, declared=self.declared)
                if self._add_rows(check.rows, node):
                    self._note(node=node.id, event="cut")
                    continue
            return sol, sol.objective_value


def _needs_explicit(model: Model) -> bool:
    """True if some atom may have a nonzero lower bound and must exist from the start."""
    if model.defaults.lb != 0.0:
        return True
    return any(r.value != 0.0 for r in model.rules_for("lb"))


def solve_bpc(model: Model, opts: Optional[SolveOptions] = None) -> SolveReport:
    """Branch-price-and-cut with lazily separated rows and lazily priced atoms."""
    tree = _BpcTree(model, opts or SolveOptions())
    return tree.run()


@dataclass
class RootRelaxation:
    solution: Optional[LpSolution]  # None if the root is infeasible
    pricing: Optional[PricingResult]  # the pricing round that closed the loop
    atoms: list
    rows: list


def root_relaxation(model: Model, opts: Optional[SolveOptions] = None) -> RootRelaxation:
    """Run only the root cut/price loop of :func:`solve_bpc`."""
    tree = _BpcTree(model, opts or SolveOptions())
    sol, _ = tree.evaluate(Node(0))
    return RootRelaxation(sol, tree.last_pricing, list(tree.pool), list(tree.active))


# --- exhaustive oracle ------------------------------------------------------

ENUM_LIMIT = 2 ** 24


def solve_enum(model: Model, limit: int = ENUM_LIMIT, chunk: int = 1 << 16) -> SolveReport:
    """Try every integer assignment; ties go to the lexicographically smallest.

    All atoms must be integer with bounds inside [-2, 2].
    """
    atoms = ground_variables(model)
    rows = ground_constraints(model, set(atoms))
    infos = [atom_info(model, a) for a in atoms]
    for a, vi in zip(atoms, infos):
        if vi.vartype is not VarType.INTEGER:
            raise ModelError(f"enumeration needs integer atoms; {a} is continuous")
        if vi.lb < -2 or vi.ub > 2:
            raise EnumSizeExceeded(f"{a} has bounds [{vi.lb}, {vi.ub}] outside [-2, 2]")
    lows = np.array([math.ceil(vi.lb) for vi in infos], dtype=np.int64)
    radix = np.array([math.floor(vi.ub) - math.ceil(vi.lb) + 1 for vi in infos], dtype=np.int64)
    total = math.prod(int(r) for r in radix)
    if total > limit:
        raise EnumSizeExceeded(f"{total} assignments exceed the limit of {limit}")
    cost = np.array([vi.objective for vi in infos])
    index = {a: k for k, a in enumerate(atoms)}
    A = np.zeros((len(rows), len(atoms)))
    for i, row in enumerate(rows):
        for coef, atom in row.terms:
            A[i, index[atom]] = coef
    lb = np.array([r.lb for r in rows])
    ub = np.array([r.ub for r in rows])
    # place values: first atom is the most significant digit
    place = np.ones(len(atoms), dtype=np.int64)
    for k in range(len(atoms) - 2, -1, -1):
        place[k] = place[k + 1] * radix[k + 1]
    best_value, best_x = None, None
    for start in range(0, total, chunk):
        ids = np.arange(start, min(total, start + chunk), dtype=np.int64)
        X = (ids[:, None] // place[None, :]) % radix[None, :] + lows[None, :]
        X = X.astype(float)
        ok = np.ones(len(ids), bool)
        if len(rows):
            act = X @ A.T
            ok &= np.all((act >= lb - 1e-9) & (act <= ub + 1e-9), axis=1)
        if not ok.any():
            continue
        vals = X @ cost
        vals[~ok] = np.inf
        k = int(np.argmin(vals))
        if best_value is None or vals[k] < best_value - 1e-9:
            best_value, best_x = float(vals[k]), X[k]
    stats = Stats(atoms_created=len(atoms), constraints_created=len(rows))
    if best_value is None:
        return SolveReport(Status.INFEASIBLE, None, {}, math.inf, 0.0, stats)
    assignment = {a: float(v) for a, v in zip(atoms, best_x)}
    return SolveReport(Status.OPTIMAL, best_value, assignment, best_value, 0.0, stats)
