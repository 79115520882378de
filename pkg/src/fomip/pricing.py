"""Search uncreated variables for negative reduced cost (column generation).

Only atoms whose lower bound is 0 are ever left uncreated, so an atom
outside the restricted LP sits at 0 and is worth creating exactly when its
reduced cost is negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .grounder import ground_variables, substitutions
from .lp import LpSolution, reduced_cost
from .model import Atom, Model, atom_info

PRICING_THRESHOLD = 1e-6


@dataclass
class PricingResult:
    priced: list = field(default_factory=list)  # [(Atom, reduced cost)], canonical atom order
    proof_complete: bool = True
    candidates_enumerated: int = 0
    columns_built: int = 0

    @property
    def atoms(self) -> list:
        return [a for a, _ in self.priced]


def column_of(model: Model, atom: Atom, active) -> list:
    """``(row index, coef)`` for every active row containing ``atom``."""
    return [(i, t.coef) for i, row in enumerate(active) for t in row.terms if t.atom == atom]


def column_index(active) -> dict:
    index: dict = {}
    for i, row in enumerate(active):
        for coef, atom in row.terms:
            index.setdefault(atom, []).append((i, coef))
    return index


def _info(model, info):
    return info or (lambda a: atom_info(model, a))


def price_naive(
    model: Model,
    restricted,
    sol: LpSolution,
    active,
    threshold: float = PRICING_THRESHOLD,
    info: Optional[Callable] = None,
    atoms=None,
) -> PricingResult:
    """Reduced cost of every uncreated atom; keep those below ``-threshold``.

    ``atoms`` may supply the precomputed ground variable list.
    """
    info = _info(model, info)
    index = column_index(active)
    res = PricingResult()
    for atom in atoms if atoms is not None else ground_variables(model):
        if atom in restricted:
            continue
        res.candidates_enumerated += 1
        vi = info(atom)
        res.columns_built += 1
        rc = reduced_cost(sol, vi.objective, index.get(atom, ()))
        if rc < -threshold and vi.ub > 0:
            res.priced.append((atom, rc))
    res.priced.sort()
    return res


def _min_objective(model: Model, functor: str) -> float:
    """Lower bound on the objective coefficient of any atom of ``functor``."""
    values = [model.defaults.objective]
    values += [r.value for r in model.rules_for("objective") if r.pattern.functor == functor]
    return min(values)


def price_guided(
    model: Model,
    restricted,
    sol: LpSolution,
    active,
    threshold: float = PRICING_THRESHOLD,
    info: Optional[Callable] = None,
) -> PricingResult:
    """Same priced set as :func:`price_naive`, skipping provably useless atoms.

    An atom's reduced cost is its objective minus the dual-weighted sum of
    its coefficients. Atoms with a nonnegative objective and no active-row
    term whose dual contribution is positive cannot go negative; whole
    variable families with that property are skipped unenumerated.
    """
    info = _info(model, info)
    attractive: set = set()  # atoms with a positive dual contribution somewhere
    attractive_functors: set = set()
    for y, row in zip(sol.duals, active):
        if y == 0.0:
            continue
        for coef, atom in row.terms:
            if y * coef > 0.0:
                attractive.add(atom)
                attractive_functors.add(atom.functor)
    index = None
    res = PricingResult()
    seen: set = set()
    for rule in model.variable_rules:
        functor = rule.head.functor
        if functor not in attractive_functors and _min_objective(model, functor) >= 0.0:
            continue
        for b in substitutions(rule, model):
            atom = rule.head.instantiate(b)
            if atom in restricted or atom in seen:
                continue
            seen.add(atom)
            res.candidates_enumerated += 1
            vi = info(atom)
            if vi.objective >= 0.0 and atom not in attractive:
                continue
            if index is None:
                index = column_index(active)
            res.columns_built += 1
            rc = reduced_cost(sol, vi.objective, index.get(atom, ()))
            if rc < -threshold and vi.ub > 0:
                res.priced.append((atom, rc))
    res.priced.sort()
    return res
