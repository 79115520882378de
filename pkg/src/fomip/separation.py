"""Find ground instances of constraint rules violated by an LP point.

``separate_naive`` grounds every instance and tests it. ``separate_guided``
returns the same cuts but binds the variables of one linear term at a time
and abandons a partial substitution as soon as the terms bound so far,
plus the most favourable value the remaining terms could take, already
satisfy the row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .grounder import GroundAtomNotDeclared, is_declared, substitutions
from .lp import activity
from .model import LinCons, Model, Rule, Var

VIOLATION_THRESHOLD = 1e-6
# Pruning keeps this much extra room so float reassociation in partial sums
# can never hide a cut the full activity would report.
_PRUNE_MARGIN = 1e-9


@dataclass
class SeparationResult:
    cuts: list = field(default_factory=list)  # [(LinCons, violation)], most violated first
    candidates_enumerated: int = 0
    candidates_pruned: int = 0

    @property
    def rows(self) -> list:
        return [c for c, _ in self.cuts]


def violation(act: float, row: LinCons) -> float:
    return max(row.lb - act, act - row.ub, 0.0)


def violates_bounds(act: float, row: LinCons, threshold: float = VIOLATION_THRESHOLD) -> bool:
    """True iff ``act`` lies more than ``threshold`` outside a finite bound of ``row``."""
    return act < row.lb - threshold or act > row.ub + threshold


def _point(x) -> dict:
    return x.primal if hasattr(x, "primal") else x


class _Collector:
    def __init__(self, threshold, declared):
        self.threshold = threshold
        self.declared = declared
        self.found: dict[LinCons, float] = {}
        self.checked: dict = {}

    def offer(self, row: LinCons, x: dict):
        act = activity(x, row)
        if violates_bounds(act, row, self.threshold) and row not in self.found:
            for atom in row.atoms:
                ok = self.checked.get(atom)
                if ok is None:
                    ok = self.checked[atom] = self.declared(atom)
                if not ok:
                    raise GroundAtomNotDeclared(f"{atom} is used in a constraint but is not a variable")
            self.found[row] = violation(act, row)

    def result(self, enumerated, pruned, max_cuts) -> SeparationResult:
        cuts = sorted(self.found.items(), key=lambda kv: (-kv[1], kv[0].sort_key()))
        if max_cuts is not None:
            cuts = cuts[:max_cuts]
        return SeparationResult(cuts, enumerated, pruned)


def separate_naive(
    model: Model,
    x,
    threshold: float = VIOLATION_THRESHOLD,
    max_cuts: Optional[int] = None,
    declared: Optional[Callable] = None,
) -> SeparationResult:
    """Generate-and-test over every ground instance of every constraint rule.

    ``x`` is an LpSolution or a mapping atom -> value; missing atoms read 0.
    """
    x = _point(x)
    col = _Collector(threshold, declared or (lambda a: is_declared(model, a)))
    enumerated = 0
    for rule in model.constraint_rules:
        for b in substitutions(rule, model):
            enumerated += 1
            col.offer(rule.head.instantiate(b), x)
    return col.result(enumerated, 0, max_cuts)


def term_order(rule: Rule) -> list[Var]:
    """Generation order binding one term's variables at a time, cheapest term first."""
    bound: list[Var] = []
    pending = [list(dict.fromkeys(p.variables())) for _, p in rule.head.terms]
    while pending:
        best = min(range(len(pending)), key=lambda k: sum(v not in bound for v in pending[k]))
        for v in pending.pop(best):
            if v not in bound:
                bound.append(v)
    return bound


def value_ranges(x: dict) -> dict:
    """Per functor, the interval holding every value of its atoms (0 included)."""
    out: dict[str, list] = {}
    for atom, v in x.items():
        r = out.setdefault(atom.functor, [0.0, 0.0])
        r[0] = min(r[0], v)
        r[1] = max(r[1], v)
    return out


class _RulePruner:
    """Optimistic-bound test for partial substitutions of one constraint rule."""

    def __init__(self, rule: Rule, order: list[Var], x: dict, ranges: dict, threshold: float):
        head = rule.head
        self.lb, self.ub = head.lb, head.ub
        self.x = x
        self.threshold = threshold
        step = {v: k for k, v in enumerate(order)}
        self.terms = []
        for coef, pat in head.terms:
            done = max((step.get(v, len(order)) for v in pat.variables()), default=-1)
            lo, hi = ranges.get(pat.functor, (0.0, 0.0))
            self.terms.append((done, coef, pat, min(coef * lo, coef * hi), max(coef * lo, coef * hi)))
        self.pruned = 0

    def __call__(self, binding: dict, k: int) -> bool:
        low = high = 0.0
        for done, coef, pat, cmin, cmax in self.terms:
            if done <= k:
                v = coef * self.x.get(pat.instantiate(binding), 0.0)
                low += v
                high += v
            else:
                low += cmin
                high += cmax
        safe = self.threshold - _PRUNE_MARGIN
        below_possible = math.isfinite(self.lb) and low < self.lb - safe
        above_possible = math.isfinite(self.ub) and high > self.ub + safe
        if below_possible or above_possible:
            return False
        self.pruned += 1
        return True


def separate_guided(
    model: Model,
    x,
    threshold: float = VIOLATION_THRESHOLD,
    max_cuts: Optional[int] = None,
    declared: Optional[Callable] = None,
) -> SeparationResult:
    """Same cuts as :func:`separate_naive`, found by a pruned search."""
    x = _point(x)
    col = _Collector(threshold, declared or (lambda a: is_declared(model, a)))
    ranges = value_ranges(x)
    enumerated = pruned = 0
    for rule in model.constraint_rules:
        order = term_order(rule)
        pruner = _RulePruner(rule, order, x, ranges, threshold)
        # value ranges alone may already show no instance can be violated
        if not pruner({}, -1):
            for b in substitutions(rule, model, order=order, prune=pruner):
                enumerated += 1
                col.offer(rule.head.instantiate(b), x)
        pruned += pruner.pruned
    return col.result(enumerated, pruned, max_cuts)
