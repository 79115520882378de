"""Finite-domain grounding by nested-loop join.

Everything that evaluates a rule body goes through :func:`substitutions`;
the separators and pricers reuse it with a custom generation order and a
pruning callback.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .model import (
    Atom,
    AtomPattern,
    Compare,
    DomainLit,
    FomipError,
    LinCons,
    Model,
    ModelError,
    Rule,
    Var,
    VarInfo,
    atom_info,
)


class GroundAtomNotDeclared(FomipError):
    pass


class GroundSizeExceeded(FomipError):
    pass


def variable_domains(body, hints: Optional[dict] = None) -> dict:
    """Map each variable to the domain of its first positive domain literal."""
    out = dict(hints or {})
    for lit in body:
        if isinstance(lit, DomainLit) and not lit.negated and isinstance(lit.arg, Var):
            out.setdefault(lit.arg, lit.domain)
    return out


def comparison_domain(lit: Compare, model: Model, var_doms: dict) -> Optional[str]:
    """The domain whose declaration order ranks the two sides of ``lit``."""
    for side in (lit.left, lit.right):
        if isinstance(side, Var) and side in var_doms:
            return var_doms[side]
    consts = [s for s in (lit.left, lit.right) if not isinstance(s, Var)]
    for name, consts_of in model.domains.items():
        if all(c in consts_of for c in consts):
            return name
    return None


class _Filter:
    __slots__ = ("lit", "test")

    def __init__(self, lit, model: Model, var_doms: dict, members: dict):
        self.lit = lit
        if isinstance(lit, DomainLit):
            dom = members[lit.domain]
            arg = lit.arg
            if isinstance(arg, Var):
                test = lambda b: b[arg] in dom  # noqa: E731
            else:
                test = lambda b, _c=arg in dom: _c  # noqa: E731
        else:
            test = _compare_test(lit, model, var_doms)
        if lit.negated:
            self.test = lambda b, _t=test: not _t(b)
        else:
            self.test = test


def _compare_test(lit: Compare, model: Model, var_doms: dict):
    left, right, op = lit.left, lit.right, lit.op

    def get(term):
        if isinstance(term, Var):
            return lambda b: b[term]
        return lambda b: term

    lget, rget = get(left), get(right)
    if op == "=":
        return lambda b: lget(b) == rget(b)
    if op == "!=":
        return lambda b: lget(b) != rget(b)
    dom = comparison_domain(lit, model, var_doms)
    if dom is None:
        raise ModelError(f"cannot order {left} {op} {right}: no common domain")
    rank = model.domain_index(dom)

    if op not in ("<", "<="):
        raise ModelError(f"unknown comparison {op}")
    strict = op == "<"

    def test(b):
        try:
            lo, hi = rank[lget(b)], rank[rget(b)]
        except KeyError as exc:
            raise ModelError(f"constant {exc.args[0]} is not in domain {dom}") from None
        return lo < hi if strict else lo <= hi

    return test


@dataclass
class Plan:
    """Generation order plus filters scheduled at the step their variables become bound."""

    generators: list  # [(Var, tuple of constants)]
    filters: list  # filters[k] run right after generator k binds
    initial: list = field(default_factory=list)  # depend only on pre-bound variables


def make_plan(body, model: Model, bound=(), order=None, hints=None) -> Plan:
    var_doms = variable_domains(body, hints)
    members = {name: frozenset(consts) for name, consts in model.domains.items()}
    for lit in body:
        if isinstance(lit, DomainLit) and lit.domain not in model.domains:
            raise ModelError(f"unknown domain {lit.domain}")

    bound = set(bound)
    gen_lit: dict[Var, DomainLit] = {}
    written: list[Var] = []
    for lit in body:
        if isinstance(lit, DomainLit) and not lit.negated and isinstance(lit.arg, Var):
            if lit.arg not in bound and lit.arg not in gen_lit:
                gen_lit[lit.arg] = lit
                written.append(lit.arg)
    if order is None:
        seq = written
    else:
        seq = [v for v in order if v in gen_lit]
        seq += [v for v in written if v not in seq]

    step_of = {v: -1 for v in bound}
    for k, v in enumerate(seq):
        step_of[v] = k
    initial: list[_Filter] = []
    filters: list[list[_Filter]] = [[] for _ in seq]
    for lit in body:
        if lit is gen_lit.get(lit.arg if isinstance(lit, DomainLit) else None):
            continue
        vs = lit.variables()
        missing = [v for v in vs if v not in step_of]
        if missing:
            raise ModelError(f"unsafe rule: {', '.join(map(str, missing))} not bound by a positive domain literal")
        step = max((step_of[v] for v in vs), default=-1)
        f = _Filter(lit, model, var_doms, members)
        (initial if step < 0 else filters[step]).append(f)
    gens = [(v, model.domains[gen_lit[v].domain]) for v in seq]
    return Plan(gens, filters, initial)


def substitutions(
    rule: Rule,
    model: Model,
    binding: Optional[dict] = None,
    order=None,
    prune: Optional[Callable[[dict, int], bool]] = None,
    hints: Optional[dict] = None,
) -> Iterator[dict]:
    """Yield every total assignment satisfying ``rule.body``.

    Positive domain literals generate bindings in written order (or in
    ``order``, a sequence of variables); every other literal is checked as
    soon as its variables are bound. ``prune(binding, step)`` is called at
    interior steps; returning True skips the subtree. Yielded dicts are
    fresh copies.
    """
    binding = dict(binding or {})
    plan = make_plan(rule.body, model, binding.keys(), order, hints)
    if not all(f.test(binding) for f in plan.initial):
        return
    gens, filters = plan.generators, plan.filters
    last = len(gens) - 1
    if last < 0:
        yield binding
        return

    def walk(k):
        var, consts = gens[k]
        checks = filters[k]
        for c in consts:
            binding[var] = c
            if checks and not all(f.test(binding) for f in checks):
                continue
            if k == last:
                yield dict(binding)
            elif prune is None or not prune(binding, k):
                yield from walk(k + 1)
        binding.pop(var, None)

    yield from walk(0)


def body_holds(body, model: Model, binding: dict, hints: Optional[dict] = None) -> bool:
    rule = Rule(AtomPattern("_"), tuple(body))
    return next(substitutions(rule, model, binding, hints=hints), None) is not None


def signature_hints(model: Model, pattern: AtomPattern) -> dict:
    sig = model.signatures.get(pattern.functor, ())
    return {a: d for a, d in zip(pattern.args, sig) if isinstance(a, Var)}


def is_declared(model: Model, atom: Atom) -> bool:
    """True iff some variable rule derives ``atom``."""
    for rule in model.variable_rules:
        b = rule.head.match(atom)
        if b is not None and body_holds(rule.body, model, b):
            return True
    return False


def ground_variables(model: Model) -> list[Atom]:
    seen: dict[Atom, None] = {}
    for rule in model.variable_rules:
        for b in substitutions(rule, model):
            seen.setdefault(rule.head.instantiate(b), None)
    return list(seen)


def ground_constraints(model: Model, declared=None) -> list[LinCons]:
    """One normalized row per satisfying substitution, duplicates removed."""
    if declared is None:
        declared = set(ground_variables(model))
    seen: dict[LinCons, None] = {}
    for rule in model.constraint_rules:
        for b in substitutions(rule, model):
            row = rule.head.instantiate(b)
            for atom in row.atoms:
                if atom not in declared:
                    raise GroundAtomNotDeclared(f"{atom} is used in a constraint but is not a variable")
            seen.setdefault(row, None)
    return list(seen)


@dataclass
class GroundProblem:
    atoms: list
    infos: dict
    constraints: list


def ground(model: Model, max_atoms: Optional[int] = None, max_constraints: Optional[int] = None) -> GroundProblem:
    atoms = ground_variables(model)
    if max_atoms is not None and len(atoms) > max_atoms:
        raise GroundSizeExceeded(f"{len(atoms)} ground atoms exceed the limit of {max_atoms}")
    rows = ground_constraints(model, set(atoms))
    if max_constraints is not None and len(rows) > max_constraints:
        raise GroundSizeExceeded(f"{len(rows)} ground constraints exceed the limit of {max_constraints}")
    infos: dict[Atom, VarInfo] = {a: atom_info(model, a) for a in atoms}
    return GroundProblem(atoms, infos, rows)
