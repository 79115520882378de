"""Core types: atoms, linear constraints, rules and models.

Bounds are plain floats; an absent lower bound is ``-inf`` and an absent
upper bound is ``+inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Union

INF = math.inf


class FomipError(Exception):
    """Base class for every error raised by this package."""


class ModelError(FomipError):
    pass


class BothBoundsAbsent(ModelError):
    pass


class LbExceedsUb(ModelError):
    pass


class IllegalBound(ModelError):
    pass


class UnknownFunctor(ModelError):
    pass


class InvalidVarInfo(ModelError):
    pass


@dataclass(frozen=True, order=True)
class Atom:
    """A ground term ``functor(c1, ..., cn)``; one atom is one MIP variable."""

    functor: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        if not self.args:
            return self.functor
        return f"{self.functor}({','.join(self.args)})"

    @property
    def mangled(self) -> str:
        return "_".join((self.functor,) + self.args)


class LinTerm(NamedTuple):
    coef: float
    atom: Atom


def _check_bounds(lb: float, ub: float) -> None:
    if math.isnan(lb) or math.isnan(ub):
        raise IllegalBound("bound is NaN")
    if lb == INF:
        raise IllegalBound("+inf is not a legal lower bound")
    if ub == -INF:
        raise IllegalBound("-inf is not a legal upper bound")
    if lb == -INF and ub == INF:
        raise BothBoundsAbsent("constraint has no finite bound")
    if lb > ub:
        raise LbExceedsUb(f"lower bound {lb} exceeds upper bound {ub}")


@dataclass(frozen=True)
class LinCons:
    """``lb <= sum(coef * atom) <= ub`` in normalized form.

    Build these through :func:`normalize_lincons`; the constructor only
    validates.
    """

    lb: float
    terms: tuple[LinTerm, ...]
    ub: float

    def __post_init__(self):
        _check_bounds(self.lb, self.ub)
        prev = None
        for coef, atom in self.terms:
            if coef == 0.0 or not math.isfinite(coef):
                raise ModelError(f"illegal coefficient {coef} on {atom}")
            if prev is not None and not prev < atom:
                raise ModelError("terms not in canonical order or duplicated")
            prev = atom

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(t.atom for t in self.terms)

    def sort_key(self):
        return (tuple((t.atom, t.coef) for t in self.terms), self.lb, self.ub)

    def __str__(self):
        expr = " + ".join(f"{c:g}*{a}" for c, a in self.terms) or "0"
        return f"{self.lb:g} <= {expr} <= {self.ub:g}"


def normalize_lincons(lb: float, terms, ub: float) -> LinCons:
    """Merge duplicate atoms, drop zero coefficients, sort terms canonically.

    ``terms`` is any iterable of ``(coef, atom)`` pairs.
    """
    lb, ub = float(lb), float(ub)
    _check_bounds(lb, ub)
    merged: dict[Atom, float] = {}
    for coef, atom in terms:
        merged[atom] = merged.get(atom, 0.0) + float(coef)
    out = tuple(LinTerm(merged[a], a) for a in sorted(merged) if merged[a] != 0.0)
    return LinCons(lb, out, ub)


class VarType(Enum):
    INTEGER = "int"
    CONTINUOUS = "cont"


@dataclass(frozen=True)
class VarInfo:
    objective: float = 0.0
    lb: float = 0.0
    ub: float = 1.0
    vartype: VarType = VarType.INTEGER

    def validate(self, what="variable") -> None:
        if self.lb > self.ub or self.lb == INF or self.ub == -INF:
            raise InvalidVarInfo(f"{what}: bounds [{self.lb}, {self.ub}] are empty")
        if (self.vartype is VarType.INTEGER and math.isfinite(self.lb) and math.isfinite(self.ub)
                and math.floor(self.ub) < math.ceil(self.lb)):
            raise InvalidVarInfo(f"{what}: integer bounds [{self.lb}, {self.ub}] contain no integer")


DEFAULT_INFO = VarInfo()


# --- rules ---------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    """A logic variable (capitalized identifier)."""

    name: str

    def __str__(self):
        return self.name


Term = Union[Var, str]


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    length: int


@dataclass(frozen=True)
class AtomPattern:
    functor: str
    args: tuple[Term, ...] = ()

    def variables(self) -> list[Var]:
        return [a for a in self.args if isinstance(a, Var)]

    def instantiate(self, binding: dict) -> Atom:
        return Atom(self.functor, tuple(binding[a] if isinstance(a, Var) else a for a in self.args))

    def match(self, atom: Atom) -> Optional[dict]:
        """Unify with a ground atom; returns the binding or None."""
        if atom.functor != self.functor or len(atom.args) != len(self.args):
            return None
        binding: dict[Var, str] = {}
        for pat, const in zip(self.args, atom.args):
            if isinstance(pat, Var):
                if binding.setdefault(pat, const) != const:
                    return None
            elif pat != const:
                return None
        return binding

    def __str__(self):
        if not self.args:
            return self.functor
        return f"{self.functor}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class DomainLit:
    """``domain(arg)``, optionally negated."""

    domain: str
    arg: Term
    negated: bool = False

    def variables(self) -> list[Var]:
        return [self.arg] if isinstance(self.arg, Var) else []


COMPARISON_OPS = ("=", "!=", "<", "<=")


@dataclass(frozen=True)
class Compare:
    """``left op right`` over constants, ordered by domain declaration."""

    op: str
    left: Term
    right: Term
    negated: bool = False

    def variables(self) -> list[Var]:
        return [t for t in (self.left, self.right) if isinstance(t, Var)]


Literal = Union[DomainLit, Compare]


@dataclass(frozen=True)
class ConsTemplate:
    lb: float
    terms: tuple[tuple[float, AtomPattern], ...]
    ub: float

    def variables(self) -> list[Var]:
        out = []
        for _, pat in self.terms:
            out.extend(pat.variables())
        return out

    def instantiate(self, binding: dict) -> LinCons:
        return normalize_lincons(self.lb, ((c, p.instantiate(binding)) for c, p in self.terms), self.ub)


@dataclass(frozen=True)
class Rule:
    """``head :- body``. The head is an AtomPattern or a ConsTemplate."""

    head: Union[AtomPattern, ConsTemplate]
    body: tuple[Literal, ...] = ()
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    def head_variables(self) -> list[Var]:
        return self.head.variables()

    def unsafe_variables(self) -> list[Var]:
        """Variables not bound by some positive domain literal, first-seen order."""
        bound = {lit.arg for lit in self.body
                 if isinstance(lit, DomainLit) and not lit.negated and isinstance(lit.arg, Var)}
        needed = list(self.head_variables())
        for lit in self.body:
            needed.extend(lit.variables())
        seen, out = set(), []
        for v in needed:
            if v not in bound and v not in seen:
                seen.add(v)
                out.append(v)
        return out


ATTRIBUTES = ("objective", "lb", "ub", "vartype")


@dataclass(frozen=True)
class ValueRule:
    """``attr pattern = value [:- body]`` for objective/lb/ub/vartype."""

    attr: str
    pattern: AtomPattern
    value: Union[float, VarType]
    body: tuple[Literal, ...] = ()
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    @property
    def rule(self) -> Rule:
        return Rule(self.pattern, self.body, self.span)


@dataclass(frozen=True)
class Model:
    domains: dict = field(default_factory=dict)  # name -> tuple of constants
    signatures: dict = field(default_factory=dict)  # functor -> tuple of domain names
    variable_rules: tuple[Rule, ...] = ()
    constraint_rules: tuple[Rule, ...] = ()
    value_rules: tuple[ValueRule, ...] = ()
    defaults: VarInfo = DEFAULT_INFO

    def rules_for(self, attr: str) -> list[ValueRule]:
        return [r for r in self.value_rules if r.attr == attr]

    def domain_index(self, name: str) -> dict:
        return {c: i for i, c in enumerate(self.domains[name])}


def atom_info(model: Model, atom: Atom) -> VarInfo:
    """Objective, bounds and type of ``atom``: first matching rule per attribute, else the default."""
    sig = model.signatures.get(atom.functor)
    if sig is None or len(sig) != len(atom.args):
        raise UnknownFunctor(f"no variable family {atom.functor}/{len(atom.args)}")
    from .grounder import body_holds, signature_hints  # grounder depends on this module

    values = {}
    for attr in ATTRIBUTES:
        for vr in model.rules_for(attr):
            binding = vr.pattern.match(atom)
            if binding is not None and body_holds(vr.body, model, binding, signature_hints(model, vr.pattern)):
                values[attr] = vr.value
                break
    info = VarInfo(
        objective=float(values.get("objective", model.defaults.objective)),
        lb=float(values.get("lb", model.defaults.lb)),
        ub=float(values.get("ub", model.defaults.ub)),
        vartype=values.get("vartype", model.defaults.vartype),
    )
    info.validate(str(atom))
    return info
