"""Write a ground problem in CPLEX LP text format.

Atoms are named ``functor_arg1_..._argN``; rows are ``c1 .. cn`` in
ground order. The format has no one-row form for ``lb <= e <= ub`` with
both bounds finite and different, so such a row is written as the pair
``cN_lo`` / ``cN_hi``.
"""

from __future__ import annotations

import math

from .grounder import GroundProblem
from .model import ModelError, VarType


class NameCollision(ModelError):
    pass


# words LP readers treat as section keywords wherever a name may appear
RESERVED = {
    "st", "s.t.", "st.", "subject", "such", "bound", "bounds", "free", "end", "inf", "infinity",
    "gen", "general", "generals", "bin", "binary", "binaries", "min", "max", "minimize", "maximize",
    "minimum", "maximum", "semi", "semis", "semi-continuous", "sos",
}


def lp_names(atoms) -> dict:
    names: dict = {}
    taken: dict = {}
    for atom in atoms:
        name = atom.mangled
        if name.lower() in RESERVED:
            raise NameCollision(f"{atom} mangles to the LP keyword {name!r}")
        if name in taken:
            raise NameCollision(f"{atom} and {taken[name]} both mangle to {name}")
        taken[name] = atom
        names[atom] = name
    return names


def _num(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _expr(pairs) -> str:
    out = []
    for coef, name in pairs:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1.0 else f"{_num(mag)} {name}"
        if not out:
            out.append(body if sign == "+" else f"- {body}")
        else:
            out.append(f"{sign} {body}")
    return " ".join(out)


def write_lp(gp: GroundProblem, name: str = "fomip") -> str:
    names = lp_names(gp.atoms)
    first = names[gp.atoms[0]] if gp.atoms else None
    lines = [f"\\ Problem: {name}", "Minimize"]
    obj = [(gp.infos[a].objective, names[a]) for a in gp.atoms if gp.infos[a].objective != 0.0]
    if obj:
        lines.append(f" obj: {_expr(obj)}")
    elif first:
        lines.append(f" obj: 0 {first}")
    else:
        lines.append(" obj:")
    lines.append("Subject To")
    for i, row in enumerate(gp.constraints, 1):
        expr = _expr([(c, names[a]) for c, a in row.terms]) or (f"0 {first}" if first else "0")
        if row.lb == row.ub:
            lines.append(f" c{i}: {expr} = {_num(row.lb)}")
        elif math.isfinite(row.lb) and math.isfinite(row.ub):
            lines.append(f" c{i}_lo: {expr} >= {_num(row.lb)}")
            lines.append(f" c{i}_hi: {expr} <= {_num(row.ub)}")
        elif math.isfinite(row.lb):
            lines.append(f" c{i}: {expr} >= {_num(row.lb)}")
        else:
            lines.append(f" c{i}: {expr} <= {_num(row.ub)}")
    lines.append("Bounds")
    for a in gp.atoms:
        vi = gp.infos[a]
        n = names[a]
        if vi.lb == -math.inf and vi.ub == math.inf:
            lines.append(f" {n} free")
        else:
            lines.append(f" {_num(vi.lb)} <= {n} <= {_num(vi.ub)}")
    ints = [names[a] for a in gp.atoms if gp.infos[a].vartype is VarType.INTEGER]
    if ints:
        lines.append("General")
        for k in range(0, len(ints), 8):
            lines.append(" " + " ".join(ints[k:k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"
