"""Deterministic JSON for ground problems and solve reports (schema 1)."""

from __future__ import annotations

import dataclasses
import json
import math

from .bpc import SolveReport
from .grounder import GroundProblem

SCHEMA = 1


def fmt(x):
    """Round to 9 significant digits; infinities become the strings "inf"/"-inf"."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    x = float(f"{x:.9g}")
    return 0.0 if x == 0 else x


def ground_json(gp: GroundProblem) -> dict:
    return {
        "schema": SCHEMA,
        "atoms": [
            {
                "atom": str(a),
                "objective": fmt(gp.infos[a].objective),
                "lb": fmt(gp.infos[a].lb),
                "ub": fmt(gp.infos[a].ub),
                "vartype": gp.infos[a].vartype.value,
            }
            for a in gp.atoms
        ],
        "constraints": [
            {"lb": fmt(c.lb), "terms": [[fmt(t.coef), str(t.atom)] for t in c.terms], "ub": fmt(c.ub)}
            for c in gp.constraints
        ],
    }


def _trace_entry(entry: dict) -> dict:
    return {k: (fmt(v) if isinstance(v, float) else v) for k, v in entry.items()}


def report_json(rep: SolveReport, verbosity: int = 0, extra=None) -> dict:
    out = {
        "schema": SCHEMA,
        "status": rep.status.value,
        "objective": fmt(rep.objective),
        "bound": fmt(rep.bound),
        "gap": fmt(rep.gap),
        "assignment": {str(a): fmt(v) for a, v in sorted(rep.assignment.items()) if fmt(v) != 0.0},
        "stats": dataclasses.asdict(rep.stats),
    }
    if extra:
        out.update(extra)
    if verbosity >= 2:
        out["trace"] = [_trace_entry(e) for e in rep.trace]
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def summary(rep: SolveReport) -> str:
    s = rep.stats
    lines = [f"status:    {rep.status.value}"]
    if rep.objective is not None:
        lines.append(f"objective: {rep.objective:.9g}")
    lines.append(f"bound:     {rep.bound:.9g}")
    lines.append(f"gap:       {rep.gap:.3g}")
    lines.append(
        f"nodes {s.nodes}, LP solves {s.lp_solves}, atoms created {s.atoms_created}, "
        f"rows created {s.constraints_created}"
    )
    if s.separation_enumerated or s.pricing_enumerated:
        lines.append(
            f"separation: {s.separation_enumerated} candidates, {s.separation_pruned} pruned; "
            f"pricing: {s.pricing_enumerated} candidates, {s.columns_built} columns"
        )
    return "\n".join(lines) + "\n"
