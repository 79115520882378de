"""Three solvers, one answer.

solve_ground builds everything then branches; solve_bpc builds rows and
atoms on demand; solve_enum tries every assignment. They should agree.

Run: python demos/05_bpc_vs_ground.py
"""

import pathlib

from fomip import SolveOptions, load_model, solve_bpc, solve_enum, solve_ground
from fomip.bpc import EnumSizeExceeded
from fomip.model import ModelError

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"

print(f"{'model':20} {'enum':>8} {'ground':>8} {'bpc':>8} {'atoms':>11} {'rows':>11} nodes")
for path in sorted(MODELS.glob("*.fomip")):
    model = load_model(path)
    g = solve_ground(model)
    b = solve_bpc(model, SolveOptions(separator="guided", pricer="guided"))
    try:
        e = solve_enum(model)
        e_obj = "infeas" if e.objective is None else f"{e.objective:g}"
    except (EnumSizeExceeded, ModelError):
        e_obj = "-"
    g_obj = "infeas" if g.objective is None else f"{g.objective:g}"
    b_obj = "infeas" if b.objective is None else f"{b.objective:g}"
    atoms = f"{b.stats.atoms_created}/{g.stats.atoms_created}"
    rows = f"{b.stats.constraints_created}/{g.stats.constraints_created}"
    print(f"{path.name:20} {e_obj:>8} {g_obj:>8} {b_obj:>8} {atoms:>11} {rows:>11} {b.stats.nodes}")

# the global bound only rises, and meets the incumbent at the end
rep = solve_bpc(load_model(MODELS / "hubs.fomip"))
print("\nhubs bound history:", [round(v, 3) for v in rep.bound_history])
