"""Column generation: create an atom only when its reduced cost is negative.

Run: python demos/04_pricing.py
"""

import pathlib

from fomip import SolveOptions, ground, load_model, root_relaxation

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"
model = load_model(MODELS / "sparse_cover.fomip")
full = ground(model)
print(f"full grounding: {len(full.atoms)} atoms, {len(full.constraints)} rows")

for pricer in ("naive", "guided"):
    root = root_relaxation(model, SolveOptions(pricer=pricer))
    pr = root.pricing
    print(f"\npricer={pricer}")
    print(f"  root LP bound {root.solution.objective_value:g}")
    print(f"  created {len(root.atoms)} atoms and {len(root.rows)} rows")
    print(f"  last pricing round: {len(pr.priced)} priced, proof complete: {pr.proof_complete}")
    print(f"  candidates looked at {pr.candidates_enumerated}, columns built {pr.columns_built}")

# an empty, complete pricing round certifies the restricted bound is global
