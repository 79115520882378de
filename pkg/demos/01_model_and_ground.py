"""Parse a rule model, look at its ground atoms and rows.

Run: python demos/01_model_and_ground.py
"""

import pathlib

from fomip import atom_info, format_model, ground, load_model

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"

model = load_model(MODELS / "protein.fomip")
print("domains:", model.domains)
print("families:", model.signatures)

# every ground atom is one MIP variable
problem = ground(model)
print(f"\n{len(problem.atoms)} atoms")
for atom in problem.atoms:
    info = atom_info(model, atom)
    print(f"  {str(atom):22} obj={info.objective:+g} bounds=[{info.lb:g}, {info.ub:g}] {info.vartype.value}")

# one constraint rule, one row per satisfying substitution
print(f"\n{len(problem.constraints)} rows")
for row in problem.constraints:
    print("  ", row)

# the printer emits text that parses back to the same model
print("\nround trip:")
print(format_model(model))
