"""First-order mixed-integer programming.

Models are written in a small rule language whose ground atoms are MIP
variables. They can be solved by grounding everything up front or by
branch-price-and-cut, which creates rows and atoms only when the LP needs
them.
"""

from .bpc import (
    IterationLimit,
    RootRelaxation,
    Node,
    SolveOptions,
    SolveReport,
    Status,
    branch,
    root_relaxation,
    solve_bpc,
    solve_enum,
    solve_ground,
)
from .grounder import GroundProblem, ground, ground_constraints, ground_variables, substitutions
from .lp import LpProblem, LpSolution, LpStatus, activity, reduced_cost, solve_lp
from .model import Atom, LinCons, LinTerm, Model, VarInfo, VarType, atom_info, normalize_lincons
from .parser import Diagnostic, ParseError, SourceModel, format_model, load_model, parse_model, validate_model
from .pricing import PricingResult, column_of, price_guided, price_naive
from .separation import SeparationResult, separate_guided, separate_naive, violates_bounds

__version__ = "0.1.0"
