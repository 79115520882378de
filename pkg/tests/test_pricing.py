import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fomip import (
    Atom,
    LinCons,
    LpProblem,
    SolveOptions,
    column_of,
    ground,
    normalize_lincons,
    parse_model,
    price_guided,
    price_naive,
    root_relaxation,
    solve_lp,
)
from fomip.pricing import column_index

from conftest import random_model

INTER = Atom("interaction", ("p1", "p2"))


def restricted_lp(gp, pool, active, artificial_cost=1e6):
    rows = [LinCons(r.lb, tuple(t for t in r.terms if t.atom in pool), r.ub) for r in active]
    return LpProblem(
        list(pool),
        {a: gp.infos[a].objective for a in pool},
        {a: (gp.infos[a].lb, gp.infos[a].ub) for a in pool},
        rows,
        artificial_cost=artificial_cost,
    )


def state(m, rng):
    """A mid-solve state: a random created pool, random active rows and their LP."""
    gp = ground(m)
    pool = [a for a in gp.atoms if rng.random() < 0.4]
    active = [r for r in gp.constraints if rng.random() < 0.6]
    sol = solve_lp(restricted_lp(gp, pool, active))
    return gp, pool, active, sol


def test_column_of_fig1(protein):
    rows = ground(protein).constraints
    assert column_of(protein, INTER, rows) == [(i, 1.0) for i, r in enumerate(rows) if INTER in r.atoms]
    assert len(column_of(protein, INTER, rows)) == 2


def test_column_of_absent_atom(protein):
    rows = ground(protein).constraints
    assert column_of(protein, Atom("interaction", ("p1", "p1")), rows) == []


def test_column_grows_with_a_cut(protein):
    rows = list(ground(protein).constraints)
    before = len(column_of(protein, INTER, rows))
    rows.append(normalize_lincons(-math.inf, [(2.0, INTER)], 1.0))
    assert column_of(protein, INTER, rows)[-1] == (len(rows) - 1, 2.0)
    assert len(column_of(protein, INTER, rows)) == before + 1
    assert column_index(rows)[INTER] == column_of(protein, INTER, rows)


def test_everything_restricted(protein):
    gp = ground(protein)
    sol = solve_lp(restricted_lp(gp, gp.atoms, gp.constraints))
    for pricer in (price_naive, price_guided):
        res = pricer(protein, set(gp.atoms), sol, gp.constraints)
        assert res.priced == [] and res.proof_complete


def test_negative_objective_empty_column(protein):
    gp = ground(protein)
    sol = solve_lp(restricted_lp(gp, [], []))
    for pricer in (price_naive, price_guided):
        res = pricer(protein, set(), sol, [])
        assert (INTER, -1.0) in res.priced
        assert all(rc == -1.0 and a.functor == "interaction" for a, rc in res.priced)


def test_all_nonnegative_costs_no_work():
    m = parse_model("domain d = {a, b};\nvar x(d);\nobjective x(X) = 2;\n")
    sol = solve_lp(LpProblem([], {}, {}, []))
    res = price_guided(m, set(), sol, [])
    assert res.priced == [] and res.columns_built == 0 and res.candidates_enumerated == 0


def test_upper_bound_zero_never_priced():
    m = parse_model("domain d = {a};\nvar x(d);\nobjective x(X) = -1;\nub x(X) = 0;\n")
    sol = solve_lp(LpProblem([], {}, {}, []))
    assert price_naive(m, set(), sol, []).priced == []
    assert price_guided(m, set(), sol, []).priced == []


def test_priced_atoms_do_not_raise_the_bound(protein):
    gp = ground(protein)
    pool = [Atom("location", ("p1", "l1"))]
    active = list(gp.constraints)
    prev = solve_lp(restricted_lp(gp, pool, active))
    for _ in range(10):
        res = price_guided(protein, set(pool), prev, active)
        if not res.priced:
            break
        pool += res.atoms
        sol = solve_lp(restricted_lp(gp, pool, active))
        assert sol.objective_value <= prev.objective_value + 1e-6
        prev = sol
    assert prev.objective_value == pytest.approx(-4.0)


@pytest.mark.parametrize("seed", range(100))
def test_guided_equals_naive(seed):
    m = random_model(seed)
    rng = random.Random(seed)
    gp, pool, active, sol = state(m, rng)
    n = price_naive(m, set(pool), sol, active)
    g = price_guided(m, set(pool), sol, active)
    assert n.priced == g.priced
    assert g.candidates_enumerated <= n.candidates_enumerated
    assert g.proof_complete and n.proof_complete


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["naive", "guided"]))
def test_certificate_matches_full_lp(seed, pricer):
    m = random_model(seed)
    opts = SolveOptions(pricer=pricer)
    root = root_relaxation(m, opts)
    if root.solution is None or root.pricing is None or root.pricing.priced:
        return
    gp = ground(m)
    full = solve_lp(restricted_lp(gp, gp.atoms, gp.constraints, opts.artificial_cost))
    assert root.solution.objective_value == pytest.approx(full.objective_value, abs=1e-6)
