import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fomip import (
    Atom,
    LpProblem,
    activity,
    ground,
    normalize_lincons,
    parse_model,
    separate_guided,
    separate_naive,
    solve_lp,
    violates_bounds,
)
from fomip.grounder import GroundAtomNotDeclared

from conftest import random_model

LOC = Atom("location", ("p1", "l1"))


def fig1_row():
    return normalize_lincons(1.0, [(1.0, LOC), (1.0, Atom("interaction", ("p1", "p2")))], math.inf)


def test_activity_examples():
    row = fig1_row()
    assert activity({}, row) == 0.0
    assert activity({LOC: 0.4, Atom("interaction", ("p1", "p2")): 0.3}, row) == pytest.approx(0.7)


@settings(max_examples=50)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.floats(-3, 3), st.floats(-3, 3))
def test_activity_is_linear(v, alpha, beta):
    a, b = Atom("a"), Atom("b")
    row = normalize_lincons(0, [(2.0, a), (-1.5, b)], 1)
    x, y = {a: v[0], b: v[1]}, {a: v[2], b: v[3]}
    mix = {k: alpha * x[k] + beta * y[k] for k in x}
    assert activity(mix, row) == pytest.approx(alpha * activity(x, row) + beta * activity(y, row), abs=1e-9)


def test_violates_bounds_examples():
    assert violates_bounds(0.7, normalize_lincons(1.0, [(1.0, LOC)], math.inf))
    assert not violates_bounds(1.0, normalize_lincons(1.0, [(1.0, LOC)], math.inf))
    assert not violates_bounds(1.0 - 5e-7, normalize_lincons(1.0, [(1.0, LOC)], math.inf))
    assert violates_bounds(2.1, normalize_lincons(0.0, [(1.0, LOC)], 2.0))


def test_no_finite_bound_is_never_violated():
    row = normalize_lincons(1.0, [(1.0, LOC)], math.inf)
    object.__setattr__(row, "lb", -math.inf)  # bypass validation to test the predicate alone
    assert not violates_bounds(0.0, row)


def test_naive_all_zero(protein):
    res = separate_naive(protein, {})
    assert len(res.cuts) == 4
    assert all(v == 1.0 for _, v in res.cuts)
    assert res.candidates_enumerated == 4


def test_naive_all_one(protein):
    x = {a: 1.0 for a in ground(protein).atoms}
    assert separate_naive(protein, x).cuts == []


def test_no_constraint_rules():
    m = parse_model("domain d = {a};\nvar x(d);\n")
    assert separate_naive(m, {}).cuts == [] and separate_guided(m, {}).cuts == []


def test_guided_prunes_satisfied_prefix(protein):
    x = {a: 0.0 for a in ground(protein).atoms}
    x[LOC] = 1.0
    naive, guided = separate_naive(protein, x), separate_guided(protein, x)
    # location(p1,l1) sits in one of the four rows, which is then satisfied
    assert len(guided.cuts) == 3
    assert guided.cuts == naive.cuts
    assert guided.candidates_enumerated < naive.candidates_enumerated
    assert guided.candidates_pruned >= 1


def test_guided_all_zero_prunes_nothing(protein):
    res = separate_guided(protein, {})
    assert res.candidates_pruned == 0
    assert len(res.cuts) == 4


def test_cuts_sorted_and_capped():
    m = parse_model("domain d = {a, b, c};\nvar x(d);\nconstraint x(X) <= 0 :- d(X);\n")
    x = {Atom("x", ("a",)): 0.2, Atom("x", ("b",)): 0.9, Atom("x", ("c",)): 0.5}
    res = separate_guided(m, x)
    assert [round(v, 6) for _, v in res.cuts] == [0.9, 0.5, 0.2]
    assert len(separate_naive(m, x, max_cuts=2).cuts) == 2


def test_undeclared_atom_in_violated_row():
    m = parse_model("domain d = {a, b};\nvar x(X) :- d(X), X != b;\nconstraint 1 <= x(X) :- d(X);\n")
    with pytest.raises(GroundAtomNotDeclared):
        separate_naive(m, {})


def _point(gp, rng):
    return {a: rng.choice([0.0, 1.0, rng.random()]) for a in gp.atoms if rng.random() < 0.8}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_guided_equals_naive_on_random_models(seed):
    m = random_model(seed)
    gp = ground(m)
    rng = random.Random(seed)
    for _ in range(5):
        x = _point(gp, rng)
        n, g = separate_naive(m, x), separate_guided(m, x)
        assert n.cuts == g.cuts
        assert g.candidates_enumerated <= n.candidates_enumerated


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_every_cut_is_a_violated_ground_row(seed):
    m = random_model(seed)
    gp = ground(m)
    x = _point(gp, random.Random(seed))
    rows = set(gp.constraints)
    for row, v in separate_guided(m, x).cuts:
        assert row in rows
        assert violates_bounds(activity(x, row), row)
        assert v > 1e-6


def test_adding_cuts_does_not_lower_the_bound():
    m = parse_model(
        "domain d = {a, b, c, e};\nvar x(d);\nobjective x(X) = -1;\n"
        "constraint x(X) + x(Y) <= 1 :- d(X), d(Y), X < Y;\n"
    )
    gp = ground(m)
    rows, prev = [], -math.inf
    for _ in range(10):
        p = LpProblem(gp.atoms, {a: -1.0 for a in gp.atoms}, {a: (0.0, 1.0) for a in gp.atoms}, rows)
        sol = solve_lp(p)
        assert sol.objective_value >= prev - 1e-9
        prev = sol.objective_value
        cuts = separate_guided(m, sol.primal).rows
        if not cuts:
            break
        rows = rows + cuts
    assert prev == pytest.approx(-2.0)
