import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fomip import Atom, Node, SolveOptions, Status, branch, ground, parse_model, solve_bpc, solve_enum, solve_ground
from fomip.bpc import EnumSizeExceeded, IterationLimit, NoFractionalVariable, most_fractional, relative_gap
from fomip.lp import activity
from fomip.model import ModelError

from conftest import CORPUS, corpus_model, random_model

a, b = Atom("a"), Atom("b")
ENUMERABLE = [n for n in CORPUS if n not in ("mixed.fomip", "sparse_cover.fomip")]
COMBOS = [(s, p) for s in ("naive", "guided") for p in ("naive", "guided", "off")]


def counter():
    n = iter(range(1, 100))
    return lambda: next(n)


def feasible(model, rep):
    gp = ground(model)
    for row in gp.constraints:
        act = activity(rep.assignment, row)
        assert row.lb - 1e-6 <= act <= row.ub + 1e-6
    for atom, v in rep.assignment.items():
        vi = gp.infos[atom]
        assert vi.lb - 1e-6 <= v <= vi.ub + 1e-6
        if vi.vartype.value == "int":
            assert abs(v - round(v)) <= 1e-6


# branching -------------------------------------------------------------------


def test_branch_half():
    down, up = branch(Node(0), {a: 0.5}, {a: (0.0, 1.0)}, counter())
    assert down.extra_bounds == {a: (0.0, 0.0)}
    assert up.extra_bounds == {a: (1.0, 1.0)}
    assert down.parent == up.parent == 0 and down.depth == 1


def test_branch_most_fractional():
    down, _ = branch(Node(0), {a: 0.3, b: 0.5}, {a: (0.0, 1.0), b: (0.0, 1.0)}, counter())
    assert list(down.extra_bounds) == [b]


def test_branch_keeps_earlier_decisions():
    node = Node(3, extra_bounds={a: (0.0, 0.0)})
    down, up = branch(node, {a: 0.0, b: 2.5}, {a: (0.0, 1.0), b: (0.0, 4.0)}, counter())
    assert down.extra_bounds == {a: (0.0, 0.0), b: (0.0, 2.0)}
    assert up.extra_bounds == {a: (0.0, 0.0), b: (3.0, 4.0)}


def test_branch_integral():
    with pytest.raises(NoFractionalVariable):
        branch(Node(0), {a: 1.0, b: 0.0}, {a: (0.0, 1.0), b: (0.0, 1.0)}, counter())


def test_most_fractional_ignores_continuous():
    assert most_fractional({a: 0.5, b: 0.4}, {b: (0.0, 1.0)}) == b


def test_relative_gap():
    assert relative_gap(10.0, 8.0) == pytest.approx(0.2)
    assert relative_gap(None, 3.0) == math.inf
    assert relative_gap(0.5, 0.0) == 0.5


# solve_ground ----------------------------------------------------------------


def test_protein_ground(protein):
    rep = solve_ground(protein)
    assert rep.status is Status.OPTIMAL
    assert rep.objective == pytest.approx(-4.0)
    assert all(rep.assignment[Atom("interaction", (p, q))] == 1.0 for p in ("p1", "p2") for q in ("p1", "p2"))
    assert rep.gap == 0.0 and rep.bound == rep.objective
    feasible(protein, rep)


def test_forced_row():
    rep = solve_ground(corpus_model("forced.fomip"))
    assert rep.assignment == {Atom("x"): 1.0}


def test_contradiction():
    m = corpus_model("contradiction.fomip")
    for solve in (solve_ground, solve_bpc, solve_enum):
        rep = solve(m)
        assert rep.status is Status.INFEASIBLE and rep.objective is None and rep.bound == math.inf


# solve_bpc -------------------------------------------------------------------


@pytest.mark.parametrize("name", CORPUS)
@pytest.mark.parametrize("sep, pricer", COMBOS)
def test_corpus_bpc_matches_ground(name, sep, pricer):
    m = corpus_model(name)
    g = solve_ground(m, SolveOptions(separator=sep, pricer="off"))
    r = solve_bpc(m, SolveOptions(separator=sep, pricer=pricer))
    assert r.status is g.status
    if g.status is Status.OPTIMAL:
        assert r.objective == pytest.approx(g.objective, abs=1e-6)
        feasible(m, r)


@pytest.mark.parametrize("name", ENUMERABLE)
def test_corpus_enum_agrees(name):
    m = corpus_model(name)
    e, g = solve_enum(m), solve_ground(m)
    assert e.status is g.status
    if e.status is Status.OPTIMAL:
        assert e.objective == pytest.approx(g.objective, abs=1e-6)


def test_root_integral_one_node(protein):
    rep = solve_bpc(protein)
    assert rep.stats.nodes == 1 and rep.stats.branches == 0


def test_hubs_needs_branching():
    rep = solve_bpc(corpus_model("hubs.fomip"), SolveOptions(trace=True))
    assert rep.stats.branches > 0
    assert rep.objective == pytest.approx(4.5)


def test_sparse_instance_prices_few_atoms():
    m = corpus_model("sparse_cover.fomip")
    rep = solve_bpc(m)
    assert rep.stats.atoms_priced < len(ground(m).atoms)
    assert rep.objective == pytest.approx(20.0)


def test_bound_never_decreases():
    for name in ("hubs.fomip", "mixed.fomip", "sparse_cover.fomip"):
        rep = solve_bpc(corpus_model(name))
        hist = rep.bound_history
        assert all(x <= y + 1e-9 for x, y in zip(hist, hist[1:]))
        assert hist[-1] == pytest.approx(rep.objective)


def test_trace_records_nodes():
    rep = solve_bpc(corpus_model("hubs.fomip"), SolveOptions(trace=True))
    nodes = [e for e in rep.trace if e["event"] == "node"]
    assert len(nodes) == rep.stats.nodes
    assert {e["event"] for e in rep.trace} >= {"node", "lp", "cut"}


def test_lower_bound_atoms_created_up_front():
    m = parse_model("domain d = {a, b};\nvar x(d);\nobjective x(X) = 1;\nlb x(a) = 1;\n")
    rep = solve_bpc(m)
    assert rep.objective == 1.0 and rep.assignment[Atom("x", ("a",))] == 1.0


def test_empty_domain_model():
    m = parse_model("domain d = {};\nvar x(d);\nconstraint x(X) >= 1 :- d(X);\n")
    for solve in (solve_ground, solve_bpc, solve_enum):
        rep = solve(m)
        assert rep.status is Status.OPTIMAL and rep.objective == 0.0


def test_node_limit_reports_gap():
    with pytest.raises(IterationLimit) as exc:
        solve_bpc(corpus_model("hubs.fomip"), SolveOptions(max_nodes=1))
    rep = exc.value.report
    assert rep.status is Status.LIMIT
    assert rep.bound <= 4.5 + 1e-9
    assert rep.gap > 0


def test_ground_node_limit():
    with pytest.raises(IterationLimit) as exc:
        solve_ground(corpus_model("hubs.fomip"), SolveOptions(pricer="off", max_nodes=2))
    assert exc.value.report.stats.nodes == 2


def test_cut_round_limit():
    with pytest.raises(IterationLimit) as exc:
        solve_bpc(corpus_model("sparse_cover.fomip"), SolveOptions(max_cut_rounds=1, pricer="off"))
    rep = exc.value.report
    # with every atom present, the row-relaxed LP already bounds the optimum
    assert rep.status is Status.LIMIT and -math.inf < rep.bound <= 20.0
    assert rep.gap == math.inf


def test_cut_round_limit_before_pricing_has_no_bound():
    with pytest.raises(IterationLimit) as exc:
        solve_bpc(corpus_model("sparse_cover.fomip"), SolveOptions(max_cut_rounds=1))
    assert exc.value.report.bound == -math.inf


def test_unbounded_relaxation():
    m = parse_model("domain d = {a};\nvar x(d);\nobjective x(X) = -1;\nub x(X) = inf;\n")
    with pytest.raises(ModelError):
        solve_ground(m)


# solve_enum ------------------------------------------------------------------


def test_enum_protein(protein):
    assert solve_enum(protein).objective == pytest.approx(-4.0)


def test_enum_single_atom():
    rep = solve_enum(parse_model("var x;\nobjective x = 1;\n"))
    assert rep.objective == 0.0 and rep.assignment == {Atom("x"): 0.0}


def test_enum_rejects_continuous():
    with pytest.raises(ModelError):
        solve_enum(corpus_model("mixed.fomip"))


def test_enum_size_limit():
    with pytest.raises(EnumSizeExceeded):
        solve_enum(corpus_model("sparse_cover.fomip"))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(COMBOS))
def test_three_way_agreement(seed, combo):
    m = random_model(seed)
    sep, pricer = combo
    e = solve_enum(m)
    g = solve_ground(m, SolveOptions(separator=sep, pricer="off"))
    r = solve_bpc(m, SolveOptions(separator=sep, pricer=pricer))
    assert e.status is g.status is r.status
    if e.status is Status.OPTIMAL:
        assert g.objective == pytest.approx(e.objective, abs=1e-6)
        assert r.objective == pytest.approx(e.objective, abs=1e-6)
        feasible(m, r)
