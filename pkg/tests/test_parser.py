import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fomip import Model, ParseError, SourceModel, format_model, parse_model, validate_model
from fomip.model import AtomPattern, DomainLit, Rule, Span, Var
from fomip.parser import ERROR, WARNING, check_source

from conftest import CORPUS, MODELS, corpus_model
from oracles import random_model_text


def errors(text):
    model, diags = check_source(SourceModel(text))
    return model, [d for d in diags if d.severity == ERROR]


def test_protein_shape(protein):
    assert protein.domains == {"protein": ("p1", "p2"), "location_id": ("l1", "l2")}
    assert len(protein.variable_rules) == 2
    assert len(protein.constraint_rules) == 1
    assert protein.signatures == {"location": ("protein", "location_id"), "interaction": ("protein", "protein")}


def test_empty_source():
    m = parse_model("")
    assert m.domains == {} and m.variable_rules == () and m.constraint_rules == ()


def test_comments_only():
    assert parse_model("% nothing\n# here either\n").domains == {}


def test_unsafe_rule_reports_both_variables():
    model, errs = errors("domain d = {a};\nvar x(P1, P2) :- not P1 = P2;\n")
    assert model is None
    assert len(errs) == 1 and "unsafe rule" in errs[0].message
    assert "P1" in errs[0].message and "P2" in errs[0].message
    assert (errs[0].span.line, errs[0].span.col) == (2, 1)


def test_syntax_error_has_position():
    model, errs = errors("domain d = {a};\nvar x(d)\nconstraint x(a) <= 1;\n")
    assert model is None
    assert errs[0].span.line == 3


def test_protein_validates_clean(protein):
    assert validate_model(protein) == []


def test_no_finite_bound():
    _, errs = errors("domain d = {a};\nvar x(d);\nconstraint -inf <= x(X) <= inf :- d(X);\n")
    assert [e.message for e in errs] == ["constraint has no finite bound"]


def test_unknown_domain_programmatic():
    X = Var("X")
    m = Model(
        domains={"protein": ("p1",)},
        signatures={"expr": ("gene",)},
        variable_rules=(Rule(AtomPattern("expr", (X,)), (DomainLit("gene", X),), Span(4, 1, 1)),),
    )
    msgs = [d.message for d in validate_model(m) if d.severity == ERROR]
    assert any("unknown domain" in s and "gene" in s for s in msgs)


def test_unknown_domain_in_source():
    _, errs = errors("domain protein = {p1};\nvar expr(G) :- gene(G);\n")
    assert any("unknown domain 'gene'" in e.message for e in errs)


def test_undeclared_family_in_constraint():
    _, errs = errors("domain d = {a};\nvar x(d);\nconstraint y(X) <= 1 :- d(X);\n")
    assert any("undeclared variable family 'y'" in e.message for e in errs)


def test_arity_mismatch():
    _, errs = errors("domain d = {a};\nvar x(d);\nconstraint x(X, X) <= 1 :- d(X);\n")
    assert any("arity mismatch" in e.message for e in errs)


def test_constant_outside_domain_is_a_warning():
    model, diags = check_source(SourceModel("domain d = {a};\nvar x(d);\nconstraint x(b) <= 1;\n"))
    assert model is not None
    assert [d.severity for d in diags] == [WARNING]


def test_keyword_is_not_an_identifier():
    _, errs = errors("domain var = {a};\n")
    assert errs


def test_constraint_forms():
    m = parse_model(
        "domain d = {a};\nvar x(d);\n"
        "constraint x(a) >= 1;\nconstraint x(a) = 1;\nconstraint x(a) <= 2;\n"
        "constraint 0 <= 2*x(a) - x(a) <= 3;\n"
    )
    heads = [r.head for r in m.constraint_rules]
    assert [(h.lb, h.ub) for h in heads] == [(1, math.inf), (1, 1), (-math.inf, 2), (0, 3)]
    assert heads[3].terms == ((2.0, AtomPattern("x", ("a",))), (-1.0, AtomPattern("x", ("a",))))


def test_parse_error_message_has_path():
    with pytest.raises(ParseError) as exc:
        parse_model("var x(", "bad.fomip")
    assert str(exc.value).startswith("bad.fomip:1:")


def test_invalid_utf8():
    model, diags = check_source(SourceModel(b"domain d = {\xff};"))
    assert model is None and diags[0].severity == ERROR


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_round_trip(name):
    m = corpus_model(name)
    assert parse_model(format_model(m)) == m


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_random_round_trip(seed):
    m = parse_model(random_model_text(seed))
    text = format_model(m)
    again = parse_model(text)
    assert again == m
    assert format_model(again) == text


def test_bytes_never_crash():
    rng = random.Random(11)
    base = (MODELS / "mixed.fomip").read_bytes()
    for _ in range(500):
        data = bytearray(base)
        for _ in range(3):
            pos = rng.randrange(len(data))
            data[pos] = rng.randrange(256)
        model, diags = check_source(SourceModel(bytes(data)))
        assert model is not None or any(d.severity == ERROR for d in diags)
