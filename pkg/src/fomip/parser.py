"""Reader, validator and pretty-printer for ``.fomip`` model files.

A small example::

    domain protein = {p1, p2};
    domain location_id = {l1, l2};
    var location(protein, location_id);
    var interaction(protein, protein);
    objective interaction(P1, P2) = -1.0;
    constraint 1.0 <= 1.0*location(P1, L1) + 1.0*interaction(P1, P2) <= inf
        :- protein(P1), protein(P2), P1 != P2, location_id(L1);
    default { objective = 0.0; lb = 0.0; ub = 1.0; vartype = int; }

``var f(d1, ..., dn);`` declares the family ``f`` over the product of the
named domains. ``var f(X, ...) :- body;`` declares only the atoms derived
by the body; the family's signature is inferred from the body literals
that bind each head variable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

from .model import (
    ATTRIBUTES,
    INF,
    AtomPattern,
    Compare,
    ConsTemplate,
    DomainLit,
    FomipError,
    Model,
    Rule,
    Span,
    ValueRule,
    Var,
    VarInfo,
    VarType,
)

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    span: Span
    message: str

    def format(self, path: str = "<string>") -> str:
        return f"{path}:{self.span.line}:{self.span.col}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class SourceModel:
    text: Union[str, bytes]
    path: str = "<string>"


class ParseError(FomipError):
    """Raised with every diagnostic collected for a source that failed to load."""

    def __init__(self, diagnostics, path="<string>"):
        self.diagnostics = list(diagnostics)
        self.path = path
        super().__init__("\n".join(d.format(path) for d in self.diagnostics))


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+|\n)
  | (?P<comment>%[^\n]*|\#[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<op>:-|<=|>=|!=|[{}();,=<>*+\-])
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

KEYWORDS = {"domain", "var", "constraint", "objective", "lb", "ub", "vartype", "default", "not", "inf"}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.col, max(1, len(self.text)))


class _Syntax(Exception):
    def __init__(self, token: Token, message: str):
        self.token = token
        self.message = message


def tokenize(text: str):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            tok = Token("bad", text[pos], line, col)
            raise _Syntax(tok, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind == "ws" and m.group() == "\n":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def next(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text) -> Token:
        if not self.at(text):
            raise _Syntax(self.tok, f"expected {text!r}, found {self.tok.text or 'end of file'!r}")
        return self.next()

    def ident(self, what="identifier", keyword_ok=False) -> Token:
        if self.tok.kind != "ident":
            raise _Syntax(self.tok, f"expected {what}, found {self.tok.text or 'end of file'!r}")
        if not keyword_ok and self.tok.text in KEYWORDS:
            raise _Syntax(self.tok, f"keyword {self.tok.text!r} cannot be used as {what}")
        return self.next()

    # numbers and bounds

    def number(self) -> float:
        sign = 1.0
        while self.at("-") or self.at("+"):
            if self.next().text == "-":
                sign = -sign
        if self.at("inf"):
            self.next()
            return sign * INF
        if self.tok.kind != "number":
            raise _Syntax(self.tok, f"expected a number, found {self.tok.text or 'end of file'!r}")
        return sign * float(self.next().text)

    def _number_ahead(self) -> int:
        """Length of a signed number starting here, or 0."""
        k = 0
        while self.peek(k).text in ("-", "+") and self.peek(k).kind == "op":
            k += 1
        t = self.peek(k)
        if t.kind == "number" or (t.kind == "ident" and t.text == "inf"):
            return k + 1
        return 0

    # terms and literals

    def term(self):
        t = self.tok
        if t.kind == "var":
            self.next()
            return Var(t.text)
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.next()
            return t.text
        raise _Syntax(t, f"expected a variable or constant, found {t.text or 'end of file'!r}")

    def atom_pattern(self) -> AtomPattern:
        name = self.ident("functor")
        args = []
        if self.at("("):
            self.next()
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.next()
                    args.append(self.term())
            self.expect(")")
        return AtomPattern(name.text, tuple(args))

    def literal(self):
        negated = False
        if self.at("not"):
            self.next()
            negated = True
        t = self.tok
        if t.kind == "ident" and t.text not in KEYWORDS and self.peek().text == "(":
            self.next()
            self.expect("(")
            arg = self.term()
            if self.at(","):
                raise _Syntax(self.tok, f"domain literal {t.text} takes exactly one argument")
            self.expect(")")
            return DomainLit(t.text, arg, negated)
        left = self.term()
        op = self.tok
        if op.text not in ("=", "!=", "<", "<=") or op.kind != "op":
            raise _Syntax(op, f"expected a comparison operator, found {op.text or 'end of file'!r}")
        self.next()
        right = self.term()
        return Compare(op.text, left, right, negated)

    def body(self):
        if not self.at(":-"):
            return ()
        self.next()
        lits = [self.literal()]
        while self.at(","):
            self.next()
            lits.append(self.literal())
        return tuple(lits)

    def linexpr(self):
        terms = []
        first = True
        while True:
            sign = 1.0
            if self.at("+") or self.at("-"):
                sign = -1.0 if self.next().text == "-" else 1.0
            elif not first:
                break
            coef = 1.0
            if self.tok.kind == "number":
                coef = float(self.next().text)
                self.expect("*")
            terms.append((sign * coef, self.atom_pattern()))
            first = False
        return tuple(terms)

    # statements

    def statement(self, out):
        start = self.tok
        kw = start.text if start.kind == "ident" else None
        if kw == "domain":
            self.next()
            name = self.ident("domain name")
            self.expect("=")
            self.expect("{")
            consts = []
            if not self.at("}"):
                consts.append(self.ident("constant"))
                while self.at(","):
                    self.next()
                    consts.append(self.ident("constant"))
            self.expect("}")
            self.expect(";")
            out.append(("domain", name, consts, start))
        elif kw == "var":
            self.next()
            pat = self.atom_pattern()
            body = self.body()
            self.expect(";")
            out.append(("var", pat, body, start))
        elif kw == "constraint":
            self.next()
            head = self.constraint_head()
            body = self.body()
            self.expect(";")
            out.append(("constraint", head, body, start))
        elif kw in ATTRIBUTES:
            self.next()
            pat = self.atom_pattern()
            self.expect("=")
            if kw == "vartype":
                value = self.vartype()
            else:
                value = self.number()
            body = self.body()
            self.expect(";")
            out.append(("value", (kw, pat, value), body, start))
        elif kw == "default":
            self.next()
            self.expect("{")
            entries = []
            while not self.at("}"):
                key = self.ident("attribute", keyword_ok=True)
                if key.text not in ATTRIBUTES:
                    raise _Syntax(key, f"unknown default attribute {key.text!r}")
                self.expect("=")
                entries.append((key, self.vartype() if key.text == "vartype" else self.number()))
                self.expect(";")
            self.expect("}")
            if self.at(";"):
                self.next()
            out.append(("default", entries, (), start))
        else:
            raise _Syntax(start, f"expected a statement, found {start.text or 'end of file'!r}")

    def vartype(self) -> VarType:
        t = self.ident("vartype", keyword_ok=True)
        if t.text in ("int", "integer"):
            return VarType.INTEGER
        if t.text in ("cont", "continuous", "real"):
            return VarType.CONTINUOUS
        raise _Syntax(t, f"unknown vartype {t.text!r}")

    def constraint_head(self) -> ConsTemplate:
        lb, ub = -INF, INF
        n = self._number_ahead()
        if n and self.peek(n).text == "<=":
            lb = self.number()
            self.expect("<=")
            terms = self.linexpr()
            if self.at("<="):
                self.next()
                ub = self.number()
        else:
            terms = self.linexpr()
            op = self.tok
            if op.text not in ("<=", ">=", "="):
                raise _Syntax(op, f"expected '<=', '>=' or '=', found {op.text or 'end of file'!r}")
            self.next()
            value = self.number()
            if op.text == "<=":
                ub = value
            elif op.text == ">=":
                lb = value
            else:
                lb = ub = value
        return ConsTemplate(lb, terms, ub)


def _read(text):
    """Tokenize and parse into raw statements; raises _Syntax."""
    p = _Parser(tokenize(text))
    out = []
    while p.tok.kind != "eof":
        p.statement(out)
    return out


def _build(statements):
    """Turn raw statements into a Model plus diagnostics."""
    diags: list[Diagnostic] = []
    domains: dict[str, tuple] = {}
    declared_sigs: dict[str, tuple] = {}
    var_rules, cons_rules, value_rules = [], [], []
    defaults = {}
    for kind, a, b, start in statements:
        span = start.span
        if kind == "domain":
            name, consts = a, b
            if name.text in domains:
                diags.append(Diagnostic(ERROR, name.span, f"duplicate domain declaration {name.text!r}"))
                continue
            seen = []
            for c in consts:
                if c.text in seen:
                    diags.append(Diagnostic(WARNING, c.span, f"constant {c.text!r} repeated in domain {name.text!r}"))
                else:
                    seen.append(c.text)
            domains[name.text] = tuple(seen)
        elif kind == "var":
            pat, body = a, b
            if not body and pat.args and all(isinstance(x, str) for x in pat.args):
                # signature shorthand: every argument names a domain
                sig = tuple(pat.args)
                if pat.functor in declared_sigs and declared_sigs[pat.functor] != sig:
                    diags.append(Diagnostic(ERROR, span, f"conflicting declarations of {pat.functor}"))
                declared_sigs[pat.functor] = sig
                vs = tuple(Var(f"A{k + 1}") for k in range(len(sig)))
                body = tuple(DomainLit(d, v) for d, v in zip(sig, vs))
                pat = AtomPattern(pat.functor, vs)
            var_rules.append(Rule(pat, body, span))
        elif kind == "constraint":
            cons_rules.append(Rule(a, b, span))
        elif kind == "value":
            attr, pat, value = a
            value_rules.append(ValueRule(attr, pat, value, b, span))
        elif kind == "default":
            for key, value in a:
                defaults[key.text] = value
    info = VarInfo(**defaults)
    signatures, sig_diags = infer_signatures(domains, var_rules, declared_sigs)
    diags.extend(sig_diags)
    model = Model(domains, signatures, tuple(var_rules), tuple(cons_rules), tuple(value_rules), info)
    return model, diags


def infer_signatures(domains, var_rules, declared=None):
    sigs = dict(declared or {})
    diags = []
    for rule in var_rules:
        pat = rule.head
        var_doms = {}
        for lit in rule.body:
            if isinstance(lit, DomainLit) and not lit.negated and isinstance(lit.arg, Var):
                var_doms.setdefault(lit.arg, lit.domain)
        sig = []
        for arg in pat.args:
            if isinstance(arg, Var):
                sig.append(var_doms.get(arg))
            else:
                sig.append(next((d for d, cs in domains.items() if arg in cs), None))
        if any(d is None for d in sig):
            continue  # reported as unsafe or unknown constant by validate_model
        sig = tuple(sig)
        have = sigs.get(pat.functor)
        if have is None:
            sigs[pat.functor] = sig
        elif len(have) != len(sig):
            diags.append(Diagnostic(ERROR, _span(rule), f"arity mismatch for {pat.functor}: {len(have)} vs {len(sig)}"))
        elif have != sig:
            diags.append(Diagnostic(WARNING, _span(rule), f"{pat.functor} arguments range over {sig}, declared {have}"))
    return sigs, diags


def _span(rule) -> Span:
    return rule.span or Span(1, 1, 1)


def _check_body(body, domains, span, diags, head_bound=()):
    pos = set(head_bound)
    for lit in body:
        if isinstance(lit, DomainLit):
            if lit.domain not in domains:
                diags.append(Diagnostic(ERROR, span, f"unknown domain {lit.domain!r}"))
            elif not isinstance(lit.arg, Var) and lit.arg not in domains[lit.domain]:
                diags.append(Diagnostic(WARNING, span, f"constant {lit.arg!r} is not in domain {lit.domain!r}"))
            if not lit.negated and isinstance(lit.arg, Var):
                pos.add(lit.arg)
    return pos


def _check_pattern(pat, model, span, diags, what):
    sig = model.signatures.get(pat.functor)
    if sig is None:
        diags.append(Diagnostic(ERROR, span, f"{what} uses undeclared variable family {pat.functor!r}"))
    elif len(sig) != len(pat.args):
        diags.append(Diagnostic(ERROR, span, f"arity mismatch: {pat.functor} takes {len(sig)} arguments, got {len(pat.args)}"))
    else:
        for arg, dom in zip(pat.args, sig):
            if isinstance(arg, str) and dom in model.domains and arg not in model.domains[dom]:
                diags.append(Diagnostic(WARNING, span, f"constant {arg!r} is not in domain {dom!r}"))


def _check_compares(body, model, var_doms, span, diags):
    from .grounder import comparison_domain

    for lit in body:
        if not isinstance(lit, Compare) or lit.op in ("=", "!="):
            continue
        dom = comparison_domain(lit, model, var_doms)
        sides = [s for s in (lit.left, lit.right)]
        if dom is None or dom not in model.domains:
            diags.append(Diagnostic(ERROR, span, f"cannot order {lit.left} {lit.op} {lit.right}: no common domain"))
            continue
        for s in sides:
            if isinstance(s, Var) and var_doms.get(s) not in (None, dom):
                diags.append(Diagnostic(ERROR, span, f"{s} ranges over {var_doms[s]}, compared within {dom}"))
            elif isinstance(s, str) and s not in model.domains[dom]:
                diags.append(Diagnostic(ERROR, span, f"constant {s!r} is not in domain {dom!r}"))


def validate_model(m: Model) -> list[Diagnostic]:
    """Structural checks; an empty list means the model is usable."""
    diags: list[Diagnostic] = []
    for rule in m.variable_rules:
        span = _span(rule)
        _check_body(rule.body, m.domains, span, diags)
        before = len(diags)
        _safety(rule, span, diags)
        # an unsafe rule declares no family; don't report its head twice
        if len(diags) == before or rule.head.functor in m.signatures:
            _check_pattern(rule.head, m, span, diags, "variable rule")
        _check_compares(rule.body, m, _var_doms(rule.body), span, diags)
    for name, sig in m.signatures.items():
        for d in sig:
            if d not in m.domains:
                diags.append(Diagnostic(ERROR, Span(1, 1, 1), f"unknown domain {d!r} in signature of {name}"))
    for rule in m.constraint_rules:
        span = _span(rule)
        _check_body(rule.body, m.domains, span, diags)
        _safety(rule, span, diags)
        head = rule.head
        if head.lb == -INF and head.ub == INF:
            diags.append(Diagnostic(ERROR, span, "constraint has no finite bound"))
        elif head.lb == INF or head.ub == -INF or head.lb > head.ub:
            diags.append(Diagnostic(ERROR, span, f"constraint bounds [{head.lb}, {head.ub}] are empty"))
        for coef, pat in head.terms:
            if not math.isfinite(coef):
                diags.append(Diagnostic(ERROR, span, f"coefficient {coef} is not finite"))
            _check_pattern(pat, m, span, diags, "constraint")
        _check_compares(rule.body, m, _var_doms(rule.body), span, diags)
    for vr in m.value_rules:
        span = _span(vr)
        from .grounder import signature_hints

        hints = signature_hints(m, vr.pattern)
        _check_body(vr.body, m.domains, span, diags)
        _safety(vr.rule, span, diags, pre_bound=vr.pattern.variables())
        _check_pattern(vr.pattern, m, span, diags, f"{vr.attr} rule")
        _check_compares(vr.body, m, _var_doms(vr.body, hints), span, diags)
        if vr.attr != "vartype" and isinstance(vr.value, float) and math.isnan(vr.value):
            diags.append(Diagnostic(ERROR, span, f"{vr.attr} value is NaN"))
        if vr.attr == "objective" and not math.isfinite(vr.value):
            diags.append(Diagnostic(ERROR, span, "objective coefficient must be finite"))
    d = m.defaults
    if d is None:
        diags.append(Diagnostic(ERROR, Span(1, 1, 1), "missing defaults"))
    else:
        if not math.isfinite(d.objective):
            diags.append(Diagnostic(ERROR, Span(1, 1, 1), "default objective must be finite"))
        if d.lb > d.ub or d.lb == INF or d.ub == -INF:
            diags.append(Diagnostic(ERROR, Span(1, 1, 1), f"default bounds [{d.lb}, {d.ub}] are empty"))
        elif (d.vartype is VarType.INTEGER and math.isfinite(d.lb) and math.isfinite(d.ub)
              and math.floor(d.ub) < math.ceil(d.lb)):
            diags.append(Diagnostic(ERROR, Span(1, 1, 1), "default integer bounds contain no integer"))
    return diags


def _var_doms(body, hints=None):
    from .grounder import variable_domains

    return variable_domains(body, hints)


def _safety(rule: Rule, span, diags, pre_bound=()):
    unsafe = [v for v in rule.unsafe_variables() if v not in set(pre_bound)]
    if unsafe:
        names = ", ".join(v.name for v in unsafe)
        diags.append(Diagnostic(ERROR, span, f"unsafe rule: {names} not bound by a positive domain literal"))


def check_source(src: SourceModel) -> tuple[Optional[Model], list[Diagnostic]]:
    """Parse and validate; never raises for bad input."""
    text = src.text
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = text[: exc.start].count(b"\n") + 1
            return None, [Diagnostic(ERROR, Span(line, 1, 1), "source is not valid UTF-8")]
    try:
        statements = _read(text)
    except _Syntax as exc:
        return None, [Diagnostic(ERROR, exc.token.span, exc.message)]
    except (ValueError, OverflowError) as exc:
        return None, [Diagnostic(ERROR, Span(1, 1, 1), f"invalid literal: {exc}")]
    try:
        model, diags = _build(statements)
    except FomipError as exc:
        return None, [Diagnostic(ERROR, Span(1, 1, 1), str(exc))]
    diags.extend(validate_model(model))
    if any(d.severity == ERROR for d in diags):
        return None, diags
    return model, diags


def parse_model(src, path: str = "<string>") -> Model:
    """Parse ``src`` (text, bytes or a SourceModel); raises ParseError on any error."""
    if not isinstance(src, SourceModel):
        src = SourceModel(src, path)
    model, diags = check_source(src)
    if model is None:
        raise ParseError(diags, src.path)
    return model


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        return parse_model(SourceModel(fh.read(), str(path)))


# --- printing ---------------------------------------------------------------


def _num(x: float) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return repr(float(x))


def _expr(terms) -> str:
    parts = []
    for k, (c, p) in enumerate(terms):
        sign = "-" if math.copysign(1.0, c) < 0 else "+"
        if k == 0:
            parts.append(f"{'-' if sign == '-' else ''}{_num(abs(c))}*{p}")
        else:
            parts.append(f"{sign} {_num(abs(c))}*{p}")
    return " ".join(parts)


def _lit(lit) -> str:
    neg = "not " if lit.negated else ""
    if isinstance(lit, DomainLit):
        return f"{neg}{lit.domain}({lit.arg})"
    return f"{neg}{lit.left} {lit.op} {lit.right}"


def _body(body) -> str:
    return "" if not body else " :- " + ", ".join(_lit(x) for x in body)


def format_model(m: Model) -> str:
    lines = []
    for name, consts in m.domains.items():
        lines.append(f"domain {name} = {{{', '.join(consts)}}};")
    for rule in m.variable_rules:
        lines.append(f"var {rule.head}{_body(rule.body)};")
    for rule in m.constraint_rules:
        h = rule.head
        expr = _expr(h.terms)
        lines.append(f"constraint {_num(h.lb)} <= {expr} <= {_num(h.ub)}{_body(rule.body)};")
    for vr in m.value_rules:
        value = vr.value.value if isinstance(vr.value, VarType) else _num(vr.value)
        lines.append(f"{vr.attr} {vr.pattern} = {value}{_body(vr.body)};")
    d = m.defaults
    lines.append(
        f"default {{ objective = {_num(d.objective)}; lb = {_num(d.lb)}; "
        f"ub = {_num(d.ub)}; vartype = {d.vartype.value}; }}"
    )
    return "\n".join(lines) + "\n"
