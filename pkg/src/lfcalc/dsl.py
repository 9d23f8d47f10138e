"""The ``.alg`` text format, the expression grammar and the JSON report.

A document starts with a ``format=1`` header and is a sequence of
semicolon-terminated statements::

    format=1
    algebra n1;
    charge 3/2;
    generator L parity=even weight=2;
    generator G parity=odd weight=3/2;
    bracket [L, L] = d(L) + 2*lambda*L + 1/8*lambda^3;
    bracket [G, G] = 2*L + 1/2*lambda^2;
    relation 4*:G X: - d^2(G) = 0;

Expressions: generators, ``d(e)``/``d^n(e)``, right-nested normal products
``:a b c:``, ``lambda^j``, rationals and ``i``, ``sqrt2``, ``sqrt15``,
``sqrt30``.  ``#`` starts a comment.  A ``:`` closes the innermost product
unless a factor follows it, so left nesting is written ``:(:a b:) c:``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .coeff import I, ONE, Q, SQRT2, SQRT15, SQRT30, Scalar, ZERO
from .terms import RESERVED, Const, Deriv, FieldExpr, Gen, GeneratorSpec, LambdaPoly, Prod, Sum, normalize

FORMAT = 1
MAX_DEPTH = 200


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    end_col: int
    message: str

    def __str__(self):
        return f"{self.line}:{self.col}: {self.message}"


class DslError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass
class SourceDoc:
    text: str
    value: object = None
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self):
        return self.value is not None and not self.diagnostics


# -- lexer ---------------------------------------------------------------------
_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<str>"[^"\n]*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^:;=,\[\]()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    pos: int
    line: int
    col: int


def _tokenize(text: str):
    toks = []
    pos, line, lstart = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            ch = text[pos]
            raise DslError([Diagnostic(line, pos - lstart + 1, pos - lstart + 2, f"unexpected character {ch!r}")])
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            toks.append(Tok(kind, s, pos, line, pos - lstart + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            lstart = pos + s.rfind("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", n, line, n - lstart + 1))
    return toks


# -- values --------------------------------------------------------------------
class _Val:
    """Polynomial in lambda with raw-tree coefficients: {j: [(Scalar, tree|None)]}.

    A ``None`` tree marks a pure scalar term.
    """

    __slots__ = ("p",)

    def __init__(self, p):
        self.p = p

    @classmethod
    def scalar(cls, s):
        return cls({0: [(Scalar(s), None)]})

    @classmethod
    def tree(cls, t):
        return cls({0: [(ONE, t)]})

    def is_scalar(self):
        return set(self.p) <= {0} and all(t is None for _, t in self.p.get(0, []))

    def as_scalar(self):
        return sum((c for c, _ in self.p.get(0, [])), ZERO)

    def is_scalar_poly(self):
        return all(t is None for v in self.p.values() for _, t in v)

    def has_lambda(self):
        return any(j for j in self.p if j)

    def add(self, other, sign=1):
        out = {j: list(v) for j, v in self.p.items()}
        for j, v in other.p.items():
            out.setdefault(j, []).extend((c * sign, t) for c, t in v)
        return _Val(out)

    def scale(self, s):
        return _Val({j: [(c * s, t) for c, t in v] for j, v in self.p.items()})

    def shift(self, k):
        return _Val({j + k: v for j, v in self.p.items()})

    def field_tree(self):
        """Single tree for a lambda-free value."""
        terms = tuple((c, Const(1) if t is None else t) for c, t in self.p.get(0, []))
        return Sum(terms)


_SCALAR_ATOMS = {"i": I, "sqrt2": SQRT2, "sqrt15": SQRT15, "sqrt30": SQRT30}
_STMT = ("algebra", "charge", "default", "generator", "bracket", "relation", "bcbg_rank")


class _Parser:
    def __init__(self, text: str, generators=None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.gens = generators  # name -> GeneratorSpec, or None for no check
        self.depth = 0

    # token helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def err(self, msg, tok=None):
        t = tok or self.tok
        return DslError([Diagnostic(t.line, t.col, t.col + max(1, len(t.text)), msg)])

    def next(self):
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def accept(self, text):
        if self.tok.text == text and self.tok.kind in ("op", "ident"):
            return self.next()
        return None

    def expect(self, text, what=None):
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.err(f"expected {what or repr(text)}, found {found!r}")
        return t

    def ident(self, what="identifier"):
        t = self.tok
        if t.kind != "ident":
            raise self.err(f"expected {what}, found {t.text or 'end of input'!r}")
        return self.next()

    def integer(self, what="integer"):
        t = self.tok
        if t.kind != "int":
            raise self.err(f"expected {what}, found {t.text or 'end of input'!r}")
        self.next()
        return int(t.text)

    # expressions
    def expr(self) -> _Val:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.err("expression nested too deeply")
        try:
            if self.tok.text in ("+", "-") and self.tok.kind == "op":
                neg = self.next().text == "-"
                v = self.term()
                v = v.scale(-ONE) if neg else v
            else:
                v = self.term()
            while self.tok.kind == "op" and self.tok.text in ("+", "-"):
                sign = 1 if self.next().text == "+" else -1
                v = v.add(self.term(), sign)
            return v
        finally:
            self.depth -= 1

    def term(self) -> _Val:
        v = self.factor()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.next()
            rhs = self.factor()
            if op.text == "/":
                if not rhs.is_scalar():
                    raise self.err("can only divide by a number", op)
                s = rhs.as_scalar()
                if not s:
                    raise self.err("division by zero", op)
                v = v.scale(ONE / s)
            else:
                v = self._mul(v, rhs, op)
        return v

    def _mul(self, a: _Val, b: _Val, op):
        if b.is_scalar_poly():
            a, b = b, a
        if not a.is_scalar_poly():
            raise self.err("'*' between fields is not allowed; write the normal product :A B:", op)
        out = _Val({})
        for j, terms in a.p.items():
            for c, _ in terms:
                out = out.add(b.scale(c).shift(j))
        return out

    def factor(self) -> _Val:
        neg = False
        while self.tok.kind == "op" and self.tok.text == "-":
            self.next()
            neg = not neg
        v = self.atom()
        return v.scale(-ONE) if neg else v

    def atom(self) -> _Val:
        t = self.tok
        if t.kind == "int":
            self.next()
            return _Val.scalar(Q(int(t.text)))
        if t.kind == "op" and t.text == "(":
            self.next()
            v = self.expr()
            self.expect(")")
            return v
        if t.kind == "op" and t.text == ":":
            return self.normal_product()
        if t.kind == "ident":
            name = t.text
            if name in _SCALAR_ATOMS:
                self.next()
                return _Val.scalar(_SCALAR_ATOMS[name])
            if name == "lambda":
                self.next()
                k = 1
                if self.accept("^"):
                    k = self.integer("exponent")
                return _Val({k: [(ONE, None)]})
            if name == "d":
                self.next()
                k = 1
                if self.accept("^"):
                    k = self.integer("derivative order")
                open_ = self.expect("(")
                v = self.expr()
                self.expect(")")
                if v.has_lambda():
                    raise self.err("cannot differentiate an expression containing lambda", open_)
                if v.is_scalar():
                    return _Val({})
                return _Val.tree(Deriv(v.field_tree(), k)) if k else v
            if name in RESERVED or name in _STMT:
                raise self.err(f"unexpected keyword {name!r}")
            self.next()
            if self.gens is not None and name not in self.gens:
                raise self.err(f"unknown generator {name!r}", t)
            return _Val.tree(Gen(name))
        raise self.err(f"unexpected {t.text or 'end of input'!r}")

    def _item_start(self, t):
        return t.kind in ("int", "ident") or (t.kind == "op" and t.text == "(")

    def normal_product(self) -> _Val:
        open_ = self.expect(":")
        items = []
        while True:
            t = self.tok
            if t.kind == "eof":
                raise self.err("unterminated normal product", open_)
            if t.kind == "op" and t.text == ":":
                if items and not self._item_start(self.peek()):
                    self.next()
                    break
                items.append(self.normal_product())
                continue
            if not self._item_start(t):
                raise self.err(f"unexpected {t.text!r} in normal product")
            self.depth += 1
            if self.depth > MAX_DEPTH:
                raise self.err("expression nested too deeply")
            try:
                items.append(self.factor())
            finally:
                self.depth -= 1
        if len(items) < 2:
            raise self.err("a normal product needs at least two factors", open_)
        for v in items:
            if v.has_lambda():
                raise self.err("lambda cannot appear inside a normal product", open_)
        return _Val.tree(Prod(tuple(v.field_tree() for v in items)))


# -- documents -------------------------------------------------------------------
def _expect_header(p: _Parser):
    t = p.tok
    if not (t.kind == "ident" and t.text == "format"):
        raise p.err("missing 'format=1' header")
    p.next()
    p.expect("=")
    v = p.tok
    n = p.integer("format version")
    if n != FORMAT:
        raise p.err(f"unsupported format version {n}", v)
    p.accept(";")


def _rational(p: _Parser, v: _Val, tok, what):
    if not v.is_scalar():
        raise p.err(f"{what} must be a number", tok)
    s = v.as_scalar()
    if not s.is_rational():
        raise p.err(f"{what} must be rational", tok)
    return s.to_rational()


def _parity_of(v: _Val, gens):
    """Parities of the lambda-free terms, by factor count (constants are even)."""
    out = set()
    for terms in v.p.values():
        for _, t in terms:
            out.add(_tree_parity(t, gens))
    out.discard(None)
    return out


def _tree_parity(t, gens):
    if t is None or isinstance(t, Const):
        return 0
    if isinstance(t, Gen):
        return gens[t.name].parity
    if isinstance(t, Deriv):
        return _tree_parity(t.arg, gens)
    if isinstance(t, Prod):
        ps = [_tree_parity(x, gens) for x in t.items]
        return None if None in ps else sum(ps) % 2
    if isinstance(t, Sum):
        ps = {_tree_parity(x, gens) for c, x in t.terms if c}
        return ps.pop() if len(ps) == 1 else None
    return None


def _parse_algebra(text: str):
    from .algebras import AlgebraDef

    p = _Parser(text)
    _expect_header(p)
    name = "unnamed"
    charge = None
    implicit_zero = False
    rank = None
    gens = {}
    order = []
    table = {}
    relations = []
    p.gens = gens
    while p.tok.kind != "eof":
        kw = p.ident("statement keyword")
        k = kw.text
        if k == "algebra":
            if p.tok.kind == "str":
                name = p.next().text[1:-1]
            else:
                name = p.ident("algebra name").text
        elif k == "charge":
            t = p.tok
            charge = _rational(p, p.expr(), t, "central charge")
        elif k == "default":
            p.expect("zero", "'zero'")
            implicit_zero = True
        elif k == "bcbg_rank":
            rank = p.integer("rank")
        elif k == "generator":
            nt = p.ident("generator name")
            if nt.text in RESERVED or nt.text in _STMT:
                raise p.err(f"{nt.text!r} is reserved", nt)
            if nt.text in gens:
                raise p.err(f"duplicate generator {nt.text!r}", nt)
            parity, weight = None, None
            while p.tok.kind == "ident" and p.tok.text in ("parity", "weight"):
                attr = p.next().text
                p.expect("=")
                if attr == "parity":
                    pt = p.ident("'odd' or 'even'")
                    if pt.text not in ("odd", "even"):
                        raise p.err("parity must be 'odd' or 'even'", pt)
                    parity = 1 if pt.text == "odd" else 0
                else:
                    t = p.tok
                    weight = _rational(p, p.term(), t, "weight")
            if parity is None:
                raise p.err("generator needs parity=odd|even", nt)
            gens[nt.text] = GeneratorSpec(nt.text, parity, weight, len(order))
            order.append(nt.text)
        elif k == "bracket":
            lb = p.expect("[")
            ta = p.tok
            a = p.ident("generator name").text
            p.expect(",")
            tb = p.tok
            b = p.ident("generator name").text
            p.expect("]")
            for nm, t in ((a, ta), (b, tb)):
                if nm not in gens:
                    raise p.err(f"unknown generator {nm!r}", t)
            if (a, b) in table:
                raise p.err(f"duplicate bracket [{a}, {b}]", lb)
            p.expect("=")
            t = p.tok
            v = p.expr()
            want = (gens[a].parity + gens[b].parity) % 2
            got = _parity_of(v, gens)
            if got and got != {want}:
                raise p.err(f"parity mismatch in bracket [{a}, {b}]", t)
            for terms in v.p.values():
                for c, _ in terms:
                    if not c.is_rational():
                        raise p.err("bracket coefficients must be rational", t)
            table[(a, b)] = {j: Sum(tuple((c, Const(1) if tr is None else tr) for c, tr in terms))
                             for j, terms in v.p.items() if terms}
            if (b, a) in table and a != b:
                raise p.err(f"bracket [{a}, {b}] given in both orientations", lb)
        elif k == "relation":
            t = p.tok
            v = p.expr()
            p.expect("=")
            zt = p.tok
            z = p.expr()
            if not z.is_scalar() or z.as_scalar():
                raise p.err("a relation must have the form EXPR = 0", zt)
            if v.has_lambda():
                raise p.err("lambda cannot appear in a relation", t)
            if len(_parity_of(v, gens)) > 1:
                raise p.err("relation mixes parities", t)
            relations.append(v.field_tree())
        else:
            raise p.err(f"unknown statement {k!r}", kw)
        p.expect(";")
    if not order and table:
        raise p.err("no generators declared")
    try:
        return AlgebraDef(
            name,
            [gens[n] for n in order],
            table,
            relations,
            central_charge=charge,
            implicit_zero=implicit_zero,
            bcbg_rank=rank,
        )
    except (ValueError, KeyError) as exc:
        raise DslError([Diagnostic(1, 1, 1, str(exc))]) from None


def parse_algebra(text):
    """Parse an ``.alg`` document; raises :class:`DslError` with diagnostics."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            head = bytes(text[: exc.start])
            line = head.count(b"\n") + 1
            col = exc.start - (head.rfind(b"\n") + 1) + 1
            raise DslError([Diagnostic(line, col, col + exc.end - exc.start, "input is not valid UTF-8")]) from None
    try:
        return _parse_algebra(text)
    except RecursionError:
        raise DslError([Diagnostic(1, 1, 1, "input nested too deeply")]) from None


def parse_document(text) -> SourceDoc:
    """Never raises on bad input: returns the value or diagnostics."""
    raw = text if isinstance(text, str) else bytes(text).decode("utf-8", "replace")
    try:
        return SourceDoc(raw, parse_algebra(text), [])
    except DslError as exc:
        return SourceDoc(raw, None, exc.diagnostics)


def _parse_value(text: str, alg) -> _Val:
    gens = {g.name: g for g in alg.generators}
    try:
        p = _Parser(text, gens)
        v = p.expr()
        if p.tok.kind != "eof":
            raise p.err(f"unexpected {p.tok.text!r}")
        return v
    except RecursionError:
        raise DslError([Diagnostic(1, 1, 1, "input nested too deeply")]) from None


def parse_expr(text: str, alg) -> FieldExpr:
    """Parse a lambda-free expression over ``alg`` and normalize it."""
    v = _parse_value(text, alg)
    if v.has_lambda():
        raise DslError([Diagnostic(1, 1, len(text) + 1, "lambda is not allowed here")])
    return normalize(v.field_tree(), alg)


def parse_poly(text: str, alg) -> LambdaPoly:
    """Parse ``sum lambda^j * EXPR`` into a LambdaPoly."""
    v = _parse_value(text, alg)
    powers = {}
    for j, terms in v.p.items():
        tree = Sum(tuple((c, Const(1) if t is None else t) for c, t in terms))
        powers[j] = normalize(tree, alg)
    return LambdaPoly.from_lambda_powers(alg, powers)


# -- serializer --------------------------------------------------------------------
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def serialize(defn) -> str:
    name = defn.name if _IDENT.fullmatch(defn.name) else f'"{defn.name}"'
    lines = [f"format={FORMAT}", f"algebra {name};"]
    if defn.central_charge is not None:
        lines.append(f"charge {defn.central_charge};")
    if defn.implicit_zero:
        lines.append("default zero;")
    if defn.bcbg_rank:
        lines.append(f"bcbg_rank {defn.bcbg_rank};")
    for g in defn.generators:
        par = "odd" if g.parity else "even"
        w = "" if g.weight is None else f" weight={_qtext(g.weight)}"
        lines.append(f"generator {g.name} parity={par}{w};")
    for (a, b), P in defn.table.items():
        lines.append(f"bracket [{a}, {b}] = {P};")
    for r in defn.relations:
        lines.append(f"relation {r} = 0;")
    return "\n".join(lines) + "\n"


def _qtext(q):
    q = Q(q)
    return f"{q.numerator}" if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def serialize_expr(e: FieldExpr) -> str:
    return str(e)


# -- reports -----------------------------------------------------------------------
def _check_dict(c):
    d = c.as_dict() if hasattr(c, "as_dict") else dict(c)
    return {k: str(d.get(k, "")) for k in ("name", "status", "lhs", "rhs", "difference")}


def emit_report(results, suite: str = "", timestamp: str = "") -> str:
    """JSON report with a fixed key order; identical inputs give identical bytes.

    ``results`` is a Report or an iterable of checks.
    """
    if hasattr(results, "checks"):
        suite = suite or results.suite
        results = results.checks
    doc = {
        "format": FORMAT,
        "suite": suite,
        "timestamp": timestamp,
        "checks": [_check_dict(c) for c in results],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


REPORT_KEYS = ("format", "suite", "timestamp", "checks")
CHECK_KEYS = ("name", "status", "lhs", "rhs", "difference")


def validate_report(text: str) -> list:
    """Return a list of schema problems (empty when valid)."""
    problems = []
    try:
        doc = json.loads(text)
    except ValueError as exc:
        return [f"not JSON: {exc}"]
    if not isinstance(doc, dict) or tuple(doc) != REPORT_KEYS:
        return [f"top-level keys must be {REPORT_KEYS}"]
    if doc["format"] != FORMAT:
        problems.append("bad format version")
    if not isinstance(doc["checks"], list):
        return problems + ["checks must be a list"]
    for n, c in enumerate(doc["checks"]):
        if not isinstance(c, dict) or tuple(c) != CHECK_KEYS:
            problems.append(f"check {n}: keys must be {CHECK_KEYS}")
        elif c["status"] not in ("pass", "fail"):
            problems.append(f"check {n}: bad status {c['status']!r}")
    return problems


# -- realization files -----------------------------------------------------------
def parse_realization(text, resolve):
    """Parse ``host NAME; image GEN = EXPR; ...``.

    ``resolve`` maps the host string to an AlgebraDef.  Returns
    ``(host, {generator: FieldExpr})``.
    """
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", "replace")
    p = _Parser(text)
    _expect_header(p)
    host = None
    images = {}
    while p.tok.kind != "eof":
        kw = p.ident("statement keyword")
        if kw.text == "host":
            t = p.tok
            if t.kind == "str":
                spec = p.next().text[1:-1]
            else:
                spec = p.ident("host algebra").text
                if p.accept(":"):
                    spec += ":" + p.ident("host algebra").text
            try:
                host = resolve(spec)
            except (ValueError, KeyError, OSError) as exc:
                raise p.err(str(exc), t) from None
            p.gens = {g.name: g for g in host.generators}
        elif kw.text == "image":
            if host is None:
                raise p.err("'host' must come before any image", kw)
            nt = p.ident("generator name")
            p.expect("=")
            t = p.tok
            v = p.expr()
            if v.has_lambda():
                raise p.err("lambda is not allowed in an image", t)
            images[nt.text] = normalize(v.field_tree(), host)
        else:
            raise p.err(f"unknown statement {kw.text!r}", kw)
        p.expect(";")
    if host is None:
        raise p.err("no host declared")
    return host, images
