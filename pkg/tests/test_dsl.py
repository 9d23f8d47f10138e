import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exprgen import exprs
from lfcalc import dsl
from lfcalc.algebras import BUILTIN_NAMES, Check, Report, bcbg, builtin, n1, sv_g2
from lfcalc.coeff import Q
from lfcalc.terms import FieldExpr

DATA = Path(dsl.__file__).with_name("data")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_round_trip_builtins(name):
    a = builtin(name)
    text = dsl.serialize(a)
    b = dsl.parse_algebra(text)
    assert b == a
    assert dsl.serialize(b) == text


def test_shipped_files_equal_builtins():
    assert dsl.parse_algebra((DATA / "sv_g2.alg").read_bytes()) == sv_g2()
    assert dsl.parse_algebra((DATA / "n1.alg").read_text()) == n1(Q(3, 2))


def test_n1_bracket_line():
    text = (
        "format=1\ncharge 3/2;\n"
        "generator L parity=even weight=2;\ngenerator G parity=odd weight=3/2;\n"
        "bracket [L, L] = d(L) + 2*lambda*L + 3/2/12*lambda^3;\n"
        "bracket [L, G] = d(G) + 3/2*lambda*G;\n"
        "bracket [G,G] = 2*L + (1/2)*lambda^2;\n"
    )
    D = dsl.parse_algebra(text)
    ref = n1(Q(3, 2))
    for pair in [("L", "L"), ("L", "G"), ("G", "G")]:
        assert str(D.lookup(*pair)) == str(ref.lookup(*pair))


def diag(text):
    doc = dsl.parse_document(text)
    assert not doc.ok
    return doc.diagnostics


def test_unknown_generator_diagnostic():
    (d,) = diag("format=1\nbracket [x, y] = 1;\n")
    assert "unknown generator" in d.message and (d.line, d.col) == (2, 10)


@pytest.mark.parametrize(
    "text, fragment, line",
    [
        ("generator a parity=odd;", "format=1", 1),
        ("format=1\ngenerator a parity=odd;\ngenerator b parity=even;\nbracket [a, b] = 1;\n", "parity mismatch", 4),
        ("format=1\ngenerator a parity=even;\nbracket [a, a] = 2*a +;\n", "unexpected", 3),
        ("format=1\ngenerator a parity=even;\nbracket [a, a] = sqrt2*a;\n", "rational", 3),
        ("format=1\ngenerator a parity=even;\ngenerator a parity=even;\n", "duplicate generator", 3),
        ("format=1\ngenerator a parity=even;\nrelation a = 1;\n", "= 0", 3),
        ("format=1\ngenerator a parity=even;\nbracket [a, a] = 1;\nbracket [a, a] = 2;\n", "duplicate", 4),
        ("format=2\n", "format", 1),
        ("format=1\ngenerator a parity=maybe;\n", "parity", 2),
        ("format=1\ngenerator a parity=even;\nbracket [a, a] = (((a;\n", "", 3),
        (b"format=1\nab\xff", "UTF-8", 2),
    ],
)
def test_diagnostics_have_spans(text, fragment, line):
    ds = diag(text)
    assert ds[0].line == line
    assert fragment in ds[0].message
    assert ds[0].end_col > ds[0].col >= 1


def test_parse_algebra_raises_with_diagnostics():
    with pytest.raises(dsl.DslError) as err:
        dsl.parse_algebra("format=1\nbracket [x, y] = 1;\n")
    assert err.value.diagnostics and "unknown generator" in str(err.value)


def test_deep_nesting_is_a_diagnostic():
    deep = "format=1\ngenerator a parity=even;\nbracket [a, a] = " + "(" * 5000 + "a" + ")" * 5000 + ";\n"
    assert diag(deep)
    minus = "format=1\ngenerator a parity=even;\nbracket [a, a] = " + "-" * 5000 + "a;\n"
    assert dsl.parse_document(minus).ok


def test_normal_products_are_right_nested():
    A = bcbg(1)
    assert dsl.parse_expr(":b1 c1 beta1:", A) == dsl.parse_expr(":b1 :c1 beta1::", A)
    # left nesting needs parentheses; it differs by the quasi-associativity correction
    left = dsl.parse_expr(":(:beta1 gamma1:) gamma1:", A)
    assert left - dsl.parse_expr(":beta1 gamma1 gamma1:", A) == dsl.parse_expr("d(gamma1)", A)


def test_lambda_rejected_in_plain_expressions():
    with pytest.raises(dsl.DslError):
        dsl.parse_expr("lambda*b1", bcbg(1))


@settings(max_examples=60, deadline=None)
@given(exprs(bcbg(2)))
def test_expression_round_trip(e):
    assert dsl.parse_expr(dsl.serialize_expr(e), e.alg) == e


@settings(max_examples=500, deadline=None)
@given(st.binary(max_size=200))
def test_parser_never_crashes_on_bytes(data):
    doc = dsl.parse_document(data)
    assert doc.ok or doc.diagnostics


@settings(max_examples=500, deadline=None)
@given(st.text(alphabet="format=1\n ;:[],()+-*/^#\"abLGXdlambdsqrt0123456789", max_size=120))
def test_parser_never_crashes_on_text(text):
    doc = dsl.parse_document("format=1\n" + text)
    assert doc.ok or doc.diagnostics


# -- reports ---------------------------------------------------------------------------
def _report():
    r = Report("demo")
    r.checks.append(Check("a", "pass", "1", "1", ""))
    r.checks.append(Check("b", "fail", "x", "y", "x - y"))
    return r


def test_report_schema_and_determinism():
    text = dsl.emit_report(_report(), timestamp="2026-01-01T00:00:00+00:00")
    assert dsl.validate_report(text) == []
    doc = json.loads(text)
    assert list(doc) == ["format", "suite", "timestamp", "checks"]
    assert list(doc["checks"][0]) == ["name", "status", "lhs", "rhs", "difference"]
    assert [c["status"] for c in doc["checks"]] == ["pass", "fail"]
    assert text == dsl.emit_report(_report(), timestamp="2026-01-01T00:00:00+00:00")


def test_empty_report():
    text = dsl.emit_report([], suite="none")
    assert json.loads(text)["checks"] == []
    assert dsl.validate_report(text) == []


def test_validate_report_rejects_bad_documents():
    assert dsl.validate_report("nope")
    assert dsl.validate_report(json.dumps({"suite": "x"}))
    bad = json.loads(dsl.emit_report(_report()))
    bad["checks"][0]["status"] = "maybe"
    assert dsl.validate_report(json.dumps(bad))


def test_realization_file():
    text = (
        "format=1\nhost builtin:bcbg1;\n"
        "image L = :d(gamma1) beta1: - 1/2*:c1 d(b1): + 1/2*:d(c1) b1:;\n"
        "image G = :c1 beta1: + :d(gamma1) b1:;\n"
    )
    host, images = dsl.parse_realization(text, builtin)
    assert host is bcbg(1) and set(images) == {"L", "G"}
    assert images["G"] == bcbg(1).expr(":c1 beta1: + :d(gamma1) b1:")
    with pytest.raises(dsl.DslError):
        dsl.parse_realization("format=1\nimage L = b1;\n", builtin)
    with pytest.raises(dsl.DslError):
        dsl.parse_realization("format=1\nhost builtin:nowhere;\n", builtin)


def test_random_mutations_of_builtins_never_crash():
    rng = random.Random(99)
    corpus = [dsl.serialize(builtin(n)) for n in BUILTIN_NAMES]
    for _ in range(300):
        src = list(rng.choice(corpus))
        for _ in range(3):
            i = rng.randrange(len(src))
            src[i] = rng.choice(";:[]()=*^-+ \nabXY0")
        doc = dsl.parse_document("".join(src))
        assert doc.ok or doc.diagnostics
