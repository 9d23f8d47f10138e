"""Catalogue of algebras and realization checks."""
from __future__ import annotations

import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import engine
from . import kernel_impl as _k
from .coeff import Q, Scalar, as_q
from .terms import (
    Const,
    Deriv,
    FieldExpr,
    Gen,
    GeneratorSpec,
    LambdaPoly,
    Prod,
    Signature,
    Sum,
    normalize,
    to_kernel_tree,
    word_text,
)


class UnknownAlgebra(ValueError):
    pass


class AlgebraDef:
    """A named algebra: generators, bracket table, relations, central charge.

    ``table`` maps an ordered pair of generator names to ``{j: tree}``, the raw
    coefficient of ``lambda**j``.  Pairs absent in both orientations are zero
    when ``implicit_zero`` is set and an error otherwise.
    """

    def __init__(
        self,
        name: str,
        generators,
        table: dict,
        relations=(),
        central_charge=None,
        implicit_zero: bool = False,
        bcbg_rank: int | None = None,
    ):
        self.name = name
        self.sig = Signature(generators)
        self.generators = self.sig.generators
        self.raw_table = {}
        for (a, b), poly in table.items():
            for n in (a, b):
                if n not in self.sig.index:
                    raise KeyError(f"unknown generator {n!r} in bracket [{a}, {b}]")
            self.raw_table[(a, b)] = {int(j): t for j, t in poly.items()}
        self.raw_relations = list(relations)
        self.central_charge = None if central_charge is None else Scalar(central_charge)
        self.implicit_zero = implicit_zero
        self.bcbg_rank = bcbg_rank
        self._free = None
        self._kern = None
        self._table = None
        self._relations = None
        self._rewrite = None

    # -- kernels ---------------------------------------------------------
    def _make_kernel(self):
        idx = self.sig.index
        raw = {}
        for (a, b), poly in self.raw_table.items():
            kp = {}
            for j, tree in poly.items():
                kt = to_kernel_tree(self.sig, tree)
                if _has_irrational(kt):
                    raise ValueError(f"bracket [{a}, {b}] has a non-rational coefficient")
                kp[j] = kt
            raw[(idx[a], idx[b])] = kp
        return _k.Kernel(
            [g.parity for g in self.generators],
            [g.weight for g in self.generators],
            raw,
            implicit_zero=self.implicit_zero,
        )

    @property
    def free_kernel(self):
        """Kernel without relation rewriting (the universal enveloping algebra)."""
        if self._free is None:
            self._free = self._make_kernel()
        return self._free

    @property
    def kernel(self):
        """Kernel used for computation; relations are applied as oriented rewrites."""
        if self._kern is None:
            if not self.raw_relations:
                self._kern = self.free_kernel
            else:
                kern = self._make_kernel()
                for ca, cb, R in self.rewrites():
                    kern.set_rewrite(ca, cb, R)
                self._kern = kern
        return self._kern

    def rewrites(self):
        """Orient each relation as :AB: -> rest.

        The rewritten monomial is the smallest two-factor, underived word of
        maximal weight in the relation.
        """
        if self._rewrite is None:
            out = []
            for rel in self.relations:
                raw = {w: c for w, c in rel.raw().items()}
                cands = [
                    w
                    for w in raw
                    if len(w) == 2 and all(_k.dorder_of(c) == 0 for c in w) and raw[w].is_rational()
                ]
                if not cands:
                    continue
                w = min(cands)
                lead = raw[w].to_rational()
                rest = {v: -(c.to_rational()) / lead for v, c in raw.items() if v != w}
                out.append((w[0], w[1], rest))
            self._rewrite = out
        return self._rewrite

    # -- normalized views ------------------------------------------------
    def _free_expr(self, tree) -> FieldExpr:
        return FieldExpr._from_raw(self, self.free_kernel.eval_tree(to_kernel_tree(self.sig, tree)))

    @property
    def table(self) -> dict:
        """Stored brackets as LambdaPolys in free normal form."""
        if self._table is None:
            out = {}
            for pair, poly in self.raw_table.items():
                powers = {j: self._free_expr(t) for j, t in poly.items()}
                out[pair] = LambdaPoly.from_lambda_powers(self, powers)
            self._table = out
        return self._table

    @property
    def relations(self) -> list:
        if self._relations is None:
            self._relations = [self._free_expr(t) for t in self.raw_relations]
        return self._relations

    def gen(self, name: str, dorder: int = 0) -> FieldExpr:
        return FieldExpr.gen(self, name, dorder)

    def expr(self, text: str) -> FieldExpr:
        from .dsl import parse_expr

        return parse_expr(text, self)

    def lookup(self, a: str, b: str) -> LambdaPoly:
        """[a_lambda b] between generators in free normal form (skewsymmetry if unstored)."""
        if (a, b) in self.table:
            return self.table[(a, b)]
        P = self.free_kernel.gen_bracket(self.sig.index[a], self.sig.index[b])
        return LambdaPoly.from_lambda_powers(self, {j: FieldExpr._from_raw(self, x) for j, x in P.items()})

    def reduce(self, P: LambdaPoly) -> LambdaPoly:
        """Apply the relation rewrites to every coefficient of ``P``."""
        if not self.raw_relations:
            return P
        return LambdaPoly(self, {j: normalize(e, self) for j, e in P.coeffs.items()})

    def pairs(self):
        """One orientation of every unordered generator pair, stored one preferred."""
        names = [g.name for g in self.generators]
        out = []
        for i, a in enumerate(names):
            for b in names[i:]:
                if (a, b) in self.raw_table or (b, a) not in self.raw_table:
                    out.append((a, b))
                else:
                    out.append((b, a))
        return out

    # -- comparison ------------------------------------------------------
    def canonical(self):
        gens = tuple((g.name, g.parity, None if g.weight is None else str(g.weight)) for g in self.generators)
        table = tuple(sorted((k, str(v)) for k, v in self.table.items()))
        rels = tuple(str(r) for r in self.relations)
        cc = None if self.central_charge is None else str(self.central_charge)
        return (self.name, gens, table, rels, cc, self.implicit_zero, self.bcbg_rank)

    def __eq__(self, other):
        if not isinstance(other, AlgebraDef):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def __repr__(self):
        return f"AlgebraDef({self.name!r}, {len(self.generators)} generators)"

    def __getstate__(self):
        raise TypeError("AlgebraDef is not picklable; rebuild it with builtin()")


def _has_irrational(t):
    if isinstance(t, tuple):
        return any(_has_irrational(x) for x in t)
    if isinstance(t, list):
        return any(_has_irrational(x) for x in t)
    return isinstance(t, Scalar)


# -- builder helpers ---------------------------------------------------------
def _q(x):
    return as_q(Fraction(x)) if isinstance(x, str) else as_q(x)


def term(coef, j, tree=None):
    return (j, _q(coef), Const(1) if tree is None else tree)


def poly(*terms):
    """{lambda power: Sum tree} from (power, coef, tree) triples."""
    out = {}
    for j, c, t in terms:
        out.setdefault(j, []).append((c, t))
    return {j: Sum(tuple(v)) for j, v in out.items()}


def nop(*items):
    return Prod(tuple(items))


def d(x, n=1):
    return Deriv(x, n)


def _virasoro_terms(c, L="L"):
    return poly(term(1, 0, d(Gen(L))), term(2, 1, Gen(L)), term(_q(c) / 12, 3))


def _primary(L, a, weight):
    return poly(term(1, 0, d(Gen(a))), term(weight, 1, Gen(a)))


@lru_cache(maxsize=None)
def virasoro(c=0) -> AlgebraDef:
    c = _q(c)
    gens = [GeneratorSpec("L", 0, 2, 0)]
    return AlgebraDef(f"virasoro({c})", gens, {("L", "L"): _virasoro_terms(c)}, central_charge=c)


@lru_cache(maxsize=None)
def n1(c) -> AlgebraDef:
    c = _q(c)
    gens = [GeneratorSpec("L", 0, 2, 0), GeneratorSpec("G", 1, Q(3, 2), 1)]
    table = {
        ("L", "L"): _virasoro_terms(c),
        ("L", "G"): _primary("L", "G", Q(3, 2)),
        ("G", "G"): poly(term(2, 0, Gen("L")), term(c / 3, 2)),
    }
    return AlgebraDef(f"n1({c})", gens, table, central_charge=c)


@lru_cache(maxsize=None)
def n2(c) -> AlgebraDef:
    c = _q(c)
    h = Q(3, 2)
    gens = [
        GeneratorSpec("L", 0, 2, 0),
        GeneratorSpec("J", 0, 1, 1),
        GeneratorSpec("Gp", 1, h, 2),
        GeneratorSpec("Gm", 1, h, 3),
    ]
    table = {
        ("L", "L"): _virasoro_terms(c),
        ("L", "J"): _primary("L", "J", 1),
        ("L", "Gp"): _primary("L", "Gp", h),
        ("L", "Gm"): _primary("L", "Gm", h),
        ("J", "Gp"): poly(term(1, 0, Gen("Gp"))),
        ("J", "Gm"): poly(term(-1, 0, Gen("Gm"))),
        ("J", "J"): poly(term(c / 3, 1)),
        ("Gp", "Gp"): {},
        ("Gm", "Gm"): {},
        ("Gp", "Gm"): poly(
            term(1, 0, Gen("L")), term(Q(1, 2), 0, d(Gen("J"))), term(1, 1, Gen("J")), term(c / 6, 2)
        ),
    }
    return AlgebraDef(f"n2({c})", gens, table, central_charge=c)


@lru_cache(maxsize=None)
def n4(c) -> AlgebraDef:
    c = _q(c)
    h = Q(3, 2)
    gens = [
        GeneratorSpec("L", 0, 2, 0),
        GeneratorSpec("J0", 0, 1, 1),
        GeneratorSpec("Jp", 0, 1, 2),
        GeneratorSpec("Jm", 0, 1, 3),
        GeneratorSpec("Gp", 1, h, 4),
        GeneratorSpec("Gm", 1, h, 5),
        GeneratorSpec("Gbp", 1, h, 6),
        GeneratorSpec("Gbm", 1, h, 7),
    ]
    table = {("L", "L"): _virasoro_terms(c)}
    for g in gens[1:]:
        table[("L", g.name)] = _primary("L", g.name, g.weight)
    table.update(
        {
            ("J0", "Jp"): poly(term(2, 0, Gen("Jp"))),
            ("J0", "Jm"): poly(term(-2, 0, Gen("Jm"))),
            ("J0", "J0"): poly(term(c / 3, 1)),
            ("Jp", "Jm"): poly(term(1, 0, Gen("J0")), term(c / 6, 1)),
            ("J0", "Gp"): poly(term(1, 0, Gen("Gp"))),
            ("J0", "Gm"): poly(term(-1, 0, Gen("Gm"))),
            ("J0", "Gbp"): poly(term(1, 0, Gen("Gbp"))),
            ("J0", "Gbm"): poly(term(-1, 0, Gen("Gbm"))),
            ("Jp", "Gm"): poly(term(1, 0, Gen("Gp"))),
            ("Jm", "Gp"): poly(term(1, 0, Gen("Gm"))),
            ("Jp", "Gbm"): poly(term(-1, 0, Gen("Gbp"))),
            ("Jm", "Gbp"): poly(term(-1, 0, Gen("Gbm"))),
            ("Gp", "Gbp"): poly(term(1, 0, d(Gen("Jp"))), term(2, 1, Gen("Jp"))),
            ("Gm", "Gbm"): poly(term(1, 0, d(Gen("Jm"))), term(2, 1, Gen("Jm"))),
            ("Gp", "Gbm"): poly(
                term(1, 0, Gen("L")),
                term(Q(1, 2), 0, d(Gen("J0"))),
                term(1, 1, Gen("J0")),
                term(c / 6, 2),
            ),
            ("Gm", "Gbp"): poly(
                term(1, 0, Gen("L")),
                term(Q(-1, 2), 0, d(Gen("J0"))),
                term(-1, 1, Gen("J0")),
                term(c / 6, 2),
            ),
        }
    )
    return AlgebraDef(f"n4({c})", gens, table, central_charge=c, implicit_zero=True)


@lru_cache(maxsize=None)
def bcbg(n: int) -> AlgebraDef:
    """n independent bc-beta-gamma quadruples; [b_i c_i] = [beta_i gamma_i] = 1."""
    if n < 1:
        raise UnknownAlgebra("bcbg needs at least one quadruple")
    gens = []
    key = 0
    for stem, par, wt in (("b", 1, Q(1, 2)), ("c", 1, Q(1, 2)), ("beta", 0, 1), ("gamma", 0, 0)):
        for i in range(1, n + 1):
            gens.append(GeneratorSpec(f"{stem}{i}", par, wt, key))
            key += 1
    table = {}
    for i in range(1, n + 1):
        table[(f"b{i}", f"c{i}")] = poly(term(1, 0))
        table[(f"beta{i}", f"gamma{i}")] = poly(term(1, 0))
    return AlgebraDef(f"bcbg{n}", gens, table, implicit_zero=True, bcbg_rank=n)


SV_G2_CHARGE = Q(21, 2)


@lru_cache(maxsize=None)
def sv_g2() -> AlgebraDef:
    c = SV_G2_CHARGE
    L, G, Phi, K, X, M = (Gen(x) for x in ("L", "G", "Phi", "K", "X", "M"))
    # G and X are adjacent so the relation rewrite :G X: -> ... can fire
    gens = [
        GeneratorSpec("L", 0, 2, 0),
        GeneratorSpec("G", 1, Q(3, 2), 1),
        GeneratorSpec("X", 0, 2, 2),
        GeneratorSpec("M", 1, Q(5, 2), 3),
        GeneratorSpec("Phi", 1, Q(3, 2), 4),
        GeneratorSpec("K", 0, 2, 5),
    ]
    h = Q
    table = {
        ("L", "L"): _virasoro_terms(c),
        ("L", "G"): _primary("L", "G", h(3, 2)),
        ("G", "G"): poly(term(2, 0, L), term(c / 3, 2)),
        ("L", "Phi"): _primary("L", "Phi", h(3, 2)),
        ("L", "K"): _primary("L", "K", 2),
        ("Phi", "Phi"): poly(term(h(-7, 2), 2), term(6, 0, X)),
        ("Phi", "X"): poly(term(h(-15, 2), 1, Phi), term(h(-5, 2), 0, d(Phi))),
        ("X", "X"): poly(term(h(35, 24), 3), term(-10, 1, X), term(-5, 0, d(X))),
        ("G", "Phi"): poly(term(1, 0, K)),
        ("G", "X"): poly(term(h(-1, 2), 1, G), term(1, 0, M)),
        ("G", "K"): poly(term(3, 1, Phi), term(1, 0, d(Phi))),
        ("G", "M"): poly(term(h(-7, 12), 3), term(1, 1, L), term(4, 1, X), term(1, 0, d(X))),
        ("Phi", "K"): poly(term(-3, 1, G), term(-3, 0, M), term(h(-3, 2), 0, d(G))),
        ("Phi", "M"): poly(term(h(9, 2), 1, K), term(-3, 0, nop(G, Phi)), term(h(5, 2), 0, d(K))),
        ("X", "K"): poly(term(-3, 1, K), term(3, 0, nop(G, Phi)), term(-3, 0, d(K))),
        ("X", "M"): poly(
            term(h(-9, 4), 2, G),
            term(-5, 1, M),
            term(h(-9, 4), 1, d(G)),
            term(4, 0, nop(G, X)),
            term(h(-7, 2), 0, d(M)),
            term(h(-3, 4), 0, d(G, 2)),
        ),
        ("K", "K"): poly(
            term(h(-21, 6), 3), term(6, 1, X), term(-6, 1, L), term(3, 0, d(X)), term(-3, 0, d(L))
        ),
        ("K", "M"): poly(
            term(h(-15, 2), 2, Phi),
            term(h(-11, 2), 1, d(Phi)),
            term(3, 0, nop(G, K)),
            term(-6, 0, nop(L, Phi)),
        ),
        ("M", "M"): poly(
            term(h(-35, 24), 4),
            term(10, 2, X),
            term(h(-9, 2), 2, L),
            term(10, 1, d(X)),
            term(h(-9, 2), 1, d(L)),
            term(h(3, 2), 0, d(X, 2)),
            term(h(-3, 2), 0, d(L, 2)),
            term(-4, 0, nop(G, M)),
            term(8, 0, nop(L, X)),
        ),
        ("L", "X"): poly(term(h(-7, 24), 3), term(2, 1, X), term(1, 0, d(X))),
        ("L", "M"): poly(term(h(-1, 4), 2, G), term(h(5, 2), 1, M), term(1, 0, d(M))),
    }
    relation = Sum(((4, nop(G, X)), (-2, nop(Phi, K)), (-4, d(M)), (-1, d(G, 2))))
    return AlgebraDef("sv_g2", gens, table, relations=[relation], central_charge=c)


@lru_cache(maxsize=None)
def sv_spin7() -> AlgebraDef:
    c = Q(12)
    L, G, Xb, Mb = (Gen(x) for x in ("L", "G", "Xb", "Mb"))
    gens = [
        GeneratorSpec("L", 0, 2, 0),
        GeneratorSpec("G", 1, Q(3, 2), 1),
        GeneratorSpec("Xb", 0, 2, 2),
        GeneratorSpec("Mb", 1, Q(5, 2), 3),
    ]
    h = Q
    table = {
        ("L", "L"): _virasoro_terms(c),
        ("L", "G"): _primary("L", "G", h(3, 2)),
        ("G", "G"): poly(term(2, 0, L), term(c / 3, 2)),
        ("Xb", "Xb"): poly(term(h(8, 3), 3), term(16, 1, Xb), term(8, 0, d(Xb))),
        ("L", "Xb"): poly(term(h(1, 3), 3), term(1, 0, d(Xb)), term(2, 1, Xb)),
        ("G", "Xb"): poly(term(h(1, 2), 1, G), term(1, 0, Mb)),
        ("G", "Mb"): poly(term(h(2, 3), 3), term(-1, 1, L), term(4, 1, Xb), term(1, 0, d(Xb))),
        ("Xb", "Mb"): poly(
            term(h(-15, 4), 2, G),
            term(h(-15, 4), 1, d(G)),
            term(8, 1, Mb),
            term(h(11, 2), 0, d(Mb)),
            term(h(-5, 4), 0, d(G, 2)),
            term(-6, 0, nop(G, Xb)),
        ),
        ("Mb", "Mb"): poly(
            term(h(-8, 3), 4),
            term(h(-15, 2), 2, L),
            term(-16, 2, Xb),
            term(h(-15, 2), 1, d(L)),
            term(-16, 1, d(Xb)),
            term(h(-5, 2), 0, d(Xb, 2)),
            term(h(-5, 2), 0, d(L, 2)),
            term(-12, 0, nop(L, Xb)),
            term(6, 0, nop(G, Mb)),
        ),
        # not printed with the rest of the table; follows from Jacobi on (L, G, Xb)
        ("L", "Mb"): poly(term(h(1, 4), 2, G), term(h(5, 2), 1, Mb), term(1, 0, d(Mb))),
    }
    return AlgebraDef("sv_spin7", gens, table, central_charge=c)


_PARAM = re.compile(r"^(virasoro|n1|n2|n4)\((.+)\)$")


def builtin(name: str) -> AlgebraDef:
    """Look up a built-in algebra: virasoro(c), n1(c), n2(c), n4(c), bcbgN, sv_g2, sv_spin7."""
    name = name.strip()
    if name.startswith("builtin:"):
        name = name[len("builtin:"):]
    if name == "sv_g2":
        return sv_g2()
    if name == "sv_spin7":
        return sv_spin7()
    m = re.fullmatch(r"bcbg\(?(\d+)\)?", name)
    if m:
        return bcbg(int(m.group(1)))
    m = _PARAM.match(name)
    if m:
        try:
            c = as_q(Fraction(m.group(2).strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise UnknownAlgebra(f"bad central charge in {name!r}") from exc
        return {"virasoro": virasoro, "n1": n1, "n2": n2, "n4": n4}[m.group(1)](c)
    if name == "virasoro":
        return virasoro(0)
    raise UnknownAlgebra(f"unknown algebra {name!r}")


BUILTIN_NAMES = ("virasoro(0)", "n1(3/2)", "n2(3)", "n4(6)", "bcbg1", "bcbg2", "sv_g2", "sv_spin7")


# -- realizations ------------------------------------------------------------
@dataclass
class Check:
    name: str
    status: str
    lhs: str = ""
    rhs: str = ""
    difference: str = ""

    @property
    def ok(self):
        return self.status == "pass"

    def as_dict(self):
        return {
            "name": self.name,
            "status": self.status,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "difference": self.difference,
        }


@dataclass
class Report:
    suite: str
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def extend(self, other: "Report"):
        self.checks.extend(other.checks)


class ImageMap:
    """Sends monomials of an abstract algebra to expressions in a host."""

    def __init__(self, defn: AlgebraDef, images: dict):
        missing = [g.name for g in defn.generators if g.name not in images]
        if missing:
            raise KeyError(f"no image for generators {missing}")
        self.defn = defn
        self.images = images
        self._words = {}
        self._derivs = {}

    def factor(self, code):
        hit = self._derivs.get(code)
        if hit is None:
            g = self.defn.generators[_k.gen_of(code)].name
            hit = engine.derive(self.images[g], _k.dorder_of(code))
            self._derivs[code] = hit
        return hit

    def word(self, w):
        hit = self._words.get(w)
        if hit is None:
            if not w:
                host = next(iter(self.images.values())).alg
                hit = FieldExpr.vacuum(host)
            elif len(w) == 1:
                hit = self.factor(w[0])
            else:
                hit = engine.product(self.factor(w[0]), self.word(w[1:]))
            self._words[w] = hit
        return hit

    def expr(self, e: FieldExpr) -> FieldExpr:
        host = next(iter(self.images.values())).alg
        out = FieldExpr.zero(host)
        for w, c in e.raw().items():
            out = out + self.word(w) * c
        return out

    def poly(self, P: LambdaPoly) -> LambdaPoly:
        host = next(iter(self.images.values())).alg
        return LambdaPoly(host, {j: self.expr(e) for j, e in P.coeffs.items()})


def bracket_check(name: str, got: LambdaPoly, want: LambdaPoly) -> Check:
    diff = got - want
    return Check(name, "pass" if not diff else "fail", str(got), str(want), "" if not diff else str(diff))


_JOB = None


def _pair_job(i):
    defn, imap, pairs, label = _JOB
    a, b = pairs[i]
    return _one_pair(defn, imap, a, b, label)


def _one_pair(defn, imap, a, b, label):
    got = engine.bracket(imap.images[a], imap.images[b])
    want = imap.poly(defn.lookup(a, b))
    c = bracket_check(f"{label}[{a}_lambda {b}]", got, want)
    return c.as_dict()


def run_jobs(fn, n, jobs):
    """Run fn(0..n-1), in worker processes when jobs > 1; results in index order."""
    if jobs and jobs > 1 and n > 1:
        import multiprocessing as mp

        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as ex:
            return list(ex.map(fn, range(n)))
    return [fn(i) for i in range(n)]


def verify_realization(defn: AlgebraDef, images: dict, host: AlgebraDef | None = None, jobs: int = 1, label: str = "") -> Report:
    """Check every generator bracket and relation of ``defn`` on host images."""
    global _JOB
    if host is not None:
        for v in images.values():
            if v.alg.sig is not host.sig:
                raise ValueError("image does not live in the host algebra")
    imap = ImageMap(defn, images)
    pairs = defn.pairs()
    _JOB = (defn, imap, pairs, label)
    try:
        results = run_jobs(_pair_job, len(pairs), jobs)
    finally:
        _JOB = None
    rep = Report(f"verify:{defn.name}")
    rep.checks = [Check(**r) for r in results]
    for n, rel in enumerate(defn.relations):
        img = imap.expr(rel)
        rep.checks.append(
            Check(f"{label}relation[{n}]", "pass" if not img else "fail", str(img), "0", str(img) if img else "")
        )
    return rep


def check_automorphism(defn: AlgebraDef, mapping: dict) -> engine.AxiomResult:
    """mapping: generator name -> (sign, generator name); checks table equivariance."""
    names = [g.name for g in defn.generators]
    targets = sorted(t for _, t in mapping.values())
    if sorted(mapping) != sorted(names) or targets != sorted(names):
        raise ValueError("map must be a signed permutation of the generators")
    for n, (s, t) in mapping.items():
        if defn.sig[n].parity != defn.sig[t].parity:
            return engine.AxiomResult("automorphism", False, n, t, "parity changed")
    imap = ImageMap(defn, {n: defn.gen(t) * s for n, (s, t) in mapping.items()})
    for a, b in defn.pairs():
        got = imap.poly(defn.lookup(a, b))
        sa, ta = mapping[a]
        sb, tb = mapping[b]
        want = defn.reduce(defn.lookup(ta, tb) * (sa * sb))
        diff = got - want
        if diff:
            return engine.AxiomResult(
                "automorphism", False, f"[{a}_lambda {b}]", str(want), str(diff)
            )
    return engine.AxiomResult("automorphism", True)


def check_closure(defn: AlgebraDef, subset) -> engine.AxiomResult:
    """Every bracket among ``subset`` only involves generators of ``subset``."""
    allowed = {defn.sig.index[n] for n in subset}
    for a in subset:
        for b in subset:
            P = defn.lookup(a, b)
            for e in P.coeffs.values():
                for w in e.raw():
                    if any(_k.gen_of(c) not in allowed for c in w):
                        return engine.AxiomResult(
                            "closure", False, f"[{a}_lambda {b}]", word_text(defn.sig, w), "outside subset"
                        )
    return engine.AxiomResult("closure", True)


def check_table_skew(defn: AlgebraDef) -> Report:
    rep = Report(f"skew:{defn.name}")
    for a, b in defn.pairs():
        r = engine.check_skewsymmetry(defn.gen(a), defn.gen(b))
        rep.checks.append(Check(f"skew[{a},{b}]", "pass" if r else "fail", r.lhs, r.rhs, r.difference))
    return rep


def check_table_jacobi(defn: AlgebraDef, names=None) -> Report:
    names = names or [g.name for g in defn.generators]
    rep = Report(f"jacobi:{defn.name}")
    for a in names:
        for b in names:
            for c in names:
                r = engine.check_jacobi(defn.gen(a), defn.gen(b), defn.gen(c))
                rep.checks.append(
                    Check(f"jacobi[{a},{b},{c}]", "pass" if r else "fail", r.lhs, r.rhs, r.difference)
                )
    return rep
