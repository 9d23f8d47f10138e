"""Lambda-bracket calculus over FieldExprs.

Brackets and products are bilinear, so each argument is split into its
rational components over the coefficient field and the kernel only ever sees
rational data.  The axiom checks below evaluate both sides of each identity
by routes that do not share the shortcut being tested.
"""
from __future__ import annotations

from math import comb, factorial

from . import kernel_impl as _k
from .coeff import BASIS, Q, Scalar
from .terms import FieldExpr, LambdaPoly

UndefinedBracket = _k.UndefinedBracket
GuardError = _k.GuardError


def _same(a: FieldExpr, b: FieldExpr):
    if a.alg.sig is not b.alg.sig:
        raise ValueError("expressions belong to different algebras")
    return a.alg


def _rational_part(a: FieldExpr):
    """The kernel expression of ``a`` when all its coefficients are rational, else None."""
    comp = a.components()
    if len(comp) == 1 and 0 in comp:
        return comp[0]
    return None


def _bilinear(a, b, op):
    for j, ea in a.components().items():
        for k, eb in b.components().items():
            r = op(ea, eb)
            if r:
                yield BASIS[j] * BASIS[k], r


def bracket(a: FieldExpr, b: FieldExpr) -> LambdaPoly:
    """[a_lambda b]."""
    alg = _same(a, b)
    K = alg.kernel
    ra, rb = _rational_part(a), _rational_part(b)
    if ra is not None and rb is not None:
        P = K.bra_ee(ra, rb)
        return LambdaPoly.from_lambda_powers(alg, {n: FieldExpr._from_raw(alg, x) for n, x in P.items()})
    acc = {}
    for s, P in _bilinear(a, b, K.bra_ee):
        for n, x in P.items():
            _k.poly_addto(acc, n, x, s)
    return LambdaPoly.from_lambda_powers(
        alg, {n: FieldExpr._from_raw(alg, x) for n, x in acc.items()}
    )


def product(a: FieldExpr, b: FieldExpr) -> FieldExpr:
    """Normally ordered product :ab:."""
    alg = _same(a, b)
    ra, rb = _rational_part(a), _rational_part(b)
    if ra is not None and rb is not None:
        return FieldExpr._from_raw(alg, alg.kernel.product_ee(ra, rb))
    acc = {}
    for s, e in _bilinear(a, b, alg.kernel.product_ee):
        _k.addto(acc, e, s)
    return FieldExpr._from_raw(alg, acc)


def derive(a: FieldExpr, n: int = 1) -> FieldExpr:
    K = a.alg.kernel
    ra = _rational_part(a)
    if ra is not None:
        return FieldExpr._from_raw(a.alg, K.deriv_e_k(ra, n))
    acc = {}
    for k, e in a.components().items():
        d = K.deriv_e_k(e, n)
        if d:
            _k.addto(acc, d, BASIS[k])
    return FieldExpr._from_raw(a.alg, acc)


def divided_derive(a: FieldExpr, n: int) -> FieldExpr:
    """d^(n) a = d^n a / n!."""
    if n <= 1:
        return derive(a, n) if n else a
    return derive(a, n) * Scalar(Q(1, factorial(n)))


def nproduct(a: FieldExpr, n: int, b: FieldExpr) -> FieldExpr:
    """a_(n) b for any integer n."""
    if n >= 0:
        return bracket(a, b).nprod(n)
    return product(divided_derive(a, -n - 1), b)


def parity_parts(a: FieldExpr):
    """Split into (parity, homogeneous part) pairs."""
    sig = a.alg.sig
    parts = {0: {}, 1: {}}
    for w, c in a.raw().items():
        parts[sig.monomial(w).parity][w] = c
    return [(p, FieldExpr._from_raw(a.alg, t)) for p, t in parts.items() if t]


def psign(pa: int, pb: int) -> int:
    return -1 if (pa and pb) else 1


# -- supersymmetric generator ----------------------------------------------
def susy_generator(alg) -> FieldExpr:
    """G = sum_i :c_i beta_i: + :d(gamma_i) b_i: over a bc-beta-gamma algebra."""
    n = getattr(alg, "bcbg_rank", None)
    if not n:
        raise ValueError(f"{alg.name} is not a bc-beta-gamma algebra")
    from .terms import Deriv, Gen, Prod, Sum, normalize

    terms = []
    for i in range(1, n + 1):
        terms.append((1, Prod((Gen(f"c{i}"), Gen(f"beta{i}")))))
        terms.append((1, Prod((Deriv(Gen(f"gamma{i}")), Gen(f"b{i}")))))
    return normalize(Sum(tuple(terms)), alg)


def susy_D(a: FieldExpr) -> FieldExpr:
    """D(a) = G_(0) a."""
    G = a.alg.__dict__.get("_susy_G")
    if G is None:
        G = susy_generator(a.alg)
        a.alg.__dict__["_susy_G"] = G
    return nproduct(G, 0, a)


def susy_D_by_derivation(a: FieldExpr) -> FieldExpr:
    """D(a) computed as an odd derivation from its values on generators.

    D(gamma)=c, D(c)=d(gamma), D(b)=beta, D(beta)=d(b); D commutes with d.
    Used to cross-check :func:`susy_D`.
    """
    alg = a.alg
    if not getattr(alg, "bcbg_rank", None):
        raise ValueError(f"{alg.name} is not a bc-beta-gamma algebra")
    sig = alg.sig
    partner = {"gamma": ("c", 0), "c": ("gamma", 1), "b": ("beta", 0), "beta": ("b", 1)}
    out = FieldExpr.zero(alg)
    for w, coef in a.raw().items():
        facs = [sig.factor(c) for c in w]
        for pos, f in enumerate(facs):
            name = f.generator.name
            stem = name.rstrip("0123456789")
            idx = name[len(stem):]
            tgt, extra = partner[stem]
            img = FieldExpr.gen(alg, f"{tgt}{idx}", f.dorder + extra)
            sign = -1 if sum(x.generator.parity for x in facs[:pos]) & 1 else 1
            # rebuild the right-nested product with factor pos replaced by its image
            acc = None
            for q in range(len(facs) - 1, -1, -1):
                item = img if q == pos else FieldExpr.gen(alg, facs[q].generator.name, facs[q].dorder)
                acc = item if acc is None else product(item, acc)
            out = out + acc * (coef * sign)
    return out


# -- axiom checks ----------------------------------------------------------
class AxiomResult:
    """Outcome of one identity check; sides are rendered to text on demand."""

    __slots__ = ("name", "holds", "_lhs", "_rhs", "_diff")

    def __init__(self, name: str, holds: bool, lhs="", rhs="", difference=""):
        self.name = name
        self.holds = holds
        self._lhs, self._rhs, self._diff = lhs, rhs, difference

    @staticmethod
    def _text(x) -> str:
        return x() if callable(x) else str(x)

    @property
    def lhs(self) -> str:
        return self._text(self._lhs)

    @property
    def rhs(self) -> str:
        return self._text(self._rhs)

    @property
    def difference(self) -> str:
        return self._text(self._diff)

    def __bool__(self):
        return self.holds

    def __repr__(self):
        return (
            f"AxiomResult(name={self.name!r}, holds={self.holds}, lhs={self.lhs!r}, "
            f"rhs={self.rhs!r}, difference={self.difference!r})"
        )


def _poly_result(name, lhs: dict, rhs: dict, alg) -> AxiomResult:
    keys = sorted(set(lhs) | set(rhs))
    zero = FieldExpr.zero(alg)
    diffs = []
    for key in keys:
        d = lhs.get(key, zero) - rhs.get(key, zero)
        if d:
            diffs.append(f"{key}: {d}")

    def fmt(m):
        return lambda: "; ".join(f"{k}: {v}" for k, v in sorted(m.items()) if v) or "0"

    return AxiomResult(name, not diffs, fmt(lhs), fmt(rhs), "; ".join(diffs))


def _expr_result(name, lhs: FieldExpr, rhs: FieldExpr) -> AxiomResult:
    d = lhs - rhs
    return AxiomResult(name, not d, lhs, rhs, d if d else "")


def _lam(P: LambdaPoly) -> dict:
    return {j: P.lam(j) for j in P.coeffs}


def _addp(acc: dict, key, e: FieldExpr):
    if not e:
        return
    if key in acc:
        acc[key] = acc[key] + e
    else:
        acc[key] = e


def skew_nproducts(P: LambdaPoly, pa: int, pb: int) -> LambdaPoly:
    """b_(n)a = p * sum_j (-1)^(n+j+1) d^(j)(a_(n+j)b), from P = [a_lambda b]."""
    alg = P.alg
    p = psign(pa, pb)
    out = {}
    top = P.degree()
    for n in range(top + 1):
        acc = FieldExpr.zero(alg)
        for j in range(top - n + 1):
            x = P.nprod(n + j)
            if x:
                sgn = -1 if (n + j + 1) & 1 else 1
                acc = acc + divided_derive(x, j) * (sgn * p)
        if acc:
            out[n] = acc
    return LambdaPoly(alg, out)


def check_skewsymmetry(a, b) -> AxiomResult:
    alg = _same(a, b)
    lhs = {}
    rhs = {}
    for pa, ap in parity_parts(a):
        for pb, bp in parity_parts(b):
            for n, e in bracket(bp, ap).coeffs.items():
                _addp(lhs, n, e)
            for n, e in skew_nproducts(bracket(ap, bp), pa, pb).coeffs.items():
                _addp(rhs, n, e)
    return _poly_result("skewsymmetry", lhs, rhs, alg)


def check_jacobi(a, b, c) -> AxiomResult:
    """[a_l [b_m c]] = [[a_l b]_{l+m} c] + p [b_m [a_l c]], compared per l^i m^j."""
    alg = _same(a, b)
    _same(b, c)
    lhs, rhs = {}, {}
    for pa, ap in parity_parts(a):
        for pb, bp in parity_parts(b):
            p = psign(pa, pb)
            for j, y in _lam(bracket(bp, c)).items():
                for i, z in _lam(bracket(ap, y)).items():
                    _addp(lhs, (i, j), z)
            for i, x in _lam(bracket(ap, bp)).items():
                for k, z in _lam(bracket(x, c)).items():
                    # (l+m)^k
                    for r in range(k + 1):
                        _addp(rhs, (i + r, k - r), z * comb(k, r))
            for i, w in _lam(bracket(ap, c)).items():
                for j, z in _lam(bracket(bp, w)).items():
                    _addp(rhs, (i, j), z * p)
    return _poly_result("jacobi", lhs, rhs, alg)


def check_wick(a, b, c) -> AxiomResult:
    """[a_l :bc:] = :[a_l b]c: + p:b[a_l c]: + int_0^l [[a_l b]_m c] dm."""
    alg = _same(a, b)
    _same(b, c)
    lhs = _lam(bracket(a, product(b, c)))
    rhs = {}
    for pa, ap in parity_parts(a):
        for pb, bp in parity_parts(b):
            p = psign(pa, pb)
            for j, x in _lam(bracket(ap, bp)).items():
                _addp(rhs, j, product(x, c))
                for k, y in _lam(bracket(x, c)).items():
                    _addp(rhs, j + k + 1, y * Scalar(Q(1, k + 1)))
            for j, z in _lam(bracket(ap, c)).items():
                _addp(rhs, j, product(bp, z) * p)
    return _poly_result("wick", lhs, rhs, alg)


def check_quasi_comm(a, b) -> AxiomResult:
    """:ab: - p:ba: = sum_j (-1)^j d^(j+1)(a_(j)b)."""
    _same(a, b)
    lhs = FieldExpr.zero(a.alg)
    rhs = FieldExpr.zero(a.alg)
    for pa, ap in parity_parts(a):
        for pb, bp in parity_parts(b):
            lhs = lhs + product(ap, bp) - product(bp, ap) * psign(pa, pb)
            for j, x in bracket(ap, bp).coeffs.items():
                rhs = rhs + divided_derive(x, j + 1) * (-1 if j & 1 else 1)
    return _expr_result("quasi_comm", lhs, rhs)


def check_quasi_assoc(a, b, c) -> AxiomResult:
    """::ab:c: - :a:bc:: = sum_j :(d^(j+1)a)(b_(j)c): + p sum_j :(d^(j+1)b)(a_(j)c):."""
    _same(a, b)
    _same(b, c)
    lhs = product(product(a, b), c) - product(a, product(b, c))
    rhs = FieldExpr.zero(a.alg)
    for pa, ap in parity_parts(a):
        for pb, bp in parity_parts(b):
            p = psign(pa, pb)
            for j, x in bracket(bp, c).coeffs.items():
                rhs = rhs + product(divided_derive(ap, j + 1), x)
            for j, x in bracket(ap, c).coeffs.items():
                rhs = rhs + product(divided_derive(bp, j + 1), x) * p
    return _expr_result("quasi_assoc", lhs, rhs)


def gbinom(n: int, j: int) -> int:
    """Binomial coefficient for any integer n and j >= 0."""
    if j < 0:
        return 0
    num = 1
    for t in range(j):
        num *= n - t
    return num // factorial(j)


class NProductCache:
    """Memo of n-products among a few fixed expressions."""

    def __init__(self):
        self._br = {}
        self._neg = {}

    def poly(self, x, y):
        key = (id(x), id(y))
        hit = self._br.get(key)
        if hit is None:
            hit = (x, y, bracket(x, y))
            self._br[key] = hit
        return hit[2]

    def deg(self, x, y):
        return self.poly(x, y).degree()

    def n(self, x, n, y):
        if n >= 0:
            return self.poly(x, y).nprod(n)
        key = (id(x), n, id(y))
        hit = self._neg.get(key)
        if hit is None:
            hit = (x, y, nproduct(x, n, y))
            self._neg[key] = hit
        return hit[2]


def check_borcherds(a, b, c, m: int, n: int, k: int, memo: NProductCache | None = None) -> AxiomResult:
    _same(a, b)
    _same(b, c)
    memo = memo or NProductCache()
    alg = a.alg
    lhs = FieldExpr.zero(alg)
    rhs = FieldExpr.zero(alg)
    for pa, ap in parity_parts(a):
        for pb, bp in parity_parts(b):
            p = psign(pa, pb)
            # sum_j C(m,j) (a_(n+j) b)_(m+k-j) c
            top = memo.deg(ap, bp)
            for j in range(0, max(0, top - n) + 1):
                cf = gbinom(m, j)
                if not cf or n + j > top:
                    continue
                x = memo.n(ap, n + j, bp)
                if x:
                    rhs = rhs + nproduct(x, m + k - j, c) * cf
            # sum_j (-1)^j C(n,j) [a_(m+n-j)(b_(k+j)c) - p(-1)^n b_(n+k-j)(a_(m+j)c)]
            tbc = memo.deg(bp, c)
            for j in range(0, max(0, tbc - k) + 1):
                cf = gbinom(n, j) * (-1 if j & 1 else 1)
                if not cf or k + j > tbc:
                    continue
                y = memo.n(bp, k + j, c)
                if y:
                    lhs = lhs + nproduct(ap, m + n - j, y) * cf
            tac = memo.deg(ap, c)
            sn = -1 if n & 1 else 1
            for j in range(0, max(0, tac - m) + 1):
                cf = gbinom(n, j) * (-1 if j & 1 else 1)
                if not cf or m + j > tac:
                    continue
                y = memo.n(ap, m + j, c)
                if y:
                    lhs = lhs - nproduct(bp, n + k - j, y) * (cf * p * sn)
    # the finite ranges above also cover negative indices: once k+j (resp. m+j,
    # n+j) is negative the product is a normal product and never vanishes, so
    # the loops start at j=0 and run up to the first index past the top degree
    return _expr_result(f"borcherds({m},{n},{k})", lhs, rhs)


def check_axiom(which: str, a, b, c=None, m=None, n=None, k=None) -> AxiomResult:
    """Evaluate one vertex-algebra identity on concrete expressions."""
    if which == "skewsymmetry":
        return check_skewsymmetry(a, b)
    if which == "quasi_comm":
        return check_quasi_comm(a, b)
    if c is None:
        raise ValueError(f"{which} needs three arguments")
    if which == "jacobi":
        return check_jacobi(a, b, c)
    if which == "wick":
        return check_wick(a, b, c)
    if which == "quasi_assoc":
        return check_quasi_assoc(a, b, c)
    if which == "borcherds":
        return check_borcherds(a, b, c, m, n, k)
    raise ValueError(f"unknown axiom {which!r}")


# -- conformal weight ------------------------------------------------------
NOT_EIGEN = "not an eigenvector"


def conformal_weight(L: FieldExpr, a: FieldExpr):
    """Delta with [L_lambda a] = (d + Delta lambda) a + O(lambda^2), else NOT_EIGEN."""
    _same(L, a)
    if not a:
        return NOT_EIGEN
    P = bracket(L, a)
    if P.nprod(0) != derive(a):
        return NOT_EIGEN
    one = P.nprod(1)
    if not one:
        return Q(0)
    w, c = next(iter(a.raw().items()))
    ratio = one.coefficient(w) / c
    if not ratio.is_rational() or one != a * ratio:
        return NOT_EIGEN
    return ratio.to_rational()


def is_primary(L: FieldExpr, a: FieldExpr) -> bool:
    w = conformal_weight(L, a)
    if w == NOT_EIGEN:
        return False
    return bracket(L, a).degree() <= 1
