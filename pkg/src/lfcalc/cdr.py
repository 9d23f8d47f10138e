"""Flat chiral de Rham realization of the G2 sections over bcbg(7).

Both chiralities are built from explicit bc-beta-gamma expansions and then
cross-checked against the generic form embedding and the supersymmetric
generator, so a transcription slip in either route shows up as a failure.
"""
from __future__ import annotations

import gzip
import itertools
from dataclasses import dataclass
from pathlib import Path

from . import engine, g2
from .algebras import Check, Report, bcbg, n1, run_jobs, sv_g2, verify_realization
from .coeff import I, ONE, Q, SQRT2, SQRT15, Scalar
from .terms import Deriv, FieldExpr, Gen, LambdaPoly, Prod, Sum, normalize

NAMES = ("L", "G", "Phi", "K", "X", "M")
RANK = 7


def host():
    return bcbg(RANK)


def _q(a, b=1):
    return Scalar(Q(a, b))


def _sgn(sign):
    if sign in ("+", 1):
        return 1
    if sign in ("-", -1):
        return -1
    raise ValueError(f"bad chirality {sign!r}")


def _label(s):
    return "+" if s > 0 else "-"


# -- explicit expansions ---------------------------------------------------------
def explicit_phi(sign) -> FieldExpr:
    """Phi as a polynomial in b, c: the ccc, ccb, cbb and bbb parts."""
    s = _sgn(sign)
    pre = ONE if s > 0 else I
    a12 = pre * _q(1, 12) / SQRT2
    a4 = pre * _q(1, 4) / SQRT2
    phi = g2.phi0()
    terms = []
    for i, j, k in itertools.permutations(range(1, RANK + 1), 3):
        v = phi(i, j, k)
        if not v:
            continue
        ci, cj, ck = (Gen(f"c{x}") for x in (i, j, k))
        bi, bj, bk = (Gen(f"b{x}") for x in (i, j, k))
        terms.append((a12 * v, Prod((ci, cj, ck))))
        terms.append((a4 * v * s, Prod((cj, ck, bi))))
        terms.append((a4 * v, Prod((ck, bi, bj))))
        terms.append((a12 * v * s, Prod((bi, bj, bk))))
    return normalize(Sum(tuple(terms)), host())


def explicit_x(sign) -> FieldExpr:
    """-1/24 psi_ijkl e^i e^j e^k e^l -+ 1/2 sum_i d(e^i) e^i."""
    s = _sgn(sign)
    A = host()
    es = {i: g2.e_field(A, i, s) for i in range(1, RANK + 1)}
    psi = g2.psi0()
    terms = []
    for idx in itertools.permutations(range(1, RANK + 1), 4):
        v = psi(*idx)
        if v:
            terms.append((_q(-1, 24) * v, Prod(tuple(es[i] for i in idx))))
    for i in range(1, RANK + 1):
        terms.append((_q(-s, 2), Prod((Deriv(es[i]), es[i]))))
    return normalize(Sum(tuple(terms)), A)


def explicit_g(sign) -> FieldExpr:
    """1/2 (c beta + d(gamma) b) +- 1/2 (b beta + d(gamma) c)."""
    s = _sgn(sign)
    half = _q(1, 2)
    terms = []
    for i in range(1, RANK + 1):
        b, c, be, ga = (Gen(f"{x}{i}") for x in ("b", "c", "beta", "gamma"))
        terms += [
            (half, Prod((c, be))),
            (half, Prod((Deriv(ga), b))),
            (half * s, Prod((b, be))),
            (half * s, Prod((Deriv(ga), c))),
        ]
    return normalize(Sum(tuple(terms)), host())


# -- section sets ------------------------------------------------------------------
@dataclass(frozen=True)
class SectionSet:
    chirality: str
    Phi: FieldExpr
    K: FieldExpr
    X: FieldExpr
    G: FieldExpr
    L: FieldExpr
    M: FieldExpr

    def images(self) -> dict:
        return {n: getattr(self, n) for n in NAMES}

    def consistency(self) -> Report:
        """Re-derive every section by a second route."""
        s = _sgn(self.chirality)
        lab = f"sections{self.chirality}:"
        rep = Report(f"sections{self.chirality}")

        def eq(name, got, want):
            diff = got - want
            rep.checks.append(
                Check(lab + name, "fail" if diff else "pass", str(got), str(want), str(diff) if diff else "")
            )

        eq("Phi=embed(phi0)", self.Phi, g2.embed_form_flat(g2.phi0(), s, host()))
        eq("K=D(Phi) by derivation", self.K, engine.susy_D_by_derivation(self.Phi))
        eq("X=explicit", self.X, explicit_x(s))
        eq("G=explicit", self.G, explicit_g(s))
        eq("M=D(X)", self.M, engine.susy_D(self.X))
        eq("M=D(X) by derivation", self.M, engine.susy_D_by_derivation(self.X))
        eq("M=G_(0)X", self.M, engine.nproduct(self.G, 0, self.X))
        eq("D(D(Phi))=d(Phi)", engine.susy_D(self.K), engine.derive(self.Phi))
        return rep


_SECTIONS: dict = {}


def build_sections(sign) -> SectionSet:
    """Phi from its expansion; the other five by the defining n-products."""
    s = _sgn(sign)
    hit = _SECTIONS.get(s)
    if hit is not None:
        return hit
    Phi = explicit_phi(s)
    K = engine.susy_D(Phi)
    X = engine.nproduct(Phi, 0, Phi) * _q(1, 6)
    G = engine.nproduct(Phi, 1, K) * _q(-1, 3)
    L = engine.nproduct(G, 0, G) * _q(1, 2)
    M = engine.susy_D(X)
    out = SectionSet(_label(s), Phi, K, X, G, L, M)
    _SECTIONS[s] = out
    return out


def susy_generator_split() -> Check:
    """G_+ + G_- is the supersymmetric generator of the host."""
    tot = build_sections(1).G + build_sections(-1).G
    want = engine.susy_generator(host())
    diff = tot - want
    return Check("G+ + G- = G", "fail" if diff else "pass", str(tot), str(want), str(diff) if diff else "")


# -- the theorem suite ---------------------------------------------------------------
def _poly(alg, lam_powers: dict) -> LambdaPoly:
    return LambdaPoly.from_lambda_powers(alg, lam_powers)


def _pcheck(name, got: LambdaPoly, want: LambdaPoly) -> Check:
    diff = got - want
    return Check(name, "fail" if diff else "pass", str(got), str(want), str(diff) if diff else "")


def _echeck(name, got: FieldExpr, want: FieldExpr) -> Check:
    diff = got - want
    return Check(name, "fail" if diff else "pass", str(got), str(want), str(diff) if diff else "")


def relation_expr(S: SectionSet) -> FieldExpr:
    """4:GX: - 2:Phi K: - 4 dM - d^2 G."""
    return (
        engine.product(S.G, S.X) * 4
        - engine.product(S.Phi, S.K) * 2
        - engine.derive(S.M) * 4
        - engine.derive(S.G, 2)
    )


TRICRITICAL_A = I * SQRT15 * _q(1, 15)


def chirality_checks(sign) -> Report:
    """Items that concern a single chirality, except the full table."""
    S = build_sections(sign)
    c = S.chirality
    A = host()
    zero = FieldExpr.zero(A)
    vac = FieldExpr.vacuum(A)
    rep = Report(f"chirality{c}")
    add = rep.checks.append
    rep.extend(S.consistency())

    # (i) [Phi Phi] and the origin of its lambda^2 coefficient
    PP = engine.bracket(S.Phi, S.Phi)
    add(_pcheck(f"[Phi{c}_lambda Phi{c}]", PP, _poly(A, {2: vac * _q(-7, 2), 0: S.X * 6})))
    d3 = g2.phi0().dense()
    full = int((d3 * d3).sum())
    want = _q(1, 36) * (-3) * full
    got = PP.lam(2).coefficient(A.sig.monomial(()))
    add(Check(f"[Phi{c} Phi{c}] lambda^2 = (1/36)(-3)(42)", "pass" if got == want else "fail",
              str(got), str(want), "" if got == want else str(got - want)))
    add(_echeck(f"X{c} explicit", S.X, explicit_x(sign)))

    # (ii) the tri-critical pair
    PX = engine.bracket(S.Phi, S.X)
    add(_pcheck(f"[Phi{c}_lambda X{c}]", PX,
                _poly(A, {1: S.Phi * _q(-15, 2), 0: engine.derive(S.Phi) * _q(-5, 2)})))
    XX = engine.bracket(S.X, S.X)
    add(_pcheck(f"[X{c}_lambda X{c}]", XX,
                _poly(A, {3: vac * _q(35, 24), 1: S.X * -10, 0: engine.derive(S.X) * -5})))
    a = TRICRITICAL_A
    tri = verify_realization(n1(Q(7, 10)), {"L": S.X * _q(-1, 5), "G": S.Phi * a}, A,
                             label=f"tricritical{c}:")
    rep.extend(tri)

    # (iii) central charge
    GG = engine.bracket(S.G, S.G)
    add(_pcheck(f"[G{c}_lambda G{c}]", GG, _poly(A, {0: S.L * 2, 2: vac * _q(7, 2)})))

    # (vi) relation and its superpartner
    rel = relation_expr(S)
    add(_echeck(f"relation{c}", rel, zero))
    add(_echeck(f"D(relation{c})", engine.susy_D(rel), zero))

    # (vii) weights and primacy
    for name, w in (("Phi", Q(3, 2)), ("K", Q(2)), ("X", Q(2)), ("M", Q(5, 2)), ("G", Q(3, 2))):
        got = engine.conformal_weight(S.L, getattr(S, name))
        add(Check(f"weight {name}{c}", "pass" if got == w else "fail", str(got), str(w),
                  "" if got == w else f"{got} != {w}"))
    for name in ("Phi", "K"):
        ok = engine.is_primary(S.L, getattr(S, name))
        add(Check(f"primary {name}{c}", "pass" if ok else "fail", f"[L{c}_lambda {name}{c}]",
                  "(d + weight lambda) " + name, "" if ok else "higher lambda terms"))

    # intermediate identities of the linear bracket derivations
    PK = engine.bracket(S.Phi, S.K)
    add(_pcheck(f"[Phi{c}_lambda K{c}]", PK,
                _poly(A, {1: S.G * -3, 0: (S.M + engine.derive(S.G) * _q(1, 2)) * -3})))
    dPhi, dK = engine.derive(S.Phi), engine.derive(S.K)
    n = engine.nproduct
    add(_echeck(f"Phi{c}_(0)K{c} = 3dG{c} + Phi{c}_(1)dK{c}", n(S.Phi, 0, S.K),
                engine.derive(S.G) * 3 + n(S.Phi, 1, dK)))
    add(_echeck(f"K{c}_(2)dPhi{c} = 2Phi{c}_(1)K{c}", n(S.K, 2, dPhi), n(S.Phi, 1, S.K) * 2))
    add(_echeck(f"Phi{c}_(1)dPhi{c} = 6X{c}", n(S.Phi, 1, dPhi), S.X * 6))
    add(_echeck(f"Phi{c}_(1)dK{c} = K{c}_(1)dPhi{c} - 6M{c}", n(S.Phi, 1, dK),
                n(S.K, 1, dPhi) - S.M * 6))
    memo = engine.NProductCache()
    for m, nn, k in ((2, -1, -2), (-2, 1, 1), (1, -2, 1)):
        r = engine.check_borcherds(S.Phi, S.K, vac, m, nn, k, memo)
        add(Check(f"borcherds({m},{nn},{k}) on (Phi{c},K{c},vac)", "pass" if r else "fail",
                  str(r.lhs), str(r.rhs), str(r.difference) if not r else ""))
    return rep


_CROSS = None


def _cross_job(i):
    a, b = _CROSS[i]
    P, Mn = build_sections(1), build_sections(-1)
    got = engine.bracket(getattr(P, a), getattr(Mn, b))
    return _pcheck(f"[{a}+_lambda {b}-]", got, LambdaPoly(host())).as_dict()


def cross_checks(jobs: int = 1) -> Report:
    """All 36 brackets between a plus section and a minus section vanish."""
    global _CROSS
    build_sections(1)
    build_sections(-1)
    _CROSS = [(a, b) for a in NAMES for b in NAMES]
    try:
        res = run_jobs(_cross_job, len(_CROSS), jobs)
    finally:
        _CROSS = None
    rep = Report("cross-chirality")
    rep.checks = [Check(**r) for r in res]
    return rep


def theorem_suite(chirality: str = "both", jobs: int = 1) -> Report:
    if chirality not in ("+", "-", "both"):
        raise ValueError("chirality must be '+', '-' or 'both'")
    signs = (1, -1) if chirality == "both" else (_sgn(chirality),)
    rep = Report("g2 theorem")
    for s in signs:
        S = build_sections(s)
        rep.extend(chirality_checks(s))
        rep.extend(verify_realization(sv_g2(), S.images(), host(), jobs=jobs, label=f"sv_g2{S.chirality}:"))
    if chirality == "both":
        rep.checks.append(susy_generator_split())
        rep.extend(cross_checks(jobs))
    return rep


# -- golden bracket tables -------------------------------------------------------
def table_text(sign) -> str:
    """Every bracket among one chirality's sections, one block per pair."""
    S = build_sections(sign)
    out = []
    for a, b in itertools.combinations_with_replacement(NAMES, 2):
        P = engine.bracket(getattr(S, a), getattr(S, b))
        out.append(f"[{a}{S.chirality}_lambda {b}{S.chirality}] = {P}\n")
    return "".join(out)


def golden_table_path(sign):
    tag = "plus" if _sgn(sign) > 0 else "minus"
    return Path(__file__).with_name("data") / f"flat_{tag}.txt.gz"


def read_golden_table(sign) -> str:
    with gzip.open(golden_table_path(sign), "rt", encoding="utf-8") as fh:
        return fh.read()


def write_golden_table(sign) -> None:
    # mtime=0 keeps the compressed bytes reproducible
    with open(golden_table_path(sign), "wb") as raw:
        with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as fh:
            fh.write(table_text(sign).encode("utf-8"))
