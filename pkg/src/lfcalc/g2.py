"""Exact multilinear algebra on flat R^7 and the G2 forms.

Forms are stored sparsely over strictly increasing 1-based index tuples,
``w = sum_I w_I dx_I``.  Contraction identities are checked over dense
integer arrays with numpy, which is exact for the integer tables involved.
"""
from __future__ import annotations

import itertools
from math import factorial
from pathlib import Path

import numpy as np

from .coeff import ONE, Q, Scalar, ZERO, I, SQRT2

DIM = 7
ORIENTATION = tuple(range(1, DIM + 1))

_PHI0_TERMS = (
    ((1, 2, 3), 1),
    ((1, 4, 5), 1),
    ((1, 6, 7), 1),
    ((2, 4, 6), 1),
    ((2, 5, 7), -1),
    ((3, 4, 7), -1),
    ((3, 5, 6), -1),
)


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 if it has repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    s = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                s = -s
    return s


class TensorTable:
    """Antisymmetric rank-k tensor on R^7 with Scalar components."""

    __slots__ = ("rank", "_c")

    def __init__(self, rank: int, components=None):
        if rank < 0 or rank > DIM:
            raise ValueError(f"rank {rank} out of range")
        self.rank = rank
        c = {}
        for idx, v in (components or {}).items():
            idx = tuple(idx)
            if len(idx) != rank or any(not 1 <= i <= DIM for i in idx):
                raise ValueError(f"bad index tuple {idx}")
            s = perm_sign(idx)
            if s == 0:
                if Scalar(v):
                    raise ValueError(f"nonzero component on repeated indices {idx}")
                continue
            key = tuple(sorted(idx))
            val = c.get(key, ZERO) + Scalar(v) * s
            if val:
                c[key] = val
            else:
                c.pop(key, None)
        self._c = c

    @property
    def components(self) -> dict:
        return dict(self._c)

    def __call__(self, *idx) -> Scalar:
        if len(idx) != self.rank:
            raise ValueError("wrong number of indices")
        s = perm_sign(idx)
        if s == 0:
            return ZERO
        v = self._c.get(tuple(sorted(idx)), ZERO)
        return v if s > 0 else -v

    def items(self):
        return sorted(self._c.items())

    def is_zero(self):
        return not self._c

    def __eq__(self, other):
        return isinstance(other, TensorTable) and self.rank == other.rank and self._c == other._c

    def __hash__(self):
        return hash((self.rank, frozenset(self._c.items())))

    def __add__(self, other):
        if self.rank != other.rank:
            raise ValueError("rank mismatch")
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, ZERO) + v
        return TensorTable(self.rank, c)

    def __neg__(self):
        return TensorTable(self.rank, {k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        s = Scalar(s)
        return TensorTable(self.rank, {k: v * s for k, v in self._c.items()})

    __rmul__ = __mul__

    def dense(self):
        """Full 7^k array; int64 when every component is an integer."""
        vals = list(self._c.values())
        integral = all(v.is_rational() and v.to_rational().denominator == 1 for v in vals)
        if integral:
            arr = np.zeros((DIM,) * self.rank, dtype=np.int64)
        else:
            arr = np.empty((DIM,) * self.rank, dtype=object)
            arr.fill(ZERO)
        for key, v in self._c.items():
            x = int(v.to_rational()) if integral else v
            base = [i - 1 for i in key]
            for p in itertools.permutations(range(self.rank)):
                arr[tuple(base[i] for i in p)] = x if perm_sign(p) > 0 else -x
        return arr

    @classmethod
    def from_dense(cls, arr):
        arr = np.asarray(arr)
        k = arr.ndim
        comps = {}
        for key in itertools.combinations(range(DIM), k):
            v = arr[key] if k else arr[()]
            if isinstance(v, np.integer):
                v = int(v)
            if Scalar(v):
                comps[tuple(i + 1 for i in key)] = v
        t = cls(k, comps)
        return t

    def text(self) -> str:
        """Report rendering, one component per line."""
        return "".join(
            f"{' '.join(map(str, k))}: {v}\n" for k, v in self.items()
        )

    @classmethod
    def parse(cls, rank: int, text: str):
        from .coeff import _parse_scalar

        comps = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            idx, val = line.split(":", 1)
            comps[tuple(int(x) for x in idx.split())] = _parse_scalar(val.strip())
        return cls(rank, comps)

    def __repr__(self):
        return f"TensorTable(rank={self.rank}, nnz={len(self._c)})"


# -- exterior algebra ---------------------------------------------------------
def wedge(a: TensorTable, b: TensorTable) -> TensorTable:
    out = {}
    if a.rank + b.rank > DIM:
        return TensorTable(a.rank + b.rank)
    for ka, va in a._c.items():
        for kb, vb in b._c.items():
            s = perm_sign(ka + kb)
            if s:
                key = tuple(sorted(ka + kb))
                out[key] = out.get(key, ZERO) + va * vb * s
    return TensorTable(a.rank + b.rank, out)


def interior(v, w: TensorTable) -> TensorTable:
    """(v _| w)_J = sum_i v_i w_{iJ}; ``v`` is a length-7 sequence."""
    if w.rank == 0:
        raise ValueError("cannot contract a 0-form")
    out = {}
    for key, val in w._c.items():
        for pos, i in enumerate(key):
            vi = Scalar(v[i - 1])
            if not vi:
                continue
            rest = key[:pos] + key[pos + 1:]
            sgn = -1 if pos & 1 else 1
            out[rest] = out.get(rest, ZERO) + vi * val * sgn
    return TensorTable(w.rank - 1, out)


def flat(v) -> TensorTable:
    """Metric dual of a vector (identity metric)."""
    return TensorTable(1, {(i + 1,): x for i, x in enumerate(v) if Scalar(x)})


def hodge_star(w: TensorTable, orientation=ORIENTATION) -> TensorTable:
    """Euclidean Hodge star: dx_I -> sign(I, I^c) dx_{I^c}, times the orientation sign."""
    osign = perm_sign(orientation)
    if osign == 0 or sorted(orientation) != list(ORIENTATION):
        raise ValueError("orientation must be a permutation of 1..7")
    out = {}
    for key, val in w._c.items():
        comp = tuple(i for i in ORIENTATION if i not in key)
        out[comp] = val * (perm_sign(key + comp) * osign)
    return TensorTable(DIM - w.rank, out)


def volume(orientation=ORIENTATION) -> TensorTable:
    return TensorTable(DIM, {ORIENTATION: perm_sign(orientation)})


def basis_vector(i: int):
    return [1 if j == i else 0 for j in range(1, DIM + 1)]


# -- the G2 forms ---------------------------------------------------------------
def phi0() -> TensorTable:
    return TensorTable(3, dict(_PHI0_TERMS))


def psi0() -> TensorTable:
    """The 4-form paired with phi0 in the contraction identities.

    With phi0 as written and dx1..dx7 positive, these identities hold for
    minus the Hodge dual, so that is the sign used here.
    """
    return -hodge_star(phi0())


_DATA = Path(__file__).with_name("data")


def golden(name: str) -> TensorTable:
    rank = {"phi0": 3, "psi0": 4}[name]
    return TensorTable.parse(rank, (_DATA / f"{name}.txt").read_text(encoding="utf-8"))


# -- contraction identities -------------------------------------------------------
def _residue_text(diff, limit=6) -> str:
    diff = np.asarray(diff)
    if diff.ndim == 0:
        return "" if diff == 0 else str(int(diff))
    nz = np.argwhere(diff != 0)
    parts = [
        f"({','.join(str(i + 1) for i in idx)}): {int(diff[tuple(idx)])}" for idx in nz[:limit]
    ]
    if len(nz) > limit:
        parts.append(f"... {len(nz)} nonzero")
    return "; ".join(parts)


def _check(name, lhs, rhs, lhs_text, rhs_text):
    from .algebras import Check

    diff = np.asarray(lhs) - np.asarray(rhs)
    ok = not np.any(diff)
    return Check(name, "pass" if ok else "fail", lhs_text, rhs_text, _residue_text(diff))


def _antisym(T, n):
    """Sum over signed permutations of the first n axes (no 1/n! factor)."""
    out = np.zeros_like(T)
    rest = list(range(n, T.ndim))
    for p in itertools.permutations(range(n)):
        out += perm_sign(p) * np.transpose(T, list(p) + rest)
    return out


def check_contractions(phi: TensorTable | None = None, psi: TensorTable | None = None):
    """Verify the phi/psi contraction identities over all index values."""
    from .algebras import Report

    phi = phi0() if phi is None else phi
    psi = psi0() if psi is None else psi
    P = phi.dense()
    S = psi.dense()
    g = np.eye(DIM, dtype=np.int64)
    E = np.einsum
    rep = Report("g2 contractions")
    add = rep.checks.append

    add(_check("contraction_42", E("ijk,ijk", P, P), 42, "phi_ijk phi_ijk", "42"))
    add(_check("contraction_6g", E("ijk,ajk->ia", P, P), 6 * g, "phi_ijk phi_ajk", "6 g_ia"))
    gg = E("ia,jb->ijab", g, g) - E("ib,ja->ijab", g, g)
    add(_check(
        "contraction_phiphi_single", E("ijk,abk->ijab", P, P), gg - S,
        "phi_ijk phi_abk", "g_ia g_jb - g_ib g_ja - psi_ijab",
    ))
    add(_check("contraction_phipsi_triple", E("ijk,aijk->a", P, S), np.zeros(DIM, np.int64),
               "phi_ijk psi_aijk", "0"))
    add(_check("contraction_phipsi_double", E("ijk,abjk->iab", P, S), -4 * P,
               "phi_ijk psi_abjk", "-4 phi_iab"))
    six = (
        E("ia,jbc->ijabc", g, P) + E("ib,ajc->ijabc", g, P) + E("ic,abj->ijabc", g, P)
        - E("aj,ibc->ijabc", g, P) - E("bj,aic->ijabc", g, P) - E("cj,abi->ijabc", g, P)
    )
    add(_check(
        "contraction_phipsi_single", E("ijk,abck->ijabc", P, S), six,
        "phi_ijk psi_abck",
        "g_ia phi_jbc + g_ib phi_ajc + g_ic phi_abj - g_aj phi_ibc - g_bj phi_aic - g_cj phi_abi",
    ))
    rhs = (
        -E("ajk,ibc->ijkabc", P, P) - E("iak,jbc->ijkabc", P, P) - E("ija,kbc->ijkabc", P, P)
        + E("ia,jb,kc->ijkabc", g, g, g) + E("ib,jc,ka->ijkabc", g, g, g)
        + E("ic,ja,kb->ijkabc", g, g, g) - E("ia,jc,kb->ijkabc", g, g, g)
        - E("ib,ja,kc->ijkabc", g, g, g) - E("ic,jb,ka->ijkabc", g, g, g)
        - E("ia,jkbc->ijkabc", g, S) - E("ja,kibc->ijkabc", g, S) - E("ka,ijbc->ijkabc", g, S)
        + E("ab,ijkc->ijkabc", g, S) - E("ac,ijkb->ijkabc", g, S)
    )
    add(_check(
        "contraction_psipsi_single", E("ijkl,abcl->ijkabc", S, S), rhs,
        "psi_ijkl psi_abcl",
        "-phi_ajk phi_ibc - phi_iak phi_jbc - phi_ija phi_kbc + (ggg terms)"
        " - g_ia psi_jkbc - g_ja psi_kibc - g_ka psi_ijbc + g_ab psi_ijkc - g_ac psi_ijkb",
    ))
    # phi_[ijk phi_mn]l = -g_l[m psi_nijk], compared without the 1/5! factor
    lhs = _antisym(E("ijk,mnl->ijkmnl", P, P), 5)
    rhs = _antisym(E("lm,nijk->ijkmnl", g, S), 5)
    add(_check("phi_phi_antisym_coords", lhs, -rhs,
               "phi_[ijk phi_mn]l", "-g_l[m psi_nijk]"))
    rep.checks.extend(_form_checks(phi, psi))
    return rep


def _form_check(name, lhs: TensorTable, rhs: TensorTable, lt, rt):
    from .algebras import Check

    d = lhs - rhs
    diff = "; ".join(f"({','.join(map(str, k))}): {v}" for k, v in d.items()[:6])
    return Check(name, "fail" if d._c else "pass", lt, rt, diff)


def _form_checks(phi: TensorTable, psi: TensorTable):
    out = []
    vol = volume()
    lhs_all, rhs_all = TensorTable(DIM), TensorTable(DIM)
    bad = []
    for u in range(1, DIM + 1):
        up = interior(basis_vector(u), phi)
        for v in range(1, DIM + 1):
            vp = interior(basis_vector(v), phi)
            lhs = wedge(wedge(up, vp), phi)
            rhs = vol * (6 if u == v else 0)
            if lhs != rhs:
                bad.append((u, v, lhs, rhs))
    from .algebras import Check

    out.append(Check(
        "metric_from_phi", "fail" if bad else "pass",
        "(u _| phi) ^ (v _| phi) ^ phi", "6 <u,v> vol",
        "; ".join(f"u=e{u}, v=e{v}: {l.text().strip() or 0} vs {r.text().strip() or 0}"
                  for u, v, l, r in bad[:4]),
    ))
    fails = []
    for i in range(1, DIM + 1):
        w = basis_vector(i)
        lhs = wedge(phi, interior(w, phi))
        rhs = wedge(psi, flat(w)) * -2
        if lhs != rhs:
            fails.append(_form_check(f"w=e{i}", lhs, rhs, "", ""))
    out.append(Check(
        "phi_wedge_contraction", "fail" if fails else "pass",
        "phi ^ (w _| phi)", "-2 psi ^ w_flat",
        "; ".join(f"{c.name}: {c.difference}" for c in fails[:3]),
    ))
    star = hodge_star(psi)
    out.append(_form_check("psi_star", star, -phi, "*psi", "-phi"))
    return out


# -- Bessel coefficients and the flat form embedding -------------------------------
def bessel_coeff(r: int, s: int):
    """T_{r,s} = (r+s)! / ((r-s)! s! 2^s); zero outside 0 <= s <= r."""
    if s < 0 or s > r or r < 0:
        return Q(0)
    return Q(factorial(r + s), factorial(r - s) * factorial(s) * 2 ** s)


def e_field(alg, i: int, sign: int):
    """e^i_+ = (b_i + c_i)/sqrt2, e^i_- = (b_i - c_i)/sqrt2 in a flat bc-beta-gamma algebra."""
    from .terms import FieldExpr

    b = FieldExpr.gen(alg, f"b{i}")
    c = FieldExpr.gen(alg, f"c{i}")
    half = SQRT2 * Scalar(Q(1, 2))
    return (b + c) * half if sign > 0 else (b - c) * half


def embed_form_flat(w: TensorTable, sign: int, alg=None):
    """J_{+-} = (1/n!) w_{i1..in} F_{+-(n)} with all connection terms dropped.

    F_{+(n)} = e_+ ... e_+ and F_{-(n)} = i^n e_- ... e_-, read right to left.
    The sum runs over every ordered index tuple, not only sorted ones.
    """
    from .algebras import bcbg
    from .terms import FieldExpr, Prod, Sum, normalize

    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = w.rank
    if n > 4:
        raise ValueError("forms of rank > 4 are not supported")
    alg = bcbg(DIM) if alg is None else alg
    pref = Scalar(Q(1, factorial(n))) * (ONE if sign > 0 else I ** n)
    if n == 0:
        return FieldExpr.vacuum(alg, w(*()) * pref) if w._c else FieldExpr.zero(alg)
    es = {i: e_field(alg, i, sign) for i in range(1, DIM + 1)}
    terms = []
    for key, val in w.items():
        for p in itertools.permutations(key):
            terms.append((val * perm_sign(p) * pref, Prod(tuple(es[i] for i in p))))
    if not terms:
        return FieldExpr.zero(alg)
    return normalize(Sum(tuple(terms)), alg)
