"""Generators, normally ordered monomials, field expressions and lambda-polynomials.

Monomials are stored right-nested: the factor list ``[f1, f2, f3]`` stands for
``:f1 :f2 f3::``.  Factor order inside a monomial is canonical (generator
position, then descending derivative order); reordering is done by the
kernel, never by the constructors here.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from math import factorial
from typing import Iterable, Mapping

from . import kernel_impl as _k
from .coeff import BASIS, ONE, Q, Scalar, ZERO, as_q

RESERVED = frozenset({"i", "sqrt2", "sqrt15", "sqrt30", "lambda", "d"})


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    parity: int
    weight: object = None
    sort_key: int = 0

    def __post_init__(self):
        if not self.name.isidentifier() or not self.name.isascii():
            raise ValueError(f"bad generator name {self.name!r}")
        if self.name in RESERVED:
            raise ValueError(f"generator name {self.name!r} is reserved")
        if self.parity not in (0, 1):
            raise ValueError("parity must be 0 (even) or 1 (odd)")
        if self.weight is not None:
            object.__setattr__(self, "weight", as_q(self.weight))

    @property
    def odd(self) -> bool:
        return bool(self.parity)


@dataclass(frozen=True)
class Factor:
    generator: GeneratorSpec
    dorder: int = 0

    def __post_init__(self):
        if self.dorder < 0:
            raise ValueError("dorder must be nonnegative")

    def text(self) -> str:
        n = self.generator.name
        if self.dorder == 0:
            return n
        if self.dorder == 1:
            return f"d({n})"
        return f"d^{self.dorder}({n})"


class Signature:
    """Ordered generator list of one algebra plus its monomial intern table."""

    def __init__(self, generators: Iterable[GeneratorSpec]):
        gens = list(generators)
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique")
        self.generators = tuple(sorted(gens, key=lambda g: g.sort_key))
        keys = [g.sort_key for g in self.generators]
        if len(set(keys)) != len(keys):
            raise ValueError("sort keys must be unique")
        self.index = {g.name: i for i, g in enumerate(self.generators)}
        self._interned = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.generators)

    def __getitem__(self, name) -> GeneratorSpec:
        return self.generators[self.index[name]]

    def code(self, f: Factor) -> int:
        i = self.index.get(f.generator.name)
        if i is None or self.generators[i] != f.generator:
            raise KeyError(f"unknown generator {f.generator.name!r}")
        return _k.code_of(i, f.dorder)

    def factor(self, code: int) -> Factor:
        return Factor(self.generators[_k.gen_of(code)], _k.dorder_of(code))

    def monomial(self, codes) -> "Monomial":
        codes = tuple(codes)
        m = self._interned.get(codes)
        if m is None:
            with self._lock:
                m = self._interned.get(codes)
                if m is None:
                    m = Monomial._make(self, codes)
                    self._interned[codes] = m
        return m

    def interned_count(self) -> int:
        return len(self._interned)


def check_canonical(sig: Signature, codes) -> None:
    for a, b in zip(codes, codes[1:]):
        if a > b:
            raise ValueError("factors are not in canonical order")
        if a == b and sig.generators[_k.gen_of(a)].parity:
            raise ValueError("repeated odd factor: the monomial is zero")


class Monomial:
    """Interned right-nested normal product; compare with ``is`` or ``==``."""

    __slots__ = ("sig", "codes", "_hash", "__weakref__")

    def __new__(cls, sig: Signature, factors: Iterable[Factor]):
        codes = tuple(sig.code(f) for f in factors)
        check_canonical(sig, codes)
        return sig.monomial(codes)

    @classmethod
    def _make(cls, sig, codes):
        m = object.__new__(cls)
        m.sig = sig
        m.codes = codes
        m._hash = hash(codes)
        return m

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if isinstance(other, Monomial):
            return self.sig is other.sig and self.codes == other.codes
        return NotImplemented

    def __reduce__(self):
        return (_reintern, (self.sig, self.codes))

    @property
    def factors(self):
        return tuple(self.sig.factor(c) for c in self.codes)

    @property
    def parity(self) -> int:
        return sum(self.sig.generators[_k.gen_of(c)].parity for c in self.codes) & 1

    @property
    def weight(self):
        total = Q(0)
        for f in self.factors:
            if f.generator.weight is None:
                return None
            total += f.generator.weight + f.dorder
        return total

    def is_vacuum(self) -> bool:
        return not self.codes

    def __len__(self):
        return len(self.codes)

    def text(self) -> str:
        return word_text(self.sig, self.codes)

    def __repr__(self):
        return f"Monomial({self.text()})"


def _reintern(sig, codes):
    return sig.monomial(codes)


def word_text(sig: Signature, codes) -> str:
    if not codes:
        return "1"
    parts = [sig.factor(c).text() for c in codes]
    if len(parts) == 1:
        return parts[0]
    return ":" + " ".join(parts) + ":"


def _coef_prefix(c: Scalar) -> tuple[str, str]:
    """Return (sign, magnitude-text) for a coefficient multiplying a monomial."""
    if c.is_simple():
        s = str(c)
        if s.startswith("-"):
            return "-", s[1:]
        return "+", s
    return "+", f"({c})"


def _join(terms: list[tuple[str, str]]) -> str:
    if not terms:
        return "0"
    out = []
    for i, (sign, body) in enumerate(terms):
        if i == 0:
            out.append(("-" if sign == "-" else "") + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def _term(c: Scalar, mono_text: str | None, lam: str | None = None) -> tuple[str, str]:
    sign, mag = _coef_prefix(c)
    pieces = []
    if mag != "1" or (mono_text is None and lam is None):
        pieces.append(mag)
    if lam:
        pieces.append(lam)
    if mono_text is not None:
        pieces.append(mono_text)
    return sign, "*".join(pieces)


def _sort_key(codes):
    return (len(codes), codes)


class FieldExpr:
    """Finite Scalar-linear combination of monomials of one algebra."""

    __slots__ = ("alg", "_t", "_comp", "_hash")

    def __init__(self, alg, terms: Mapping | None = None):
        self.alg = alg
        t = {}
        if terms:
            for m, c in terms.items():
                codes = m.codes if isinstance(m, Monomial) else tuple(m)
                if isinstance(m, Monomial) and m.sig is not alg.sig:
                    raise ValueError("monomial belongs to a different algebra")
                c = c if isinstance(c, Scalar) else Scalar(c)
                if c:
                    t[codes] = t.get(codes, ZERO) + c
                    if not t[codes]:
                        del t[codes]
        self._t = t
        self._comp = None
        self._hash = None

    @classmethod
    def _from_raw(cls, alg, raw: Mapping):
        """Wrap a kernel expression (coefficients rational or Scalar)."""
        e = object.__new__(cls)
        e.alg = alg
        mk = Scalar._raw
        e._t = {w: (v if type(v) is Scalar else mk(((0, v),))) for w, v in raw.items() if v}
        e._comp = None
        e._hash = None
        return e

    @classmethod
    def zero(cls, alg):
        return cls._from_raw(alg, {})

    @classmethod
    def vacuum(cls, alg, coef=1):
        return cls._from_raw(alg, {(): Scalar(coef)})

    @classmethod
    def gen(cls, alg, name: str, dorder: int = 0):
        i = alg.sig.index.get(name)
        if i is None:
            raise KeyError(f"unknown generator {name!r}")
        return cls._from_raw(alg, {(_k.code_of(i, dorder),): ONE})

    # -- views -----------------------------------------------------------
    @property
    def terms(self) -> dict:
        sig = self.alg.sig
        return {sig.monomial(w): c for w, c in self._t.items()}

    def raw(self) -> dict:
        return self._t

    def components(self) -> dict:
        """Split into rational kernel expressions per field basis element."""
        if self._comp is None:
            comp = {}
            for w, c in self._t.items():
                for k, q in c._c:
                    comp.setdefault(k, {})[w] = q
            self._comp = comp
        return self._comp

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def __len__(self):
        return len(self._t)

    def coefficient(self, mono) -> Scalar:
        codes = mono.codes if isinstance(mono, Monomial) else tuple(mono)
        return self._t.get(codes, ZERO)

    # -- arithmetic ------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, FieldExpr):
            return False
        if other.alg.sig is not self.alg.sig:
            raise ValueError("expressions belong to different algebras")
        return True

    def __add__(self, other):
        if not self._check(other):
            if other == 0:
                return self
            return NotImplemented
        t = dict(self._t)
        for w, c in other._t.items():
            x = t.get(w)
            x = c if x is None else x + c
            if x:
                t[w] = x
            else:
                t.pop(w, None)
        return FieldExpr._from_raw(self.alg, t)

    def __radd__(self, other):
        if other == 0:
            return self
        return NotImplemented

    def __neg__(self):
        return FieldExpr._from_raw(self.alg, {w: -c for w, c in self._t.items()})

    def __sub__(self, other):
        if not self._check(other):
            return NotImplemented
        return self + (-other)

    def __mul__(self, s):
        if isinstance(s, FieldExpr):
            return NotImplemented
        if s == 1:
            return self
        s = s if isinstance(s, Scalar) else Scalar(s)
        if not s:
            return FieldExpr.zero(self.alg)
        return FieldExpr._from_raw(self.alg, {w: c * s for w, c in self._t.items()})

    __rmul__ = __mul__

    def __truediv__(self, s):
        s = s if isinstance(s, Scalar) else Scalar(s)
        return self * s.inverse()

    def __eq__(self, other):
        if isinstance(other, FieldExpr):
            return self.alg.sig is other.alg.sig and self._t == other._t
        if other == 0:
            return not self._t
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    # -- text ------------------------------------------------------------
    def __str__(self):
        sig = self.alg.sig
        parts = []
        for w in sorted(self._t, key=_sort_key):
            parts.append(_term(self._t[w], word_text(sig, w) if w else None))
        return _join(parts)

    def __repr__(self):
        return f"FieldExpr({self})"

    @property
    def parity(self):
        """Common parity of all terms, or None for mixed/zero expressions."""
        ps = {self.alg.sig.monomial(w).parity for w in self._t}
        return ps.pop() if len(ps) == 1 else None


class LambdaPoly:
    """Value of a lambda-bracket, stored by n-products: ``coeffs[j] = a_(j)b``."""

    __slots__ = ("alg", "coeffs")

    def __init__(self, alg, coeffs: Mapping[int, FieldExpr] | None = None):
        self.alg = alg
        self.coeffs = {j: e for j, e in sorted((coeffs or {}).items()) if e}

    @classmethod
    def from_lambda_powers(cls, alg, powers: Mapping[int, FieldExpr]):
        return cls(alg, {j: e * factorial(j) for j, e in powers.items()})

    def nprod(self, j: int) -> FieldExpr:
        return self.coeffs.get(j) or FieldExpr.zero(self.alg)

    def lam(self, j: int) -> FieldExpr:
        """Coefficient of lambda**j (that is a_(j)b / j!)."""
        e = self.coeffs.get(j)
        if e is None:
            return FieldExpr.zero(self.alg)
        return e * Scalar(Q(1, factorial(j)))

    def degree(self) -> int:
        return max(self.coeffs) if self.coeffs else -1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, LambdaPoly):
            return self.alg.sig is other.alg.sig and self.coeffs == other.coeffs
        if other == 0:
            return not self.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.coeffs.items()))

    def __add__(self, other):
        if not isinstance(other, LambdaPoly):
            return NotImplemented
        out = dict(self.coeffs)
        for j, e in other.coeffs.items():
            out[j] = out[j] + e if j in out else e
        return LambdaPoly(self.alg, out)

    def __neg__(self):
        return LambdaPoly(self.alg, {j: -e for j, e in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return LambdaPoly(self.alg, {j: e * s for j, e in self.coeffs.items()})

    __rmul__ = __mul__

    def __str__(self):
        sig = self.alg.sig
        parts = []
        for j in sorted(self.coeffs, reverse=True):
            lam = None if j == 0 else ("lambda" if j == 1 else f"lambda^{j}")
            e = self.lam(j)
            for w in sorted(e._t, key=_sort_key):
                parts.append(_term(e._t[w], word_text(sig, w) if w else None, lam))
        return _join(parts)

    def __repr__(self):
        return f"LambdaPoly({self})"


# -- raw product trees ------------------------------------------------------
@dataclass(frozen=True)
class Gen:
    name: str


@dataclass(frozen=True)
class Deriv:
    arg: object
    n: int = 1


@dataclass(frozen=True)
class Prod:
    """Normal product of the items, right-nested: :a b c: = :a :b c::."""

    items: tuple


@dataclass(frozen=True)
class Sum:
    terms: tuple  # of (Scalar-like, tree)


@dataclass(frozen=True)
class Const:
    value: object


VAC = Const(1)


def to_kernel_tree(sig: Signature, tree):
    """Translate a raw tree into the kernel's tuple syntax."""
    if isinstance(tree, Gen):
        i = sig.index.get(tree.name)
        if i is None:
            raise KeyError(f"unknown generator {tree.name!r}")
        return ("g", i)
    if isinstance(tree, Deriv):
        if tree.n < 0:
            raise ValueError("negative derivative order")
        return ("d", tree.n, to_kernel_tree(sig, tree.arg))
    if isinstance(tree, Prod):
        items = list(tree.items)
        if not items:
            return ("1",)
        out = to_kernel_tree(sig, items[-1])
        for it in reversed(items[:-1]):
            out = ("p", to_kernel_tree(sig, it), out)
        return out
    if isinstance(tree, Sum):
        return ("s", [(_kcoef(c), to_kernel_tree(sig, t)) for c, t in tree.terms])
    if isinstance(tree, Const):
        return ("c", _kcoef(tree.value))
    if isinstance(tree, FieldExpr):
        if tree.alg.sig is not sig:
            raise ValueError("expression belongs to a different algebra")
        return ("s", [(c, _word_tree(w)) for w, c in tree._t.items()])
    raise TypeError(f"not a raw tree: {tree!r}")


def _word_tree(w):
    if not w:
        return ("1",)
    out = None
    for c in reversed(w):
        f = ("d", _k.dorder_of(c), ("g", _k.gen_of(c)))
        out = f if out is None else ("p", f, out)
    return out


def _kcoef(c):
    s = c if isinstance(c, Scalar) else Scalar(c)
    return s.to_rational() if s.is_rational() else s


def normalize(tree, alg) -> FieldExpr:
    """Evaluate a raw product tree to its canonical FieldExpr in ``alg``."""
    ktree = to_kernel_tree(alg.sig, tree)
    return FieldExpr._from_raw(alg, alg.kernel.eval_tree(ktree))


def derive(a: FieldExpr, n: int = 1) -> FieldExpr:
    """n-fold translation operator, applied by the Leibniz rule."""
    comp = a.components()
    kern = a.alg.kernel
    out = {}
    for k, e in comp.items():
        d = kern.deriv_e_k(e, n)
        if d:
            _k.addto(out, d, BASIS[k])
    return FieldExpr._from_raw(a.alg, out)
