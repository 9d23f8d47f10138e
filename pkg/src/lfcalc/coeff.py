"""Exact arithmetic in the multi-quadratic field Q(i, sqrt2, sqrt15).

A :class:`Scalar` is stored sparsely over the basis

    1, i, sqrt2, i*sqrt2, sqrt15, i*sqrt15, sqrt30, i*sqrt30

Basis element ``k`` is ``i**(k & 1) * sqrt2**((k >> 1) & 1) * sqrt15**(k >> 2)``,
so the product of basis elements ``j`` and ``k`` is basis element ``j ^ k``
times a rational factor that depends only on the shared bits ``j & k``.

Rationals are ``gmpy2.mpq`` when gmpy2 is importable and
``fractions.Fraction`` otherwise; both are arbitrary precision.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

try:  # pragma: no cover - depends on environment
    from gmpy2 import mpq as Q

    _QTYPES = (type(Q(1)), Fraction, int)
except ImportError:  # pragma: no cover
    Q = Fraction
    _QTYPES = (Fraction, int)

__all__ = ["Q", "Scalar", "BASIS", "ZeroDivision", "I", "SQRT2", "SQRT15", "ONE", "ZERO", "as_q"]

BASIS_NAMES = ("", "i", "sqrt2", "i*sqrt2", "sqrt15", "i*sqrt15", "sqrt30", "i*sqrt30")

# factor picked up when multiplying two basis elements sharing bits s
_SHARED = tuple(
    (-1 if s & 1 else 1) * (2 if s & 2 else 1) * (15 if s & 4 else 1) for s in range(8)
)


class ZeroDivision(ZeroDivisionError):
    """Raised when inverting the zero Scalar."""


def as_q(x):
    """Coerce an int/Fraction/mpq to the rational type ``Q``."""
    if isinstance(x, Scalar):
        return x.to_rational()
    if isinstance(x, float):
        raise TypeError("floating point values are not exact scalars")
    if isinstance(x, Fraction):
        return Q(x.numerator, x.denominator)
    return Q(x)


def _is_rational_like(x):
    return isinstance(x, _QTYPES) or (isinstance(x, Rational) and not isinstance(x, bool))


class Scalar:
    """Immutable element of Q(i, sqrt2, sqrt15)."""

    __slots__ = ("_c", "_h")

    def __init__(self, value=0):
        if isinstance(value, Scalar):
            self._c = value._c
        elif isinstance(value, str):
            self._c = _parse_scalar(value)._c
        else:
            q = as_q(value)
            self._c = ((0, q),) if q else ()
        self._h = None

    @classmethod
    def _raw(cls, comps):
        s = object.__new__(cls)
        s._c = comps
        s._h = None
        return s

    @classmethod
    def from_components(cls, comps):
        """Build from a mapping or length-8 sequence of rational coordinates."""
        if isinstance(comps, dict):
            items = comps.items()
        else:
            items = enumerate(comps)
        out = []
        for k, v in sorted(items):
            if not 0 <= k < 8:
                raise ValueError(f"basis index out of range: {k}")
            q = as_q(v)
            if q:
                out.append((k, q))
        return cls._raw(tuple(out))

    # -- inspection -------------------------------------------------------
    def components(self):
        """Dense list of the eight rational coordinates."""
        dense = [Q(0)] * 8
        for k, q in self._c:
            dense[k] = q
        return dense

    def is_rational(self):
        return not self._c or (len(self._c) == 1 and self._c[0][0] == 0)

    def to_rational(self):
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._c[0][1] if self._c else Q(0)

    def __bool__(self):
        return bool(self._c)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Scalar):
            if not _is_rational_like(other):
                return NotImplemented
            other = Scalar(other)
        if not other._c:
            return self
        if not self._c:
            return other
        acc = dict(self._c)
        for k, q in other._c:
            acc[k] = acc.get(k, 0) + q
        return Scalar._raw(tuple((k, q) for k, q in sorted(acc.items()) if q))

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw(tuple((k, -q) for k, q in self._c))

    def __pos__(self):
        return self

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            if not _is_rational_like(other):
                return NotImplemented
            other = Scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            if not _is_rational_like(other):
                return NotImplemented
            q = as_q(other)
            if not q:
                return ZERO
            return Scalar._raw(tuple((k, v * q) for k, v in self._c))
        a, b = self._c, other._c
        if not a or not b:
            return ZERO
        if len(a) == 1 and len(b) == 1:
            (j, x), (k, y) = a[0], b[0]
            return Scalar._raw(((j ^ k, x * y * _SHARED[j & k]),))
        acc = {}
        for j, x in a:
            for k, y in b:
                idx = j ^ k
                acc[idx] = acc.get(idx, 0) + x * y * _SHARED[j & k]
        return Scalar._raw(tuple((k, q) for k, q in sorted(acc.items()) if q))

    __rmul__ = __mul__

    def conjugate(self, flips):
        """Galois conjugate flipping the signs of the generators in bitmask ``flips``."""
        return Scalar._raw(
            tuple((k, -q if bin(k & flips).count("1") & 1 else q) for k, q in self._c)
        )

    def inverse(self):
        if not self._c:
            raise ZeroDivision("division by zero Scalar")
        if len(self._c) == 1:
            k, q = self._c[0]
            # basis_k * basis_k = _SHARED[k]
            return Scalar._raw(((k, 1 / (q * _SHARED[k])),))
        num = ONE
        for flips in range(1, 8):
            num = num * self.conjugate(flips)
        norm = (self * num).to_rational()
        return num * (1 / norm)

    def __truediv__(self, other):
        if not isinstance(other, Scalar):
            if not _is_rational_like(other):
                return NotImplemented
            q = as_q(other)
            if not q:
                raise ZeroDivision("division by zero Scalar")
            return self * (1 / q)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Scalar(other) * self.inverse()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out, base = ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self._c == other._c
        if _is_rational_like(other):
            return self.is_rational() and self.to_rational() == other
        return NotImplemented

    def __hash__(self):
        if self._h is None:
            self._h = hash(self.to_rational()) if self.is_rational() else hash(self._c)
        return self._h

    def __repr__(self):
        return f"Scalar({str(self)!r})"

    def __str__(self):
        if not self._c:
            return "0"
        parts = []
        for k, q in self._c:
            name = BASIS_NAMES[k]
            mag = abs(q)
            num = f"{mag.numerator}" if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if not name:
                body = num
            elif mag == 1:
                body = name
            else:
                body = f"{num}*{name}"
            parts.append(("-" if q < 0 else "+", body))
        sign, body = parts[0]
        text = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def is_simple(self):
        """True when the text form is a single signed term (no parentheses needed)."""
        return len(self._c) <= 1

    def __reduce__(self):
        return (Scalar.from_components, ({k: Fraction(int(q.numerator), int(q.denominator)) for k, q in self._c},))


ZERO = Scalar._raw(())
ONE = Scalar._raw(((0, Q(1)),))
I = Scalar._raw(((1, Q(1)),))
SQRT2 = Scalar._raw(((2, Q(1)),))
SQRT15 = Scalar._raw(((4, Q(1)),))
SQRT30 = Scalar._raw(((6, Q(1)),))

BASIS = tuple(Scalar._raw(((k, Q(1)),)) for k in range(8))

_ATOMS = {"i": I, "sqrt2": SQRT2, "sqrt15": SQRT15, "sqrt30": SQRT30}


def _parse_scalar(text):
    """Parse the canonical text form, e.g. ``"-7/2"``, ``"1/2*sqrt2 - i"``."""
    import re

    src = text.replace(" ", "")
    if not src:
        raise ValueError("empty scalar")
    total = ZERO
    for m in re.finditer(r"([+-]?)([^+-]+)", src):
        sign, body = m.groups()
        if m.start() and not sign:
            raise ValueError(f"bad scalar text {text!r}")
        val = ONE
        for piece in body.split("*"):
            if piece in _ATOMS:
                val = val * _ATOMS[piece]
            elif re.fullmatch(r"\d+(/\d+)?", piece):
                n, _, d = piece.partition("/")
                val = val * Q(int(n), int(d or 1))
            else:
                raise ValueError(f"bad scalar text {text!r}")
        total = total + (-val if sign == "-" else val)
    if re.sub(r"([+-]?)([^+-]+)", "", src):
        raise ValueError(f"bad scalar text {text!r}")
    return total
