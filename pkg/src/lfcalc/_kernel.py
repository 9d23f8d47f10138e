"""Normal-ordering and lambda-bracket kernel.

Everything here works on plain data so the module can be compiled by Cython
unchanged:

* a *factor code* packs a generator index and a derivative order as
  ``(g << 8) | (255 - d)``; sorting codes ascending gives the canonical order
  (generator position first, then descending derivative order), and
  ``code - k`` is the k-th derivative of ``code``;
* a *word* is a tuple of factor codes read as the right-nested normal product
  ``:f1 :f2 :f3 ...:::``; ``()`` is the vacuum;
* an *expression* is a dict ``word -> coefficient``;
* a *poly* is a dict ``j -> expression`` holding the coefficient of
  ``lambda**j`` (so ``a_(j)b = j! * poly[j]``).

Memoised results are shared, so callers must never mutate a returned dict.
"""
import os
from fractions import Fraction
from math import comb, factorial

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction

ONE = Q(1)
DMAX = 255


def code_of(g, d=0):
    if not 0 <= d <= DMAX:
        raise ValueError("derivative order out of range")
    return (g << 8) | (DMAX - d)


def gen_of(c):
    return c >> 8


def dorder_of(c):
    return DMAX - (c & DMAX)


class UndefinedBracket(KeyError):
    pass


class GuardError(RuntimeError):
    pass


class CycleError(RuntimeError):
    pass


def addto(acc, expr, coef):
    """acc += coef * expr (in place)."""
    for w, v in expr.items():
        x = acc.get(w)
        if x is None:
            acc[w] = v * coef
        else:
            x = x + v * coef
            if x:
                acc[w] = x
            else:
                del acc[w]


def addto1(acc, expr):
    for w, v in expr.items():
        x = acc.get(w)
        if x is None:
            acc[w] = v
        else:
            x = x + v
            if x:
                acc[w] = x
            else:
                del acc[w]


def poly_addto(acc, j, expr, coef):
    if not expr:
        return
    tgt = acc.get(j)
    if tgt is None:
        tgt = acc[j] = {}
    addto(tgt, expr, coef)
    if not tgt:
        del acc[j]


def scale(expr, coef):
    return {w: v * coef for w, v in expr.items()}


def _cache_limit():
    raw = os.environ.get("LF_CACHE_BYTES")
    if not raw:
        return None
    try:
        return max(1, int(raw) // 512)
    except ValueError:
        return None


class Kernel:
    """Normal-ordering engine for one algebra.

    ``parity`` and ``weight`` are per generator index.  ``raw_table`` maps an
    ordered generator pair ``(g, h)`` to ``{j: tree}`` (lambda-power form) where
    trees use the tuple syntax understood by :meth:`eval_tree`.
    """

    def __init__(self, parity, weight, raw_table, implicit_zero=False, skew_route=True):
        self.par = [1 if p else 0 for p in parity]
        self.weight = list(weight)
        self.ngen = len(self.par)
        self.raw = dict(raw_table)
        self.implicit_zero = implicit_zero
        self.skew_route = skew_route
        self.rewrites = {}
        self.limit = _cache_limit()
        self._gb = {}
        self._busy = set()
        self._ins = {}
        self._der = {}
        self._prod = {}
        self._bra = {}
        self._fb = {}
        self._wm = {}
        mask = [0] * self.ngen
        for (g, h), poly in self.raw.items():
            if poly:
                mask[g] |= 1 << h
                mask[h] |= 1 << g
        if not implicit_zero:
            for g in range(self.ngen):
                for h in range(self.ngen):
                    if (g, h) not in self.raw and (h, g) not in self.raw:
                        mask[g] |= 1 << h
        self.mask = mask
        self.has_weights = all(w is not None for w in self.weight)

    # -- bookkeeping -----------------------------------------------------
    def clear(self):
        self._ins.clear()
        self._der.clear()
        self._prod.clear()
        self._bra.clear()
        self._fb.clear()

    def _store(self, cache, key, val):
        cache[key] = val
        lim = self.limit
        if lim is not None and len(cache) > lim:
            self.clear()

    def cache_sizes(self):
        return {
            "insert": len(self._ins),
            "deriv": len(self._der),
            "product": len(self._prod),
            "bracket": len(self._bra),
        }

    def set_rewrite(self, ca, cb, expr):
        """Orient ``:ca cb: -> expr`` (ca, cb canonical and adjacent)."""
        self.rewrites[(ca, cb)] = expr
        self.clear()

    def word_parity(self, w):
        par = self.par
        s = 0
        for c in w:
            s += par[c >> 8]
        return s & 1

    def word_weight(self, w):
        wt = self.weight
        s = 0
        for c in w:
            s += wt[c >> 8] + (DMAX - (c & DMAX))
        return s

    def _masks(self, w):
        r = self._wm.get(w)
        if r is None:
            reach = 0
            present = 0
            mask = self.mask
            for c in w:
                g = c >> 8
                reach |= mask[g]
                present |= 1 << g
            r = (reach, present)
            self._wm[w] = r
        return r

    def interacts(self, A, B):
        return bool(self._masks(A)[0] & self._masks(B)[1])

    # -- generator brackets ----------------------------------------------
    def gen_bracket(self, g, h):
        key = (g, h)
        r = self._gb.get(key)
        if r is not None:
            return r
        if key in self._busy:
            raise CycleError(f"bracket table refers to itself at {key}")
        self._busy.add(key)
        try:
            if key in self.raw:
                r = {}
                for j, tree in self.raw[key].items():
                    poly_addto(r, j, self.eval_tree(tree), ONE)
            elif (h, g) in self.raw:
                p = -1 if (self.par[g] and self.par[h]) else 1
                r = self.skew(self.gen_bracket(h, g), p)
            elif self.implicit_zero:
                r = {}
            else:
                raise UndefinedBracket(key)
        finally:
            self._busy.discard(key)
        self._gb[key] = r
        return r

    def fac_bra(self, ca, cb):
        """[d^k a _lambda d^l b] = (-lambda)^k (lambda + d)^l [a_lambda b]."""
        key = (ca, cb)
        r = self._fb.get(key)
        if r is not None:
            return r
        g, d = ca >> 8, DMAX - (ca & DMAX)
        h, e = cb >> 8, DMAX - (cb & DMAX)
        P = self.gen_bracket(g, h)
        r = {}
        if P:
            sign = -1 if d & 1 else 1
            for j, x in P.items():
                dx = x
                for k in range(e + 1):
                    if k:
                        dx = self.deriv_e(dx)
                        if not dx:
                            break
                    poly_addto(r, j + d + e - k, dx, comb(e, k) * sign)
        self._fb[key] = r
        return r

    # -- derivatives -----------------------------------------------------
    def deriv(self, w):
        r = self._der.get(w)
        if r is not None:
            return r
        if not w:
            r = {}
        else:
            a = w[0]
            rest = w[1:]
            if (a & DMAX) == 0:
                raise GuardError("derivative order overflow")
            r = dict(self.insert(a - 1, rest))
            for dw, dv in self.deriv(rest).items():
                addto(r, self.insert(a, dw), dv)
        self._store(self._der, w, r)
        return r

    def deriv_e(self, expr):
        r = {}
        for w, v in expr.items():
            if w:
                addto(r, self.deriv(w), v)
        return r

    def deriv_e_k(self, expr, k):
        for _ in range(k):
            if not expr:
                break
            expr = self.deriv_e(expr)
        return expr

    def qc_term(self, P):
        """Integral of [a_lambda b] from -d to 0, i.e. :ab: - p:ba:."""
        r = {}
        for j, x in P.items():
            dx = self.deriv_e_k(x, j + 1)
            if dx:
                addto(r, dx, Q(-1 if j & 1 else 1, j + 1))
        return r

    # -- normal products -------------------------------------------------
    def insert(self, c, w):
        """Normal form of :c w: for a factor code c and a canonical word w."""
        key = (c, w)
        r = self._ins.get(key)
        if r is not None:
            return r
        if not w:
            r = {(c,): ONE}
        else:
            m = w[0]
            par = self.par
            if c < m or (c == m and not par[c >> 8]):
                rw = self.rewrites.get((c, m)) if self.rewrites else None
                if rw is None:
                    r = {(c,) + w: ONE}
                else:
                    r = self._rewrite(c, m, w[1:], rw)
            elif c == m:
                # odd square: :f:fC:: = 1/2 :(:ff: - p:ff:) C:
                rest = w[1:]
                r = {}
                S = self.qc_term(self.fac_bra(c, c))
                half = Q(1, 2)
                for sw, sv in S.items():
                    addto(r, self.product(sw, rest), sv * half)
            else:
                rest = w[1:]
                p = -1 if (par[c >> 8] and par[m >> 8]) else 1
                r = {}
                for iw, iv in self.insert(c, rest).items():
                    addto(r, self.insert(m, iw), iv * p)
                if self.interacts((c,), (m,)):
                    S = self.qc_term(self.fac_bra(c, m))
                    for sw, sv in S.items():
                        addto(r, self.product(sw, rest), sv)
        self._store(self._ins, key, r)
        return r

    def _rewrite(self, c, m, C, R):
        # :c:m C:: = ::c m: C: - sum_j :(d^(j+1) c)(m_(j) C): - p sum_j :(d^(j+1) m)(c_(j) C):
        r = {}
        for rw, rv in R.items():
            addto(r, self.product(rw, C), rv)
        if C:
            for j, z in self.bra((m,), C).items():
                addto(r, self.insert_e(c - (j + 1), z), Q(-1, j + 1))
            p = -1 if (self.par[c >> 8] and self.par[m >> 8]) else 1
            for j, y in self.bra((c,), C).items():
                addto(r, self.insert_e(m - (j + 1), y), Q(-p, j + 1))
        return r

    def insert_e(self, c, expr):
        r = {}
        for w, v in expr.items():
            addto(r, self.insert(c, w), v)
        return r

    def product(self, A, B):
        """Normal form of :A B: for canonical words A, B."""
        if not A:
            return {B: ONE}
        if not B:
            return {A: ONE}
        key = (A, B)
        r = self._prod.get(key)
        if r is not None:
            return r
        a = A[0]
        if len(A) == 1:
            r = self.insert(a, B)
        else:
            Ap = A[1:]
            r = {}
            for w, v in self.product(Ap, B).items():
                addto(r, self.insert(a, w), v)
            if self.interacts(Ap, B):
                for j, z in self.bra(Ap, B).items():
                    addto(r, self.insert_e(a - (j + 1), z), Q(1, j + 1))
            if self.interacts((a,), B):
                p = -1 if (self.par[a >> 8] and self.word_parity(Ap)) else 1
                for j, y in self.bra((a,), B).items():
                    D = self.deriv_e_k({Ap: ONE}, j + 1)
                    if D:
                        addto(r, self.product_ee(D, y), Q(p, j + 1))
        self._store(self._prod, key, r)
        return r

    def product_e(self, expr, B):
        r = {}
        for w, v in expr.items():
            addto(r, self.product(w, B), v)
        return r

    def product_ee(self, X, Y):
        r = {}
        for xw, xv in X.items():
            for yw, yv in Y.items():
                addto(r, self.product(xw, yw), xv * yv)
        return r

    # -- lambda brackets -------------------------------------------------
    def skew(self, P, p):
        """[b_lambda a] from P = [a_lambda b]: -p * sum_j (-lambda - d)^j P_j."""
        r = {}
        for j, x in P.items():
            dx = x
            sj = -p if j & 1 else p
            for k in range(j + 1):
                if k:
                    dx = self.deriv_e(dx)
                    if not dx:
                        break
                poly_addto(r, j - k, dx, -sj * comb(j, k))
        return r

    def bra(self, A, B):
        """[A_lambda B] for canonical words, as a poly in lambda-power form."""
        if not A or not B:
            return {}
        key = (A, B)
        r = self._bra.get(key)
        if r is not None:
            return r
        if not self.interacts(A, B):
            r = {}
        elif len(A) == 1:
            if len(B) == 1:
                r = self.fac_bra(A[0], B[0])
            else:
                r = self._left_wick(A[0], B)
        elif len(B) == 1 and self.skew_route:
            p = -1 if (self.word_parity(A) and self.word_parity(B)) else 1
            r = self.skew(self.bra(B, A), p)
        else:
            r = self._right_wick(A, B)
        if r and self.has_weights:
            bound = 2 * (self.word_weight(A) + self.word_weight(B))
            if max(r) > bound:
                raise GuardError(
                    f"lambda-degree {max(r)} exceeds bound {bound} in bracket of {A} with {B}"
                )
        self._store(self._bra, key, r)
        return r

    def _left_wick(self, a, B):
        # [a_l :b B':] = :[a_l b] B': + p :b [a_l B']: + int_0^l [[a_l b]_m B'] dm
        b1 = B[0]
        Bp = B[1:]
        r = {}
        for j, x in self.fac_bra(a, b1).items():
            poly_addto(r, j, self.product_e(x, Bp), ONE)
            for xw, xv in x.items():
                for k, y in self.bra(xw, Bp).items():
                    poly_addto(r, j + k + 1, y, xv / (k + 1))
        if self.interacts((a,), Bp):
            p = -1 if (self.par[a >> 8] and self.par[b1 >> 8]) else 1
            for j, z in self.bra((a,), Bp).items():
                poly_addto(r, j, self.insert_e(b1, z), p)
        return r

    def _right_wick(self, A, B):
        # [:a A':_l B] = :(e^{d d_l} a)[A'_l B]: + p :(e^{d d_l} A')[a_l B]:
        #               + p int_0^l [A'_m [a_{l-m} B]] dm
        a1 = A[0]
        Ap = A[1:]
        p = -1 if (self.par[a1 >> 8] and self.word_parity(Ap)) else 1
        r = {}
        if self.interacts(Ap, B):
            for j, z in self.bra(Ap, B).items():
                for k in range(j + 1):
                    poly_addto(r, j - k, self.insert_e(a1 - k, z), comb(j, k))
        if self.interacts((a1,), B):
            dA = {Ap: ONE}
            derivs = [dA]
            for j, q in self.bra((a1,), B).items():
                while len(derivs) <= j:
                    derivs.append(self.deriv_e(derivs[-1]))
                for k in range(j + 1):
                    if derivs[k]:
                        poly_addto(r, j - k, self.product_ee(derivs[k], q), p * comb(j, k))
                for qw, qv in q.items():
                    for k, w in self.bra(Ap, qw).items():
                        cf = Q(factorial(j) * factorial(k), factorial(j + k + 1))
                        poly_addto(r, j + k + 1, w, qv * cf * p)
        return r

    def bra_ee(self, X, Y):
        r = {}
        for xw, xv in X.items():
            for yw, yv in Y.items():
                cf = xv * yv
                for j, z in self.bra(xw, yw).items():
                    poly_addto(r, j, z, cf)
        return r

    # -- raw trees -------------------------------------------------------
    def eval_tree(self, t):
        """Evaluate a raw tree.

        ``("1",)`` vacuum, ``("c", q)`` constant, ``("g", idx)`` generator,
        ``("d", n, t)`` n-th derivative, ``("p", t1, t2)`` normal product,
        ``("s", [(coef, t), ...])`` linear combination.
        """
        tag = t[0]
        if tag == "g":
            return {(code_of(t[1]),): ONE}
        if tag == "1":
            return {(): ONE}
        if tag == "c":
            return {(): t[1]} if t[1] else {}
        if tag == "d":
            return self.deriv_e_k(self.eval_tree(t[2]), t[1])
        if tag == "p":
            return self.product_ee(self.eval_tree(t[1]), self.eval_tree(t[2]))
        if tag == "s":
            r = {}
            for cf, sub in t[1]:
                addto(r, self.eval_tree(sub), cf)
            return r
        raise ValueError(f"bad tree tag {tag!r}")
