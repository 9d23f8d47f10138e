"""Random small expressions over a free bc-beta-gamma algebra."""
from __future__ import annotations

import random

from hypothesis import strategies as st

from lfcalc import engine
from lfcalc.coeff import Q, Scalar
from lfcalc.terms import FieldExpr


def names(alg):
    return [g.name for g in alg.generators]


def random_expr(alg, rng: random.Random, max_factors=3, max_dorder=1, max_terms=2) -> FieldExpr:
    gens = names(alg)
    out = FieldExpr.zero(alg)
    for _ in range(rng.randint(1, max_terms)):
        word = None
        for _ in range(rng.randint(1, max_factors)):
            g = FieldExpr.gen(alg, rng.choice(gens), rng.randint(0, max_dorder))
            word = g if word is None else engine.product(g, word)
        num = rng.randint(-3, 3) or 1
        out = out + word * Scalar(Q(num, rng.randint(1, 3)))
    return out


def exprs(alg, **kw):
    """Hypothesis strategy wrapping :func:`random_expr`."""
    return st.integers(0, 2**32 - 1).map(lambda seed: random_expr(alg, random.Random(seed), **kw))
