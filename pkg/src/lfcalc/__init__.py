"""Exact lambda-bracket calculus for vertex superalgebras.

Typical use::

    from lfcalc import builtin, bracket
    A = builtin("bcbg1")
    print(bracket(A.expr("b1"), A.expr("c1")))
"""
from .coeff import Q, Scalar
from .terms import FieldExpr, GeneratorSpec, LambdaPoly
from .engine import bracket, nproduct, product, susy_D, check_axiom, conformal_weight
from .algebras import AlgebraDef, builtin, verify_realization
from .kernel_impl import COMPILED

__all__ = [
    "Q",
    "Scalar",
    "FieldExpr",
    "GeneratorSpec",
    "LambdaPoly",
    "bracket",
    "nproduct",
    "product",
    "susy_D",
    "check_axiom",
    "conformal_weight",
    "AlgebraDef",
    "builtin",
    "verify_realization",
    "COMPILED",
]
__version__ = "0.1.0"
