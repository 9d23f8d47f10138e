import itertools
import json

import numpy as np
import pytest

from lfcalc import dsl, engine, g2
from lfcalc.algebras import bcbg
from lfcalc.coeff import Q, Scalar
from lfcalc.terms import FieldExpr, LambdaPoly


def levi_civita(n):
    eps = np.zeros((n,) * n, dtype=np.int64)
    for p in itertools.permutations(range(n)):
        eps[p] = g2.perm_sign(p)
    return eps


EPS7 = levi_civita(7)


def star_oracle(form: np.ndarray) -> np.ndarray:
    """(*w)_{J} = 1/k! w_{I} eps_{I J} on R^7 with the standard orientation."""
    k = form.ndim
    letters = "abcdefg"
    lhs = letters[:k]
    out = letters[k:]
    total = np.einsum(f"{lhs},{lhs}{out}->{out}", form, EPS7)
    fact = int(np.prod(range(1, k + 1)))
    assert (total % fact == 0).all()
    return total // fact


def test_phi0_components():
    phi = g2.phi0()
    assert phi(1, 2, 3) == 1
    assert phi(2, 5, 7) == -1
    assert phi(1, 2, 4) == 0
    assert phi(2, 1, 3) == -1 and phi(3, 1, 2) == 1
    assert phi(1, 1, 3) == 0
    assert len(phi.items()) == 7


def test_hodge_star_against_levi_civita():
    P = g2.phi0().dense()
    assert (g2.hodge_star(g2.phi0()).dense() == star_oracle(P)).all()
    S = g2.psi0().dense()
    assert (S == -star_oracle(P)).all()
    assert (star_oracle(S) == -P).all()


def test_star_squares_to_identity():
    for form in (g2.phi0(), g2.psi0(), g2.volume(), g2.flat(g2.basis_vector(3))):
        assert g2.hodge_star(g2.hodge_star(form)) == form


def test_golden_files_match_computed_forms():
    assert g2.golden("phi0") == g2.phi0()
    assert g2.golden("psi0") == g2.psi0()
    assert g2.TensorTable.parse(4, g2.psi0().text()) == g2.psi0()


def test_tensor_table_validation():
    with pytest.raises(ValueError):
        g2.TensorTable(3, {(1, 1, 2): 1})
    with pytest.raises(ValueError):
        g2.TensorTable(3, {(1, 2, 9): 1})
    t = g2.TensorTable(2, {(2, 1): 3})
    assert t(1, 2) == -3
    assert g2.TensorTable.from_dense(t.dense()) == t


def test_wedge_and_interior_basics():
    e = [g2.flat(g2.basis_vector(i)) for i in range(1, 8)]
    vol = e[0]
    for f in e[1:]:
        vol = g2.wedge(vol, f)
    assert vol == g2.volume()
    assert g2.wedge(e[0], e[0]).is_zero()
    assert g2.interior(g2.basis_vector(2), g2.wedge(e[0], e[1])) == -e[0]


def test_contraction_suite_passes():
    rep = g2.check_contractions()
    assert rep.ok, [(c.name, c.difference) for c in rep.failures()]
    names = {c.name for c in rep.checks}
    assert {"contraction_42", "contraction_6g", "contraction_phipsi_double",
            "contraction_psipsi_single", "phi_phi_antisym_coords", "metric_from_phi"} <= names


def test_contractions_by_explicit_loops():
    # an independent slow route for two of the identities
    P = g2.phi0().dense()
    assert sum(int(P[i, j, k]) ** 2 for i in range(7) for j in range(7) for k in range(7)) == 42
    for i in range(7):
        for a in range(7):
            v = sum(int(P[i, j, k] * P[a, j, k]) for j in range(7) for k in range(7))
            assert v == (6 if i == a else 0)


def _flip(table, key):
    comps = dict(table.items())
    comps[key] = -comps[key]
    return g2.TensorTable(table.rank, comps)


def test_fault_injection_sign_flip():
    bad = _flip(g2.phi0(), (1, 2, 3))
    rep = g2.check_contractions(phi=bad)
    failed = {c.name for c in rep.failures()}
    assert failed
    # a sign flip keeps the sum of squares, so the full contraction still reads 42
    assert "contraction_42" not in failed
    doc = json.loads(dsl.emit_report(rep))
    assert any(c["status"] == "fail" and c["difference"] for c in doc["checks"])


def test_fault_injection_dropped_component():
    comps = dict(g2.phi0().items())
    del comps[(1, 2, 3)]
    rep = g2.check_contractions(phi=g2.TensorTable(3, comps))
    bad = {c.name: c for c in rep.failures()}
    assert "contraction_42" in bad
    assert bad["contraction_42"].difference


@pytest.mark.parametrize("r,s,want", [(0, 0, 1), (5, 0, 1), (2, 1, 3), (1, 2, 0), (3, 3, 15), (3, -1, 0), (4, 2, 45)])
def test_bessel_coefficients(r, s, want):
    assert g2.bessel_coeff(r, s) == want


def test_bessel_polynomials():
    # y_3(x) = 1 + 6x + 15x^2 + 15x^3
    assert [g2.bessel_coeff(3, s) for s in range(4)] == [1, 6, 15, 15]


def test_e_field_brackets():
    A = bcbg(7)
    one = LambdaPoly.from_lambda_powers(A, {0: FieldExpr.vacuum(A)})
    for i, j in [(1, 1), (1, 2), (4, 4)]:
        pp = engine.bracket(g2.e_field(A, i, 1), g2.e_field(A, j, 1))
        pm = engine.bracket(g2.e_field(A, i, 1), g2.e_field(A, j, -1))
        mm = engine.bracket(g2.e_field(A, i, -1), g2.e_field(A, j, -1))
        assert pp == (one if i == j else LambdaPoly(A))
        assert pm.is_zero()
        assert mm == (one * -1 if i == j else LambdaPoly(A))


def test_embed_form_flat():
    from lfcalc import cdr

    A = bcbg(7)
    assert g2.embed_form_flat(g2.TensorTable(3), 1, A).is_zero()
    with pytest.raises(ValueError):
        g2.embed_form_flat(g2.TensorTable(5, {(1, 2, 3, 4, 5): 1}), 1, A)
    with pytest.raises(ValueError):
        g2.embed_form_flat(g2.phi0(), 0, A)
    for s in (1, -1):
        assert g2.embed_form_flat(g2.phi0(), s, A) == cdr.explicit_phi(s)
    # a 1-form embeds as the field itself (times i for the minus chirality)
    one = g2.flat(g2.basis_vector(2))
    assert g2.embed_form_flat(one, 1, A) == g2.e_field(A, 2, 1)
    from lfcalc.coeff import I

    assert g2.embed_form_flat(one, -1, A) == g2.e_field(A, 2, -1) * I
    assert g2.embed_form_flat(g2.TensorTable(0, {(): 3}), 1, A) == FieldExpr.vacuum(A, Scalar(3))
