import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from gammakit.blh import (
    AnalyticityError,
    InnerSymbol,
    default_quadrature,
    innerness_defect,
    intertwine_solve,
    invariant_subspace_verdict,
    trace_gram,
    unitary_equiv,
)
from gammakit.classifiers import Budget
from gammakit.hardy import (
    MatrixSymbol,
    ModelTuple,
    SymbolTuple,
    admissible_conjugated,
    admissible_diagonal,
    fundamental_invariant,
)
from gammakit.verdict import GammaError

SMALL = Budget(max_degree=3, random_polys=12)


def non_invariant_fixture():
    """n = 2, d = 2: Phi = A(1 + z) with A the swap/2; Theta = diag(z, 1)."""
    A = np.array([[0, 0.5], [0.5, 0]])
    Theta = InnerSymbol(MatrixSymbol(np.stack([np.diag([0, 1]), np.diag([1, 0])])))
    return ModelTuple(SymbolTuple.of([A])), Theta


def test_innerness_examples():
    assert innerness_defect(InnerSymbol.shift(3)) == pytest.approx(0, abs=1e-15)
    W = unitary_group.rvs(3, random_state=0)
    assert innerness_defect(InnerSymbol.constant(W)) <= 1e-14
    assert innerness_defect(InnerSymbol.blaschke(0.4 - 0.3j, 2)) <= 1e-14
    assert innerness_defect(InnerSymbol.constant(2 * np.eye(2))) == pytest.approx(3.0)


def test_inner_json_roundtrip():
    B = InnerSymbol.blaschke(0.5j, 2)
    back = InnerSymbol.from_dict(B.to_dict())
    z = np.exp(1j * np.linspace(0, 6, 7))
    assert np.allclose(back(z), B(z))
    assert B.to_dict()["e_in"] == 2


def test_quadrature_default_is_power_of_two():
    assert default_quadrature(1, 1) == 16
    assert default_quadrature(3) == 32


def test_intertwine_examples():
    rng = np.random.default_rng(0)
    Phi = MatrixSymbol(rng.normal(size=(2, 3, 3)) + 1j * rng.normal(size=(2, 3, 3)))
    Psi, info = intertwine_solve(Phi, InnerSymbol.shift(3))
    assert Psi.allclose(Phi, 1e-12) and info["residual"] <= 1e-12
    W = unitary_group.rvs(3, random_state=1)
    Psi, _ = intertwine_solve(Phi, InnerSymbol.constant(W))
    assert Psi.allclose(MatrixSymbol(W.conj().T @ Phi.coeffs @ W), 1e-12)
    D = MatrixSymbol.constant(np.diag([1.0, 2.0]))
    Psi, _ = intertwine_solve(D, InnerSymbol(MatrixSymbol(np.stack([np.diag([0, 1]), np.diag([1, 0])]))))
    assert Psi.allclose(D, 1e-12)


def test_intertwine_reports_negative_coefficient():
    m, Theta = non_invariant_fixture()
    with pytest.raises(AnalyticityError) as exc:
        intertwine_solve(m.symbols[0], Theta)
    assert exc.value.negative_norm == pytest.approx(0.5)
    assert exc.value.index == -1


def test_intertwine_singular_theta():
    with pytest.raises(GammaError):
        intertwine_solve(MatrixSymbol.identity(2), InnerSymbol(MatrixSymbol(np.stack([np.diag([1, 0]), np.diag([1, 0])]))))


def test_invariant_subspace_examples():
    m = ModelTuple(admissible_conjugated(3, 2, 3))
    v = invariant_subspace_verdict(m, InnerSymbol.shift(2), budget=SMALL)
    assert v.holds and max(v.diagnostics["residuals"]) <= 1e-8
    assert np.allclose(SymbolTuple.from_dict(v.diagnostics["B"]).A, m.A.A)
    W = unitary_group.rvs(2, random_state=4)
    v = invariant_subspace_verdict(m, InnerSymbol.constant(W), budget=SMALL)
    assert v.holds
    assert np.allclose(SymbolTuple.from_dict(v.diagnostics["B"]).A, m.A.conjugate_by(W.conj().T).A)


def test_non_invariant_fixture_fails_with_certificate():
    m, Theta = non_invariant_fixture()
    v = invariant_subspace_verdict(m, Theta, budget=SMALL)
    assert not v.holds
    assert v.certificate["check"] == "analyticity"
    assert v.certificate["negative_coefficient_norm"] >= 1e-3


def test_rectangular_theta_uses_left_inverse():
    A = admissible_diagonal(2, 2, seed=1)
    m = ModelTuple(A)
    # Theta embeds C into C^2 along an eigenvector of the diagonal A_1
    Theta = InnerSymbol(MatrixSymbol(np.array([[[0.0], [1.0]]])))
    v = invariant_subspace_verdict(m, Theta, budget=SMALL)
    assert v.holds and "left inverse" in v.diagnostics["note"]


def test_products_of_inner_symbols():
    T1, T2 = InnerSymbol.blaschke(0.3, 2), InnerSymbol.constant(unitary_group.rvs(2, random_state=2))
    assert innerness_defect(T1 * T2) <= innerness_defect(T1) + innerness_defect(T2) + 1e-14
    m = ModelTuple(admissible_diagonal(2, 2, 6))
    assert invariant_subspace_verdict(m, InnerSymbol.shift(2) * InnerSymbol.shift(2), budget=SMALL).holds


def test_trace_gram_counts_words():
    A = np.stack([np.eye(2)])
    G = trace_gram(A, 4)
    assert G.shape == (1 + 2 + 4, 1 + 2 + 4)
    assert np.allclose(G, 2)


def test_unitary_equiv_examples():
    A = admissible_conjugated(3, 3, 0)
    V = unitary_group.rvs(3, random_state=5)
    v = unitary_equiv(A, A.conjugate_by(V))
    assert v.holds and v.diagnostics["witness_residual"] <= 1e-8
    W = v.diagnostics["witness"]
    assert np.allclose(W @ A.A @ W.conj().T, A.conjugate_by(V).A)
    P = A.A.copy()
    P[0, 0, 1] += 1e-2
    v = unitary_equiv(A, SymbolTuple(P))
    assert not v.holds and v.certificate["status"] == "trace-mismatch"
    v = unitary_equiv(A, admissible_conjugated(3, 2, 0))
    assert not v.holds and v.certificate["status"] == "shape-mismatch"


def test_unitary_equiv_reports_word_length():
    A = admissible_conjugated(2, 1, 0)
    assert unitary_equiv(A, A).diagnostics["word_len"] == 2
    A = admissible_conjugated(2, 3, 0)
    assert unitary_equiv(A, A).diagnostics["word_len"] == 8


def test_unitary_equiv_trace_pass_without_witness():
    # A and its transpose share all traces of words of length <= 2 but are not equivalent
    rng = np.random.default_rng(3)
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    Y = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    A, B = SymbolTuple(np.stack([X, Y])), SymbolTuple(np.stack([X.T, Y.T]))
    v = unitary_equiv(A, B, word_len=2)
    assert not v.holds and v.certificate["status"] == "traces-pass, witness-unresolved"
    assert not unitary_equiv(A, B).holds


@settings(max_examples=10)
@given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 2**31))
def test_equivalence_via_fundamental_invariant_agrees(n, d, seed):
    A = admissible_conjugated(n, d, seed)
    V = unitary_group.rvs(d, random_state=seed % 1000) if d > 1 else np.eye(1) * 1j
    B = A.conjugate_by(V)
    rec = lambda S: SymbolTuple(np.stack(fundamental_invariant(ModelTuple(S)))[::-1].conj().transpose(0, 2, 1))
    assert unitary_equiv(A, B).holds == unitary_equiv(rec(A), rec(B)).holds
