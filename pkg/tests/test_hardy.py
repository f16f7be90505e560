import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from gammakit.classifiers import Budget, contraction_verdict, is_gamma_coisometry, is_gamma_isometry, random_battery
from gammakit.fixtures import commuting_unitaries
from gammakit.hardy import (
    MatrixSymbol,
    ModelTuple,
    StructuredTuple,
    SymbolTuple,
    admissible_conjugated,
    admissible_diagonal,
    apply_poly,
    build_pure_isometry,
    check_symbol_conditions,
    fundamental_invariant,
    fundamental_invariant_section,
    make_direct_sum,
    symbol_identity_defect,
    symbol_mul,
    symbol_sup_norm,
    truncate,
    truncate_symbol,
    wold_decompose,
    wold_section,
)
from gammakit.operators import MatrixTuple, dagger, joint_spectrum, match_multisets, symmetrize_tuple
from gammakit.polynomials import MultiPoly
from gammakit.verdict import GammaError

SMALL = Budget(max_degree=3, random_polys=12)
J = np.array([[0, 1], [0, 0]], dtype=complex)
z1 = MatrixSymbol.shift(1)


def test_symbol_products():
    rng = np.random.default_rng(0)
    A, B, C, D = (rng.normal(size=(2, 2)) for _ in range(4))
    Phi = MatrixSymbol(np.stack([A, B]))
    assert (Phi * MatrixSymbol.identity(2)).allclose(Phi)
    prod = symbol_mul(Phi, MatrixSymbol(np.stack([C, D])))
    assert prod.allclose(MatrixSymbol(np.stack([A @ C, A @ D + B @ C, B @ D])))
    assert (z1 * z1).allclose(MatrixSymbol(np.array([[[0]], [[0]], [[1]]])))
    with pytest.raises(GammaError):
        symbol_mul(Phi, MatrixSymbol.identity(3))


def test_trailing_zeros_trimmed():
    S = MatrixSymbol(np.stack([np.eye(2), np.zeros((2, 2)), np.zeros((2, 2))]))
    assert S.degree == 0


def test_symbol_sup_examples():
    assert symbol_sup_norm(MatrixSymbol.identity(3)) == pytest.approx(1.0)
    assert symbol_sup_norm(MatrixSymbol(np.array([[[1]], [[1]]]))) == pytest.approx(2.0, abs=1e-12)
    assert symbol_sup_norm(MatrixSymbol.shift(2)) == pytest.approx(1.0)
    ss = symbol_sup_norm(MatrixSymbol(np.array([[[0.3]], [[0.5j]], [[-0.2]]])), full=True)
    assert ss.value <= ss.upper


def test_symbol_json_roundtrip():
    S = MatrixSymbol(np.stack([J, 1j * J.T]))
    back = MatrixSymbol.from_dict(S.to_dict())
    assert back.allclose(S, 0)
    A = admissible_conjugated(3, 2, 1)
    assert np.array_equal(SymbolTuple.from_json(A.to_json()).A, A.A)
    with pytest.raises(GammaError):
        SymbolTuple.from_dict({"d": 3, "A": [{"dim": 2, "entries": [[0, 0]] * 4}]})


def test_symbol_conditions_scalar_n2():
    assert check_symbol_conditions(SymbolTuple.of([[[0.8j]]]), budget=SMALL).holds
    assert check_symbol_conditions(SymbolTuple.of([[[1.0]]]), budget=SMALL).holds
    v = check_symbol_conditions(SymbolTuple.of([[[1.5]]]), budget=SMALL)
    assert not v.holds and v.certificate["condition"] == "symbol_contraction"


def test_symbol_conditions_diagonal_is_fiberwise():
    good = admissible_diagonal(3, 3, seed=2)
    assert check_symbol_conditions(good, budget=SMALL).holds
    bad = good.A.copy()
    bad[0, 1, 1] = 3.0  # s_1 = 3 is outside Gamma_2 for that fiber
    assert not check_symbol_conditions(SymbolTuple(bad), budget=SMALL).holds


def test_symbol_conditions_name_the_failing_identity():
    v = check_symbol_conditions(SymbolTuple.of([J, np.zeros((2, 2))]), budget=SMALL)
    assert not v.holds
    assert v.certificate["identity"] == "[A_1, A_1*] = [A_2, A_2*]"
    # A_1 = A_2 = J satisfies both commutator identities
    v = check_symbol_conditions(SymbolTuple.of([J, J]), budget=SMALL)
    assert v.diagnostics["checks"]["commutators"] == 0


def test_build_examples():
    m = build_pure_isometry(SymbolTuple(np.zeros((2, 2, 2))), budget=SMALL)
    assert all(not S.coeffs.any() for S in m.symbols)
    m = build_pure_isometry(SymbolTuple.of([[[1.0]]]), budget=SMALL)
    assert m.symbols[0].allclose(MatrixSymbol(np.array([[[1]], [[1]]])))
    A = admissible_diagonal(3, 3, seed=5)
    m = build_pure_isometry(A, budget=SMALL)
    for k in range(3):
        scalar = build_pure_isometry(SymbolTuple(A.A[:, k:k + 1, k:k + 1]), check=False)
        for S, s in zip(m.symbols, scalar.symbols):
            assert np.allclose(S.coeffs[:, k, k], s.coeffs[:, 0, 0])
    with pytest.raises(GammaError):
        build_pure_isometry(SymbolTuple.of([[[1.5]]]), budget=SMALL)


@settings(max_examples=15)
@given(st.integers(2, 4), st.integers(1, 4), st.integers(0, 2**31))
def test_built_models_satisfy_identities_exactly(n, d, seed):
    A = admissible_conjugated(n, d, seed)
    m = build_pure_isometry(A, check=False)
    assert symbol_identity_defect(m) == 0.0
    inv = fundamental_invariant(m, N=2)
    for i in range(1, n):
        assert np.array_equal(inv[i - 1], dagger(A.A[n - i - 1]))
    sec = fundamental_invariant_section(m, 2)
    assert max(np.abs(sec[i - 1] - dagger(A.A[n - i - 1])).max() for i in range(1, n)) <= 1e-14


def test_model_isometry_and_coisometry():
    m = build_pure_isometry(admissible_conjugated(3, 2, 7), budget=SMALL)
    assert is_gamma_isometry(m, budget=SMALL).holds
    assert is_gamma_coisometry(m.adjoint(), budget=SMALL).holds
    assert not is_gamma_isometry(m.adjoint(), budget=SMALL).holds


def test_apply_poly_examples():
    m = ModelTuple(admissible_conjugated(3, 2, 1))
    assert apply_poly(m, MultiPoly.variable(3, 3)).allclose(MatrixSymbol.shift(2))
    assert apply_poly(m, MultiPoly.variable(1, 3) * MultiPoly.variable(3, 3)).allclose(
        m.symbols[0] * MatrixSymbol.shift(2))
    with pytest.raises(GammaError):
        apply_poly(m, MultiPoly.variable(1, 2))


def _section_norm(Phi: MatrixSymbol, N: int) -> float:
    M = sp.csr_matrix(truncate_symbol(Phi, N))
    return float(sla.svds(M, k=1, return_singular_vectors=False, tol=1e-14)[0])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_section_norms_converge_to_symbol_norm(seed):
    # finite sections of an analytic Toeplitz operator approach ||Phi||_inf from below,
    # with error ~ c / N^2; one Richardson step removes the leading term
    m = ModelTuple(admissible_conjugated(3, 2, seed))
    q = random_battery(3, 3, 1, seed)[0][1]
    Phi = apply_poly(m, q)
    sup = symbol_sup_norm(Phi)
    small = [np.linalg.norm(truncate_symbol(Phi, N), 2) for N in (5, 10, 20)]
    assert small[0] <= small[1] + 1e-12 <= small[2] + 2e-12 <= sup + 3e-12
    a, b = _section_norm(Phi, 400), _section_norm(Phi, 800)
    assert b <= sup + 1e-12
    assert abs((4 * b - a) / 3 - sup) <= 1e-6


def test_truncate_examples():
    m = ModelTuple(SymbolTuple.of([[[1.0]]]))
    T = truncate(m, 2)
    assert np.allclose(T.mats[0], np.tril(np.ones((3, 3))) - np.tril(np.ones((3, 3)), -2))
    Z = truncate(ModelTuple(admissible_conjugated(3, 2, 0)), 4).mats[-1]
    assert not np.linalg.matrix_power(Z, 5).any()
    P0 = np.zeros((10, 10))
    P0[:2, :2] = np.eye(2)
    assert np.allclose(np.eye(10) - Z @ Z.conj().T, P0)
    with pytest.raises(GammaError):
        truncate(m, 0)


def test_section_multiplies_like_the_symbol():
    m = ModelTuple(admissible_conjugated(3, 2, 4))
    T = truncate(m, 5)
    q = random_battery(3, 3, 1, 4)[0][1]
    from gammakit.operators import poly_of_tuple
    assert np.allclose(poly_of_tuple(q, T), truncate_symbol(apply_poly(m, q), 5))


def test_fundamental_invariant_examples():
    m = ModelTuple(SymbolTuple(np.zeros((2, 1, 1))))
    assert all(not M.any() for M in fundamental_invariant(m))
    a = 0.3 + 0.4j
    inv = fundamental_invariant(ModelTuple(SymbolTuple.of([[[a]]])))
    assert inv[0][0, 0] == np.conj(a)


def test_model_sections_are_contractions():
    m = ModelTuple(admissible_diagonal(3, 2, 3))
    assert contraction_verdict(truncate(m, 3), SMALL).holds


def test_wold_examples():
    m = build_pure_isometry(admissible_conjugated(3, 2, 11), check=False)
    U = symmetrize_tuple(commuting_unitaries(3, 3, seed=12))
    u, p = wold_decompose(StructuredTuple(None, m))
    assert u is None and p.d == 2
    u, p = wold_decompose(StructuredTuple(U, None))
    assert p is None and match_multisets(np.array(joint_spectrum(u)), np.array(joint_spectrum(U))) <= 1e-8
    u, p = wold_decompose(make_direct_sum(U, m))
    assert match_multisets(np.array(joint_spectrum(u)), np.array(joint_spectrum(U))) <= 1e-8
    from gammakit.blh import unitary_equiv
    assert unitary_equiv(p.A, m.A).holds


def test_wold_plain_tuples():
    U = symmetrize_tuple(commuting_unitaries(2, 4, seed=1))
    whole, none = wold_decompose(U)
    assert whole is U and none is None
    with pytest.raises(GammaError):
        wold_decompose(MatrixTuple.of([np.zeros((2, 2)), 0.5 * np.eye(2)]))
    with pytest.raises(GammaError):
        wold_section(MatrixTuple.of([np.zeros((3, 3)), np.diag([1, 1], -1)]), N=1)
