"""Small, fully explicit tuples used in tests, examples and the CLI."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .operators import MatrixTuple, symmetrize_tuple


def kv_triple() -> MatrixTuple:
    """Three commuting contractions on C^5 whose symmetrization is not a Gamma_3-contraction.

    H = C e0 + C^3 + C g.  T_j sends e0 to f_j and f_k to B[j, k] g, where B
    is the orthogonal matrix (2I - J)/sqrt(3) with J the all-ones matrix.
    B is symmetric, so the T_j commute; every T_j is a contraction, and
    p(T) e0 = 3 sqrt(3) g for p = x1^2 - 4 x2 evaluated at s(T), exceeding
    sup_{Gamma_3} |p| = 5.
    """
    B = (2 * np.eye(3) - np.ones((3, 3))) / np.sqrt(3)
    T = np.zeros((3, 5, 5), dtype=np.complex128)
    for j in range(3):
        T[j, 1 + j, 0] = 1.0
        T[j, 4, 1:4] = B[j]
    return MatrixTuple(T)


def kv_tuple() -> MatrixTuple:
    """Symmetrization of :func:`kv_triple`."""
    return symmetrize_tuple(kv_triple())


def commuting_unitaries(n: int, dim: int, seed: int = 0, repeats: int = 0) -> MatrixTuple:
    """n commuting unitaries diagonal in a Haar-random basis.

    ``repeats`` forces that many repeated joint eigenvalues.
    """
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0, 2 * np.pi, size=(dim, n))
    for r in range(min(repeats, dim - 1)):
        ang[r + 1] = ang[0]
    Q = unitary_group.rvs(dim, random_state=rng) if dim > 1 else np.eye(1)
    U = np.stack([Q @ np.diag(np.exp(1j * ang[:, k])) @ Q.conj().T for k in range(n)])
    return MatrixTuple(U)
