"""Finite-dimensional stand-ins for commuting operator tuples."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .polynomials import MultiPoly, evaluate_matrices
from .verdict import ConvergenceError, GammaError, Verdict

NORM_TOL = 1e-9
COMMUTE_RTOL = 1e-8
CLUSTER_TOL = 1e-7


def opnorm(X: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    X = np.asarray(X)
    if X.size == 0:
        return 0.0
    return float(np.linalg.norm(X, 2))


def dagger(X: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(X, -1, -2))


# ---------------------------------------------------------------- types

def _matrix_to_json(M: np.ndarray) -> dict:
    d = M.shape[0]
    return {"dim": d, "entries": [[float(x.real), float(x.imag)] for x in M.ravel()]}


def _matrix_from_json(obj) -> np.ndarray:
    try:
        if isinstance(obj, dict):
            d = int(obj["dim"])
            flat = np.array([complex(re, im) for re, im in obj["entries"]])
            if flat.size != d * d:
                raise GammaError(f"matrix declares dim={d} but has {flat.size} entries")
            return flat.reshape(d, d)
        # nested rows of [re, im] pairs or plain numbers
        arr = np.array(obj, dtype=float)
        if arr.ndim == 3 and arr.shape[-1] == 2:
            return arr[..., 0] + 1j * arr[..., 1]
        return arr.astype(np.complex128)
    except (KeyError, TypeError, ValueError) as exc:
        raise GammaError(f"malformed matrix JSON: {exc}") from exc


@dataclass(frozen=True, eq=False)
class MatrixTuple:
    """n square matrices of a common size, stored as an (n, d, d) array."""

    mats: np.ndarray

    def __post_init__(self):
        m = np.array(self.mats, dtype=np.complex128)
        if m.ndim == 2:
            m = m[None]
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise GammaError(f"expected a stack of square matrices, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise GammaError("non-finite matrix entry")
        m.setflags(write=False)
        object.__setattr__(self, "mats", m)

    @classmethod
    def of(cls, mats: Sequence) -> "MatrixTuple":
        shapes = {np.shape(M) for M in mats}
        if len(shapes) != 1:
            raise GammaError(f"dimension mismatch: {sorted(shapes)}")
        return cls(np.stack([np.asarray(M, dtype=np.complex128) for M in mats]))

    @classmethod
    def from_point(cls, s) -> "MatrixTuple":
        """1 x 1 tuple for a scalar point."""
        s = np.asarray(getattr(s, "s", s), dtype=np.complex128).ravel()
        return cls(s[:, None, None])

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    def __getitem__(self, i):
        return self.mats[i]

    def __iter__(self):
        return iter(self.mats)

    def __len__(self):
        return self.n

    @property
    def H(self) -> "MatrixTuple":
        """Tuple of adjoints."""
        return MatrixTuple(dagger(self.mats))

    def scaled(self, factors) -> "MatrixTuple":
        f = np.asarray(factors, dtype=np.complex128).reshape(-1, 1, 1)
        return MatrixTuple(self.mats * f)

    def conjugate_by(self, U: np.ndarray) -> "MatrixTuple":
        """(U T_i U*)."""
        return MatrixTuple(U @ self.mats @ dagger(U))

    def direct_sum(self, other: "MatrixTuple") -> "MatrixTuple":
        if self.n != other.n:
            raise GammaError("tuple lengths differ")
        return MatrixTuple(np.stack([scipy.linalg.block_diag(a, b) for a, b in zip(self.mats, other.mats)]))

    def to_dict(self) -> dict:
        return {"n": self.n, "mats": [_matrix_to_json(M) for M in self.mats]}

    @classmethod
    def from_dict(cls, d: dict) -> "MatrixTuple":
        try:
            mats = [_matrix_from_json(M) for M in d["mats"]]
            n = int(d.get("n", len(mats)))
        except (KeyError, TypeError) as exc:
            raise GammaError(f"malformed MatrixTuple JSON: {exc}") from exc
        if n != len(mats):
            raise GammaError(f"MatrixTuple declares n={n} but has {len(mats)} matrices")
        return cls.of(mats)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MatrixTuple":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"MatrixTuple(n={self.n}, dim={self.dim})"


def _tuple(T) -> MatrixTuple:
    return T if isinstance(T, MatrixTuple) else MatrixTuple(np.asarray(T))


# ---------------------------------------------------------------- checks

def commutation_defect(T) -> float:
    """max_{i<j} ||T_i T_j - T_j T_i||."""
    T = _tuple(T)
    m = T.mats
    worst = 0.0
    for i in range(T.n):
        for j in range(i + 1, T.n):
            worst = max(worst, opnorm(m[i] @ m[j] - m[j] @ m[i]))
    return worst


def commute_tol(T, rtol: float = COMMUTE_RTOL) -> float:
    """Default commuting tolerance, relative to the largest entry norm."""
    T = _tuple(T)
    return rtol * max(1.0, max(opnorm(M) for M in T.mats))


def is_normal_tuple(T, tol: float = NORM_TOL) -> Verdict:
    T = _tuple(T)
    defects = [opnorm(M @ dagger(M) - dagger(M) @ M) for M in T.mats]
    worst = int(np.argmax(defects))
    d = defects[worst]
    return Verdict.from_defect(d, tol, certificate={"index": worst + 1} if d > tol else None,
                               per_entry=defects)


def invariant_defect(T, basis: np.ndarray, tol: float = NORM_TOL) -> float:
    """max_i ||(I - P) T_i P|| for P the projection onto span(basis)."""
    T = _tuple(T)
    B = np.asarray(basis, dtype=np.complex128)
    if B.ndim == 1:
        B = B[:, None]
    if opnorm(dagger(B) @ B - np.eye(B.shape[1])) > tol:
        raise GammaError("basis is not orthonormal")
    P = B @ dagger(B)
    Q = np.eye(T.dim) - P
    return max(opnorm(Q @ M @ B) for M in T.mats)


def compress(T, basis: np.ndarray, tol: float = NORM_TOL) -> MatrixTuple:
    """Restriction (B* T_i B) to an invariant subspace with orthonormal basis B."""
    T = _tuple(T)
    B = np.asarray(basis, dtype=np.complex128)
    if B.ndim == 1:
        B = B[:, None]
    d = invariant_defect(T, B, tol)
    if d > tol * max(1.0, max(opnorm(M) for M in T.mats)):
        raise GammaError(f"subspace is not invariant (defect {d:.3g})")
    return MatrixTuple(dagger(B) @ T.mats @ B)


# ------------------------------------------------------ joint spectrum

def _cluster_1d(vals: np.ndarray, tol: float) -> list[np.ndarray]:
    """Single-linkage groups of complex values."""
    n = vals.size
    order = np.argsort(vals.real)
    groups: list[list[int]] = []
    assigned = np.full(n, -1)
    for i in order:
        hits = {assigned[j] for j in range(n) if assigned[j] >= 0 and abs(vals[j] - vals[i]) <= tol}
        if not hits:
            assigned[i] = len(groups)
            groups.append([i])
            continue
        hits = sorted(hits)
        g = hits[0]
        for h in hits[1:]:
            for j in groups[h]:
                assigned[j] = g
            groups[g].extend(groups[h])
            groups[h] = []
        assigned[i] = g
        groups[g].append(i)
    return [np.array(sorted(g)) for g in groups if g]


def joint_diagonalize(T, tol: float = NORM_TOL, seed: int = 0, retries: int = 5,
                      cluster_tol: float = CLUSTER_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Common orthonormal eigenbasis of a commuting normal tuple.

    Returns (points, Q): ``points[k]`` is the joint eigenvalue vector belonging
    to column ``Q[:, k]``.  A random real combination of the T_i is brought to
    Schur form (diagonal for normal input); eigenvalue clusters closer than
    ``cluster_tol`` are refined recursively with fresh coefficients.
    """
    T = _tuple(T)
    scale = max(1.0, max(opnorm(M) for M in T.mats))
    if commutation_defect(T) > COMMUTE_RTOL * scale + tol:
        raise GammaError("tuple does not commute")
    if not is_normal_tuple(T, tol * scale).holds:
        raise GammaError("tuple is not normal")
    rng = np.random.default_rng(seed)

    def split(mats: np.ndarray, depth: int) -> list[np.ndarray]:
        d = mats.shape[1]
        if d == 1:
            return [np.eye(1, dtype=np.complex128)]
        centred = mats - np.einsum("ijj->i", mats)[:, None, None] / d * np.eye(d)
        if max(opnorm(M) for M in centred) <= tol * scale:
            return [np.eye(d, dtype=np.complex128)]
        for _ in range(retries):
            c = rng.normal(size=mats.shape[0])
            L = np.tensordot(c, mats, axes=1)
            Tm, Z = scipy.linalg.schur(L, output="complex")
            groups = _cluster_1d(np.diag(Tm), cluster_tol * scale)
            if len(groups) > 1 or depth == 0:
                break
        else:
            raise ConvergenceError("could not separate a degenerate joint eigenspace")
        if len(groups) == 1:
            raise ConvergenceError("random combination did not split the tuple")
        blocks = []
        for g in groups:
            Zg = Z[:, g]
            # orthonormalise against Schur round-off
            Zg, _ = np.linalg.qr(Zg)
            sub = dagger(Zg) @ mats @ Zg
            for V in split(sub, depth + 1):
                blocks.append(Zg @ V)
        return blocks

    blocks = split(T.mats, 0)
    Q = np.concatenate(blocks, axis=1)
    D = dagger(Q) @ T.mats @ Q
    off = D - np.einsum("ijj->ij", D)[:, :, None] * np.eye(T.dim)
    if max(opnorm(M) for M in off) > 1e3 * tol * scale:
        raise ConvergenceError("joint diagonalization residual too large")
    points = np.einsum("ijj->ji", D)
    return points, Q


def joint_spectrum(T, tol: float = NORM_TOL, seed: int = 0) -> list[np.ndarray]:
    """Joint eigenvalue vectors with multiplicity, one per basis vector."""
    points, _ = joint_diagonalize(T, tol, seed)
    return [row for row in points]


def match_multisets(a: np.ndarray, b: np.ndarray) -> float:
    """Greedy minimal-distance matching of two point multisets (rows); max matched distance."""
    a = np.atleast_2d(np.asarray(a, dtype=np.complex128))
    b = np.atleast_2d(np.asarray(b, dtype=np.complex128))
    if a.shape != b.shape:
        return float("inf")
    dist = np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)
    used_a, used_b = set(), set()
    worst = 0.0
    for flat in np.argsort(dist, axis=None):
        i, j = divmod(int(flat), b.shape[0])
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        worst = max(worst, float(dist[i, j]))
        if len(used_a) == a.shape[0]:
            break
    return worst


# ---------------------------------------------------------- symmetrization

def symmetrize_tuple(T) -> MatrixTuple:
    """(s_1(T), ..., s_n(T)) from the product recurrence prod_i (I + t T_i)."""
    T = _tuple(T)
    tol = commute_tol(T)
    if commutation_defect(T) > tol:
        warnings.warn("symmetrizing a non-commuting tuple", RuntimeWarning, stacklevel=2)
    d = T.dim
    E = [np.eye(d, dtype=np.complex128)] + [np.zeros((d, d), dtype=np.complex128) for _ in range(T.n)]
    for j, M in enumerate(T.mats):
        for k in range(j + 1, 0, -1):
            E[k] = E[k] + M @ E[k - 1]
    return MatrixTuple(np.stack(E[1:]))


def poly_of_tuple(q: MultiPoly, T) -> np.ndarray:
    """q(T_1, ..., T_n) for commuting T."""
    return evaluate_matrices(q, _tuple(T).mats)


def fundamental_operators(T) -> MatrixTuple:
    """(S_(n-i)* - S_i S_n*)_{i=1}^{n-1}."""
    T = _tuple(T)
    n = T.n
    S = T.mats
    Sn_star = dagger(S[n - 1])
    return MatrixTuple(np.stack([dagger(S[n - i - 1]) - S[i - 1] @ Sn_star for i in range(1, n)]))


# ------------------------------------------------------- intertwiners

def intertwiner_kernel(A: np.ndarray, B: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (as matrices) of {X : X A_k = B_k X for every k}.

    A is a x a (or a stack (k, a, a)), B likewise b x b; X is b x a.  Uses
    vec(XA - BX) = (A^T kron I - I kron B) vec X with column-major vec.
    """
    A = np.asarray(A, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    if A.ndim == 2:
        A, B = A[None], B[None]
    if A.shape[0] != B.shape[0]:
        raise GammaError("intertwiner needs the same number of matrices on both sides")
    a, b = A.shape[1], B.shape[1]
    K = np.vstack([np.kron(Ak.T, np.eye(b)) - np.kron(np.eye(a), Bk) for Ak, Bk in zip(A, B)])
    _, sv, Vh = np.linalg.svd(K)
    scale = max(1.0, sv[0] if sv.size else 1.0)
    rank = int(np.sum(sv > tol * scale))
    null = dagger(Vh[rank:])
    return np.stack([v.reshape(a, b).T for v in null.T]) if null.shape[1] else np.zeros((0, b, a))
