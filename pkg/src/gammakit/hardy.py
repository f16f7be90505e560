"""Pure Gamma_n-isometries as multiplication tuples on the vector Hardy space H^2(C^d).

A model is determined by matrices A_1, ..., A_(n-1): the tuple is
(M_Phi_1, ..., M_Phi_(n-1), M_z) with Phi_i(z) = A_i + A_(n-i)^* z.  Everything
is kept at symbol level (polynomial matrix symbols and torus suprema);
finite sections only serve as cross-checks, since a finite-dimensional
isometry is already unitary.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import pi

import numpy as np
import scipy.optimize
from scipy.stats import unitary_group

from .classifiers import (
    Budget,
    DEFAULT_BUDGET,
    MARGIN_TOL,
    battery,
    is_gamma_isometry,
    is_gamma_unitary,
    sup_on_gamma,
)
from .geometry import gammas
from .operators import MatrixTuple, NORM_TOL, _matrix_from_json, _matrix_to_json, dagger, opnorm
from .polynomials import MultiPoly, elem_sym_all
from .verdict import GammaError, Verdict


def _comm(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def _any_matrix_to_json(M: np.ndarray):
    if M.shape[0] == M.shape[1]:
        return _matrix_to_json(M)
    return [[[float(x.real), float(x.imag)] for x in row] for row in M]


# ------------------------------------------------------------- symbols

class MatrixSymbol:
    """Polynomial matrix symbol Phi(z) = sum_k C_k z^k, trailing zero coefficients trimmed.

    Coefficients are (d_out, d_in) matrices; square symbols have ``d``.
    ``*`` is the symbol product (Cauchy product of coefficients) or scaling.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        arr = np.array(coeffs, dtype=np.complex128)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[0] == 0:
            raise GammaError(f"symbol coefficients must have shape (K+1, d_out, d_in), got {arr.shape}")
        k = arr.shape[0]
        while k > 1 and not arr[k - 1].any():
            k -= 1
        arr = arr[:k].copy()
        arr.flags.writeable = False
        self.coeffs = arr

    @classmethod
    def constant(cls, M) -> "MatrixSymbol":
        return cls(np.asarray(M)[None])

    @classmethod
    def identity(cls, d: int) -> "MatrixSymbol":
        return cls(np.eye(d)[None])

    @classmethod
    def shift(cls, d: int) -> "MatrixSymbol":
        """z I_d."""
        return cls(np.stack([np.zeros((d, d)), np.eye(d)]))

    @property
    def shape(self) -> tuple[int, int]:
        return self.coeffs.shape[1], self.coeffs.shape[2]

    @property
    def d(self) -> int:
        out, inn = self.shape
        if out != inn:
            raise GammaError(f"symbol is rectangular {out}x{inn}")
        return out

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def coefficient(self, k: int) -> np.ndarray:
        if 0 <= k <= self.degree:
            return self.coeffs[k]
        return np.zeros(self.shape, dtype=np.complex128)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape + self.shape, dtype=np.complex128)
        for C in self.coeffs[::-1]:
            out = out * z[..., None, None] + C
        return out

    def __add__(self, other):
        if not isinstance(other, MatrixSymbol):
            return NotImplemented
        return symbol_add(self, other)

    def __sub__(self, other):
        if not isinstance(other, MatrixSymbol):
            return NotImplemented
        return symbol_add(self, symbol_scale(other, -1.0))

    def __neg__(self):
        return symbol_scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, MatrixSymbol):
            return symbol_mul(self, other)
        if np.isscalar(other):
            return symbol_scale(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return symbol_scale(self, other)
        return NotImplemented

    def allclose(self, other: "MatrixSymbol", atol: float = 1e-12) -> bool:
        k = max(self.degree, other.degree) + 1
        return self.shape == other.shape and all(
            np.allclose(self.coefficient(j), other.coefficient(j), rtol=0, atol=atol) for j in range(k))

    def derivative_bound(self) -> float:
        """sum_k k ||C_k||, a Lipschitz constant of theta -> ||Phi(e^{i theta})||."""
        return float(sum(k * opnorm(C) for k, C in enumerate(self.coeffs)))

    def to_dict(self) -> dict:
        out, inn = self.shape
        head = {"d": out} if out == inn else {"e_out": out, "e_in": inn}
        return {**head, "coeffs": [_any_matrix_to_json(C) for C in self.coeffs]}

    @classmethod
    def from_dict(cls, obj: dict) -> "MatrixSymbol":
        try:
            mats = [_matrix_from_json(C) for C in obj["coeffs"]]
        except (KeyError, TypeError) as exc:
            raise GammaError(f"malformed symbol JSON: {exc}") from exc
        if not mats or any(M.shape != mats[0].shape for M in mats):
            raise GammaError("symbol coefficients must share one shape")
        if "d" in obj and mats[0].shape != (int(obj["d"]),) * 2:
            raise GammaError(f"symbol declares d={obj['d']} but coefficients are {mats[0].shape}")
        return cls(np.stack(mats))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __repr__(self):
        return f"MatrixSymbol(shape={self.shape}, degree={self.degree})"


def symbol_add(Phi: MatrixSymbol, Psi: MatrixSymbol) -> MatrixSymbol:
    if Phi.shape != Psi.shape:
        raise GammaError(f"symbol shapes differ: {Phi.shape} vs {Psi.shape}")
    k = max(Phi.degree, Psi.degree) + 1
    return MatrixSymbol(np.stack([Phi.coefficient(j) + Psi.coefficient(j) for j in range(k)]))


def symbol_scale(Phi: MatrixSymbol, c) -> MatrixSymbol:
    return MatrixSymbol(Phi.coeffs * c)


def symbol_mul(Phi: MatrixSymbol, Psi: MatrixSymbol) -> MatrixSymbol:
    """Coefficients of Phi(z) Psi(z)."""
    if Phi.shape[1] != Psi.shape[0]:
        raise GammaError(f"cannot multiply symbols of shapes {Phi.shape} and {Psi.shape}")
    K, L = Phi.degree, Psi.degree
    out = np.zeros((K + L + 1, Phi.shape[0], Psi.shape[1]), dtype=np.complex128)
    for a in range(K + 1):
        out[a:a + L + 1] += np.einsum("ij,kjl->kil", Phi.coeffs[a], Psi.coeffs)
    return MatrixSymbol(out)


@dataclass(frozen=True)
class SymbolSup:
    value: float
    argmax: complex
    lipschitz: float
    samples: int

    @property
    def slack(self) -> float:
        return self.lipschitz * pi / self.samples

    @property
    def upper(self) -> float:
        return self.value + self.slack

    def to_dict(self) -> dict:
        return {"value": self.value, "argmax": self.argmax, "lipschitz": self.lipschitz,
                "samples": self.samples, "certified_upper": self.upper}


def symbol_sup_norm(Phi: MatrixSymbol, samples: int = 256, refine: bool = True, full: bool = False):
    """sup_{z in T} ||Phi(z)||, which is the norm of the multiplication operator M_Phi.

    Uniform samples, then bounded scalar refinement around the best three.
    With ``full=True`` returns a :class:`SymbolSup` whose ``upper`` is a
    certified bound.
    """
    theta = 2 * pi * np.arange(samples) / samples
    vals = np.linalg.norm(Phi(np.exp(1j * theta)), ord=2, axis=(-2, -1))
    best_i = int(np.argmax(vals))
    best, arg = float(vals[best_i]), float(theta[best_i])
    if refine and Phi.degree > 0:
        h = 2 * pi / samples
        f = lambda t: -opnorm(Phi(np.exp(1j * t)))
        for i in np.argsort(-vals)[:3]:
            res = scipy.optimize.minimize_scalar(f, bounds=(theta[i] - h, theta[i] + h), method="bounded",
                                                 options={"xatol": 1e-12})
            if -res.fun > best:
                best, arg = float(-res.fun), float(res.x)
    if full:
        return SymbolSup(best, complex(np.exp(1j * arg)), Phi.derivative_bound(), samples)
    return best


def poly_of_symbols(q: MultiPoly, symbols: list[MatrixSymbol]) -> MatrixSymbol:
    """Symbol of q(M_Psi_1, ..., M_Psi_k) for commuting square symbols."""
    if q.n_vars != len(symbols):
        raise GammaError(f"polynomial has {q.n_vars} variables, got {len(symbols)} symbols")
    d = symbols[0].d
    powers = [[MatrixSymbol.identity(d)] for _ in symbols]
    total = MatrixSymbol(np.zeros((1, d, d)))
    for e, c in q.terms.items():
        term = MatrixSymbol.identity(d)
        for k, a in enumerate(e):
            while len(powers[k]) <= a:
                powers[k].append(powers[k][-1] * symbols[k])
            if a:
                term = term * powers[k][a]
        total = total + c * term
    return total


# ---------------------------------------------------------- model types

@dataclass(frozen=True, eq=False)
class SymbolTuple:
    """A_1, ..., A_(n-1): common square size d; determines a model with n = len + 1."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=np.complex128)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise GammaError(f"A-tuple must be square matrices of a common size, got shape {A.shape}")
        if A.shape[0] < 1:
            raise GammaError("A-tuple needs at least one matrix (n >= 2)")
        A.flags.writeable = False
        object.__setattr__(self, "A", A)

    @classmethod
    def of(cls, mats) -> "SymbolTuple":
        mats = [np.atleast_2d(np.asarray(M, dtype=np.complex128)) for M in mats]
        if len({M.shape for M in mats}) != 1:
            raise GammaError(f"A-tuple matrices differ in shape: {[M.shape for M in mats]}")
        return cls(np.stack(mats))

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return self.A.shape[0] + 1

    def __getitem__(self, i):
        return self.A[i]

    def conjugate_by(self, V: np.ndarray) -> "SymbolTuple":
        return SymbolTuple(V @ self.A @ dagger(V))

    def symbols(self) -> list[MatrixSymbol]:
        """Phi_i = A_i + A_(n-i)^* z for i = 1..n-1."""
        n, A = self.n, self.A
        return [MatrixSymbol(np.stack([A[i - 1], dagger(A[n - i - 1])])) for i in range(1, n)]

    def to_dict(self) -> dict:
        return {"d": self.d, "A": [_matrix_to_json(M) for M in self.A]}

    @classmethod
    def from_dict(cls, obj: dict) -> "SymbolTuple":
        try:
            mats = [_matrix_from_json(M) for M in obj["A"]]
        except (KeyError, TypeError) as exc:
            raise GammaError(f"malformed A-tuple JSON: {exc}") from exc
        st = cls.of(mats)
        if "d" in obj and int(obj["d"]) != st.d:
            raise GammaError(f"A-tuple declares d={obj['d']} but matrices are {st.d}x{st.d}")
        return st

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SymbolTuple":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise GammaError(f"malformed JSON: {exc}") from exc


@dataclass(frozen=True, eq=False)
class ModelTuple:
    """(M_Phi_1, ..., M_Phi_(n-1), M_z) on H^2(C^d), or its adjoint tuple when ``adjoint``."""

    A: SymbolTuple
    adjoint_flag: bool = False
    symbols: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.A.symbols()))

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def d(self) -> int:
        return self.A.d

    def adjoint(self) -> "ModelTuple":
        return ModelTuple(self.A, not self.adjoint_flag)

    def all_symbols(self) -> list[MatrixSymbol]:
        return list(self.symbols) + [MatrixSymbol.shift(self.d)]

    def to_dict(self) -> dict:
        return {**self.A.to_dict(), "adjoint": self.adjoint_flag}

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelTuple":
        return cls(SymbolTuple.from_dict(obj), bool(obj.get("adjoint", False)))


# ---------------------------------------------------- symbol conditions

def symbol_contraction_verdict(symbols: list[MatrixSymbol], budget: Budget = DEFAULT_BUDGET,
                               seed: int = 0, tol: float = MARGIN_TOL, samples: int = 256) -> Verdict:
    """Battery test that (M_Psi_1, ..., M_Psi_k) is a Gamma_k-contraction.

    ||q(M_Psi)|| is the torus sup of the symbol of q, so every battery
    polynomial is checked at every point of T at once.  ``certified_tol``
    bounds how much the sampled symbol norms can undershoot.
    """
    k = len(symbols)
    grid = budget.grid_for(k)
    polys = battery(k, budget, seed)
    margins, slacks, first = [], [], None
    for label, q in polys:
        ss = symbol_sup_norm(poly_of_symbols(q, symbols), samples, full=True)
        m = ss.value - sup_on_gamma(q, k, grid).value
        margins.append(m)
        slacks.append(ss.slack)
        if m > tol and first is None:
            first = {"label": label, "poly": str(q), "margin": m, "z": ss.argmax}
    worst = int(np.argmax(margins))
    return Verdict.from_defect(max(margins), tol, certificate=first, sampled=True, polys_checked=len(polys),
                               certified_tol=max(slacks),
                               worst={"label": polys[worst][0], "margin": margins[worst]})


def commutator_conditions(A: SymbolTuple) -> tuple[float, dict | None]:
    """Largest defect in [A_i, A_j] = 0 and [A_i, A_(n-j)^*] = [A_j, A_(n-i)^*]."""
    n, M = A.n, A.A
    worst, cert = 0.0, None
    for i in range(1, n):
        for j in range(i, n):
            c1 = opnorm(_comm(M[i - 1], M[j - 1]))
            c2 = opnorm(_comm(M[i - 1], dagger(M[n - j - 1])) - _comm(M[j - 1], dagger(M[n - i - 1])))
            for val, ident in ((c1, f"[A_{i}, A_{j}] = 0"),
                               (c2, f"[A_{i}, A_{n - j}*] = [A_{j}, A_{n - i}*]")):
                if val > worst:
                    worst, cert = val, {"identity": ident, "i": i, "j": j, "defect": val}
    return worst, cert


def check_symbol_conditions(A: SymbolTuple, tol: float = NORM_TOL, budget: Budget = DEFAULT_BUDGET,
                            seed: int = 0, samples: int = 256) -> Verdict:
    """Admissibility of an A-tuple.

    Commutator identities are checked to ``tol``; the scaled symbols
    (gamma_i Phi_i(z)) must form a Gamma_(n-1)-contraction for every z on the
    circle, tested with the polynomial battery at symbol level.
    """
    cdef_, ccert = commutator_conditions(A)
    g = gammas(A.n)
    scaled = [g[i] * S for i, S in enumerate(A.symbols())]
    cv = symbol_contraction_verdict(scaled, budget, seed, max(tol, MARGIN_TOL), samples)
    checks = {"commutators": cdef_, "symbol_contraction": cv.defect}
    if cdef_ > tol:
        cert = {"condition": "commutators", **ccert}
    elif not cv.holds:
        cert = {"condition": "symbol_contraction", **cv.certificate}
    else:
        cert = None
    defect = max(cdef_, cv.defect) if cert is None or cert["condition"] == "commutators" else cv.defect
    return Verdict(cert is None, float(defect), tol, cert,
                   {"checks": checks, "certified_tol": cv.diagnostics["certified_tol"], "sampled": True})


def build_pure_isometry(A: SymbolTuple, tol: float = NORM_TOL, budget: Budget = DEFAULT_BUDGET,
                        seed: int = 0, check: bool = True) -> ModelTuple:
    """The model tuple of an admissible A-tuple; raises GammaError if admissibility fails."""
    if check:
        v = check_symbol_conditions(A, tol, budget, seed)
        if not v.holds:
            raise GammaError(f"A-tuple is not admissible: {v.certificate}")
    return ModelTuple(A)


def symbol_identity_defect(model: ModelTuple) -> float:
    """max |coefficients of Phi_(n-i)(z)^* - conj(z) Phi_i(z)| on the circle, both Laurent terms."""
    S, n = model.symbols, model.n
    worst = 0.0
    for i in range(1, n):
        P, Q = S[i - 1], S[n - i - 1]
        if P.degree > 1 or Q.degree > 1:
            return float("inf")
        worst = max(worst, float(np.abs(dagger(Q.coefficient(0)) - P.coefficient(1)).max()),
                    float(np.abs(dagger(Q.coefficient(1)) - P.coefficient(0)).max()))
    return worst


def model_isometry_verdict(model: ModelTuple, tol: float = NORM_TOL, budget: Budget = DEFAULT_BUDGET,
                           seed: int = 0) -> Verdict:
    """Gamma_n-isometry test at symbol level.

    M_z is an isometry and the adjoint relations reduce to coefficient
    identities, so both are exact; commutativity is the commutator
    identities and the contraction check runs on symbol sup norms.  The
    adjoint of a model fails because M_z^* is not isometric (M_z M_z^* is the
    projection off the constants, at distance 1 from I).
    """
    if model.adjoint_flag:
        return Verdict.from_defect(1.0, tol, certificate={"check": "isometric_last", "defect": 1.0},
                                   checks={"isometric_last": 1.0})
    adm = check_symbol_conditions(model.A, tol, budget, seed)
    checks = {"isometric_last": 0.0, "adjoint_relations": symbol_identity_defect(model),
              **adm.diagnostics["checks"]}
    cert = adm.certificate
    if cert is None and checks["adjoint_relations"] > tol:
        cert = {"check": "adjoint_relations", "defect": checks["adjoint_relations"]}
    return Verdict(cert is None, float(max(checks.values())), tol, cert,
                   {"checks": checks, "certified_tol": adm.diagnostics["certified_tol"], "symbolic": True})


def apply_poly(model: ModelTuple, q: MultiPoly) -> MatrixSymbol:
    """Symbol of q(M_Phi_1, ..., M_Phi_(n-1), M_z)."""
    if model.adjoint_flag:
        raise GammaError("polynomials of an adjoint model are not analytic symbols")
    if q.n_vars != model.n:
        raise GammaError(f"polynomial has {q.n_vars} variables, model has n={model.n}")
    return poly_of_symbols(q, model.all_symbols())


# ---------------------------------------------------------- truncations

def truncate_symbol(Phi: MatrixSymbol, N: int) -> np.ndarray:
    """Block lower-triangular Toeplitz section of M_Phi on polynomials of degree <= N."""
    out, inn = Phi.shape
    T = np.zeros(((N + 1) * out, (N + 1) * inn), dtype=np.complex128)
    for r in range(N + 1):
        for c in range(max(0, r - Phi.degree), r + 1):
            T[r * out:(r + 1) * out, c * inn:(c + 1) * inn] = Phi.coeffs[r - c]
    return T


def truncate(model: ModelTuple, N: int) -> MatrixTuple:
    """Finite section on polynomials of degree <= N (dimension (N+1)d).

    The section of M_z is nilpotent, so it is not an isometry on the top
    block; sections of analytic Toeplitz operators still multiply exactly,
    because the degree <= N subspace is co-invariant.
    """
    if N < 1:
        raise GammaError("truncation degree N must be >= 1")
    mats = np.stack([truncate_symbol(S, N) for S in model.all_symbols()])
    if model.adjoint_flag:
        mats = np.conj(np.swapaxes(mats, -1, -2))
    return MatrixTuple(mats)


def _fundamental_blocks(T: MatrixTuple, d: int) -> np.ndarray:
    n, S = T.n, T.mats
    Sn_star = dagger(S[n - 1])
    return np.stack([dagger(S[n - i - 1]) - S[i - 1] @ Sn_star for i in range(1, n)])


def fundamental_invariant(model: ModelTuple, N: int = 3, tol: float = 1e-12) -> list[np.ndarray]:
    """Degree-0 compressions of S_(n-i)^* - S_i S_n^*, i = 1..n-1; these are A_(n-i)^*.

    On H^2 the operator equals (I - M_z M_z^*) (x) A_(n-i)^*, so the value is
    read off the symbols; a section of degree N is used as a cross-check,
    where the identity holds blockwise with no truncation error.
    """
    if model.adjoint_flag:
        raise GammaError("fundamental invariant is defined for the model, not its adjoint")
    n, d = model.n, model.d
    sym = [dagger(model.symbols[n - i - 1].coefficient(0)) for i in range(1, n)]
    F = _fundamental_blocks(truncate(model, N), d)
    scale = max(1.0, float(np.abs(model.A.A).max()))
    for i in range(1, n):
        expect = np.zeros_like(F[i - 1])
        expect[:d, :d] = sym[i - 1]
        gap = float(np.abs(F[i - 1] - expect).max())
        if gap > tol * scale:
            raise GammaError(f"section cross-check failed for i={i}: gap {gap:.3g}")
    return sym


def fundamental_invariant_section(model: ModelTuple, N: int = 3) -> list[np.ndarray]:
    """The same compressions computed only from the degree-N section."""
    d = model.d
    return [F[:d, :d].copy() for F in _fundamental_blocks(truncate(model, N), d)]


# ---------------------------------------------------------------- Wold

@dataclass(frozen=True, eq=False)
class StructuredTuple:
    """Gamma_n-unitary part (+) pure model part; either may be None."""

    unitary_part: MatrixTuple | None
    pure_part: ModelTuple | None

    def __post_init__(self):
        if self.unitary_part is None and self.pure_part is None:
            raise GammaError("structured tuple needs at least one part")
        if self.unitary_part is not None and self.pure_part is not None and \
                self.unitary_part.n != self.pure_part.n:
            raise GammaError("parts have different n")

    @property
    def n(self) -> int:
        return self.unitary_part.n if self.unitary_part is not None else self.pure_part.n

    def realize(self, N: int = 3, seed: int | None = None) -> MatrixTuple:
        """W (U (+) section_N(model)) W^*, with W Haar-random when ``seed`` is given."""
        parts = []
        if self.unitary_part is not None:
            parts.append(self.unitary_part)
        if self.pure_part is not None:
            parts.append(truncate(self.pure_part, N))
        T = parts[0] if len(parts) == 1 else parts[0].direct_sum(parts[1])
        if seed is not None:
            T = T.conjugate_by(unitary_group.rvs(T.dim, random_state=np.random.default_rng(seed)))
        return T


def make_direct_sum(u: MatrixTuple | None, p: ModelTuple | None, tol: float = NORM_TOL,
                    check: bool = True) -> StructuredTuple:
    if check and u is not None:
        v = is_gamma_unitary(u, tol)
        if not v.holds:
            raise GammaError(f"unitary part is not a Gamma_n-unitary: {v.certificate}")
    if p is not None and p.adjoint_flag:
        raise GammaError("pure part must be a model, not its adjoint")
    return StructuredTuple(u, p)


def _orth_split(M: np.ndarray, thresh: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of range(M) and its complement."""
    U, sv, _ = np.linalg.svd(M)
    r = int(np.sum(sv > thresh))
    return U[:, :r], U[:, r:]


def wold_section(T: MatrixTuple, N: int, tol: float = 1e-8) -> tuple[MatrixTuple | None, ModelTuple | None]:
    """Split a tuple unitarily equivalent to U (+) section_N(model).

    H_1 = range(S_n^dim) carries the unitary part.  On H_2, L = ker S_n^* is
    the wandering subspace, A_j is the adjoint of the compression of
    S_j^* - S_(n-j) S_n^* to L, and [L, S_n L, ..., S_n^N L] must reproduce the
    section of the recovered model.
    """
    D, n = T.dim, T.n
    S = T.mats
    H1, H2 = _orth_split(np.linalg.matrix_power(S[-1], D), 0.5)
    scale = max(1.0, max(opnorm(M) for M in S))
    leak = max((max(opnorm(dagger(H2) @ M @ H1), opnorm(dagger(H1) @ M @ H2)) for M in S), default=0.0) \
        if H1.shape[1] and H2.shape[1] else 0.0
    if leak > tol * scale:
        raise GammaError(f"range of S_n^dim is not reducing (leak {leak:.3g})")
    unitary = MatrixTuple(dagger(H1) @ S @ H1) if H1.shape[1] else None
    if unitary is not None:
        v = is_gamma_unitary(unitary, tol)
        if not v.holds:
            raise GammaError(f"unitary part fails the Gamma_n-unitary test: {v.certificate}")
    if not H2.shape[1]:
        return unitary, None
    C = dagger(H2) @ S @ H2
    Sn = C[-1]
    _, L = _orth_split(Sn, 0.5)
    d = L.shape[1]
    if d == 0 or H2.shape[1] != (N + 1) * d:
        raise GammaError(f"pure part of dimension {H2.shape[1]} is not a degree-{N} section "
                         f"over a {d}-dimensional wandering space")
    A = np.stack([dagger(dagger(L) @ (dagger(C[j - 1]) - C[n - j - 1] @ dagger(Sn)) @ L) for j in range(1, n)])
    model = ModelTuple(SymbolTuple(A))
    blocks = [L]
    for _ in range(N):
        blocks.append(Sn @ blocks[-1])
    V = np.hstack(blocks)
    ref = truncate(model, N).mats
    gap = float(np.abs(dagger(V) @ C @ V - ref).max())
    if gap > tol * scale:
        raise GammaError(f"pure part does not match the section of the recovered model (gap {gap:.3g})")
    return unitary, model


def wold_decompose(t, tol: float = 1e-8, N: int | None = None,
                   seed: int | None = 0) -> tuple[MatrixTuple | None, ModelTuple | None]:
    """(Gamma_n-unitary part, pure part) of a structured or finite tuple.

    A StructuredTuple is realized as a conjugated finite section (degree N,
    default 3) and split by :func:`wold_section`.  A finite tuple with S_n
    isometric is a Gamma_n-unitary whenever it passes the isometry test and
    is returned whole; other finite tuples are split as sections when N is
    given.
    """
    if isinstance(t, StructuredTuple):
        N = 3 if N is None else N
        return wold_section(t.realize(N, seed), N, tol)
    if isinstance(t, ModelTuple):
        return None, t
    T = t if isinstance(t, MatrixTuple) else MatrixTuple(np.asarray(t))
    Sn = T.mats[-1]
    if opnorm(dagger(Sn) @ Sn - np.eye(T.dim)) <= tol:
        v = is_gamma_isometry(T, tol)
        if not v.holds:
            raise GammaError(f"S_n is isometric but the tuple is not a Gamma_n-isometry: {v.certificate}")
        return T, None
    if N is not None:
        return wold_section(T, N, tol)
    raise GammaError("input is neither structured nor a finite Gamma_n-isometry; pass N to split a section")


# ------------------------------------------------- admissible examples

def admissible_diagonal(n: int, d: int, seed: int = 0, boundary_fraction: float = 0.3) -> SymbolTuple:
    """Diagonal A-tuple whose k-th diagonal entries are e_1(w), ..., e_(n-1)(w) for w in the closed polydisc.

    Each scalar fiber then satisfies the contraction condition at every z;
    some w are drawn on the torus so the condition is tight.
    """
    if n < 2:
        raise GammaError("models need n >= 2")
    rng = np.random.default_rng(seed)
    entries = np.empty((d, n - 1), dtype=np.complex128)
    for k in range(d):
        r = np.ones(n - 1) if rng.random() < boundary_fraction else np.sqrt(rng.random(n - 1))
        w = r * np.exp(2j * pi * rng.random(n - 1))
        entries[k] = elem_sym_all(w)
    return SymbolTuple(np.stack([np.diag(entries[:, i]) for i in range(n - 1)]))


def admissible_conjugated(n: int, d: int, seed: int = 0) -> SymbolTuple:
    """:func:`admissible_diagonal` under a Haar-random simultaneous unitary conjugation."""
    rng = np.random.default_rng(seed)
    base = admissible_diagonal(n, d, int(rng.integers(2**31)))
    V = unitary_group.rvs(d, random_state=rng) if d > 1 else np.exp(2j * pi * rng.random()) * np.eye(1)
    return base.conjugate_by(V)
