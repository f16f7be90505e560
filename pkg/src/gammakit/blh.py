"""Invariant subspaces of model tuples given by inner symbols, and unitary equivalence of A-tuples.

A subspace Theta H^2 is invariant for (M_Phi, M_z) exactly when each
Theta^{-1} Phi_i Theta is again an analytic symbol Psi_i and (M_Psi, M_z) is a
pure Gamma_n-isometry.  Two models are unitarily equivalent exactly when
their A-tuples are.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from math import ceil, pi

import numpy as np
import scipy.linalg

from .classifiers import Budget, DEFAULT_BUDGET
from .hardy import (
    MatrixSymbol,
    ModelTuple,
    SymbolTuple,
    model_isometry_verdict,
)
from .operators import dagger, intertwiner_kernel, opnorm
from .verdict import GammaError, Verdict

BLH_TOL = 1e-8


class AnalyticityError(GammaError):
    """Theta^{-1} Phi Theta has a non-negligible negative Fourier coefficient."""

    def __init__(self, message: str, negative_norm: float, index: int):
        super().__init__(message)
        self.negative_norm = negative_norm
        self.index = index


# --------------------------------------------------------------- inner symbols

@dataclass(frozen=True, eq=False)
class InnerSymbol:
    """Theta(z) = N(z) / q(z) with N a polynomial matrix symbol (e_out x e_in) and q a scalar polynomial.

    A scalar denominator covers finite Blaschke factors,
    b_a(z) = (z - a) / (1 - conj(a) z), without leaving polynomial arithmetic.
    """

    numerator: MatrixSymbol
    denominator: np.ndarray = None

    def __post_init__(self):
        den = np.array([1.0] if self.denominator is None else self.denominator, dtype=np.complex128).ravel()
        if den.size == 0 or not den.any():
            raise GammaError("denominator must be a nonzero polynomial")
        den.flags.writeable = False
        object.__setattr__(self, "denominator", den)

    @classmethod
    def shift(cls, d: int) -> "InnerSymbol":
        return cls(MatrixSymbol.shift(d))

    @classmethod
    def constant(cls, W) -> "InnerSymbol":
        return cls(MatrixSymbol.constant(np.atleast_2d(W)))

    @classmethod
    def blaschke(cls, a: complex, d: int = 1) -> "InnerSymbol":
        """b_a(z) I_d for |a| < 1."""
        if abs(a) >= 1:
            raise GammaError("Blaschke zero must lie in the open disc")
        eye = np.eye(d)
        return cls(MatrixSymbol(np.stack([-a * eye, eye])), np.array([1.0, -np.conj(a)]))

    @property
    def e_out(self) -> int:
        return self.numerator.shape[0]

    @property
    def e_in(self) -> int:
        return self.numerator.shape[1]

    @property
    def degree(self) -> int:
        return max(self.numerator.degree, self.denominator.size - 1)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        den = np.polynomial.polynomial.polyval(z, self.denominator)
        return self.numerator(z) / den[..., None, None]

    def __mul__(self, other: "InnerSymbol") -> "InnerSymbol":
        if not isinstance(other, InnerSymbol):
            return NotImplemented
        return InnerSymbol(self.numerator * other.numerator,
                           np.polynomial.polynomial.polymul(self.denominator, other.denominator))

    def to_dict(self) -> dict:
        out = self.numerator.to_dict()
        out.pop("d", None)
        out.update({"e_in": self.e_in, "e_out": self.e_out})
        if not (self.denominator.size == 1 and self.denominator[0] == 1):
            out["denominator"] = [[float(c.real), float(c.imag)] for c in self.denominator]
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "InnerSymbol":
        num = MatrixSymbol.from_dict({k: v for k, v in obj.items() if k == "coeffs"})
        if ("e_out" in obj and int(obj["e_out"]) != num.shape[0]) or \
                ("e_in" in obj and int(obj["e_in"]) != num.shape[1]):
            raise GammaError(f"declared (e_out, e_in) do not match coefficient shape {num.shape}")
        den = obj.get("denominator")
        if den is not None:
            den = np.array([complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in den])
        return cls(num, den)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def innerness_defect(Theta: InnerSymbol, samples: int = 256) -> float:
    """max over sampled z in T of ||Theta(z)^* Theta(z) - I||."""
    z = np.exp(2j * pi * np.arange(samples) / samples)
    V = Theta(z)
    G = np.conj(np.swapaxes(V, -1, -2)) @ V - np.eye(Theta.e_in)
    return float(np.linalg.norm(G, ord=2, axis=(-2, -1)).max())


def default_quadrature(*degrees: int) -> int:
    m = 8 * (max(degrees) + 1)
    return 1 << (m - 1).bit_length()


def intertwine_solve(Phi: MatrixSymbol, Theta: InnerSymbol, quad_points: int | None = None,
                     tol: float = BLH_TOL) -> tuple[MatrixSymbol, dict]:
    """Psi with Phi Theta = Theta Psi, recovered from Theta(z)^{-1} Phi(z) Theta(z) on a quadrature grid.

    Square Theta is inverted pointwise; a rectangular Theta needs a left
    inverse on T (its pseudo-inverse is used).  Fourier coefficients come
    from an FFT; the upper half of the spectrum is read as negative indices,
    whose norm must stay below ``tol``.  Returns (Psi, info).
    """
    if Phi.shape != (Theta.e_out, Theta.e_out):
        raise GammaError(f"Phi is {Phi.shape} but Theta maps into dimension {Theta.e_out}")
    M = quad_points or default_quadrature(Phi.degree, Theta.degree)
    z = np.exp(2j * pi * np.arange(M) / M)
    V = Theta(z)
    sv = np.linalg.svd(V, compute_uv=False)
    if not np.all(np.isfinite(sv)) or (sv[:, -1] <= 1e-12 * sv[:, 0]).any():
        bad = int(np.argmin(np.where(np.isfinite(sv[:, -1]), sv[:, -1], 0.0)))
        raise GammaError(f"Theta is singular at quadrature point z = {z[bad]:.6g}")
    rect = Theta.e_in != Theta.e_out
    left = np.linalg.pinv(V) if rect else np.linalg.inv(V)
    vals = left @ Phi(z) @ V
    coef = np.fft.fft(vals, axis=0) / M
    half = M // 2
    neg = [opnorm(coef[M - k]) for k in range(1, M - half)]
    if neg and max(neg) > tol:
        k = int(np.argmax(neg)) + 1
        raise AnalyticityError(f"coefficient of z^-{k} has norm {neg[k - 1]:.3g}", float(neg[k - 1]), -k)
    pos = coef[:half + 1]
    keep = max([k for k in range(half + 1) if opnorm(pos[k]) > tol] + [0])
    Psi = MatrixSymbol(pos[:keep + 1])
    zs = np.exp(2j * pi * np.arange(256) / 256)
    T = Theta(zs)
    res = float(np.linalg.norm(Phi(zs) @ T - T @ Psi(zs), ord=2, axis=(-2, -1)).max())
    if res > tol:
        raise GammaError(f"intertwining residual {res:.3g} exceeds tolerance")
    return Psi, {"residual": res, "quad_points": M, "max_negative": max(neg, default=0.0),
                 "rectangular": rect}


def invariant_subspace_verdict(model: ModelTuple, Theta: InnerSymbol, tol: float = BLH_TOL,
                               budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> Verdict:
    """Is Theta H^2(C^e_in) invariant under the model tuple?

    Holds when every Theta^{-1} Phi_i Theta is analytic and the resulting
    Psi-tuple is again an admissible model (Psi_i = B_i + B_(n-i)^* z, passing
    the Gamma_n-isometry test).  The verdict carries B under diagnostics.
    """
    inner = innerness_defect(Theta)
    if inner > tol:
        raise GammaError(f"Theta is not inner (defect {inner:.3g})")
    n = model.n
    Psis, residuals = [], []
    rect = False
    for i, Phi in enumerate(model.symbols, start=1):
        try:
            Psi, info = intertwine_solve(Phi, Theta, tol=tol)
        except AnalyticityError as exc:
            return Verdict(False, exc.negative_norm, tol,
                           {"check": "analyticity", "i": i, "index": exc.index,
                            "negative_coefficient_norm": exc.negative_norm},
                           {"innerness_defect": inner})
        Psis.append(Psi)
        residuals.append(info["residual"])
        rect = info["rectangular"]
    diag = {"innerness_defect": inner, "residuals": residuals}
    if rect:
        diag["note"] = "rectangular Theta handled through its left inverse on T"
    B = np.stack([P.coefficient(0) for P in Psis])
    shape = max(max(float(np.abs(P.coefficient(1) - dagger(B[n - i - 1])).max()) for i, P in enumerate(Psis, 1)),
                max((float(np.abs(c).max()) for P in Psis for c in P.coeffs[2:]), default=0.0))
    diag["model_shape_defect"] = shape
    if shape > tol:
        return Verdict(False, shape, tol, {"check": "model_shape", "defect": shape}, diag)
    Bt = SymbolTuple(B)
    iso = model_isometry_verdict(ModelTuple(Bt), tol, budget, seed)
    diag.update({"B": Bt.to_dict(), "isometry": iso.to_dict()})
    return Verdict(iso.holds, iso.defect, tol, None if iso.holds else {"check": "psi_model", **iso.certificate},
                   diag)


# ---------------------------------------------------------- equivalence

def _words(letters: list[np.ndarray], length: int) -> list[np.ndarray]:
    d = letters[0].shape[0]
    out, layer = [np.eye(d, dtype=np.complex128)], [np.eye(d, dtype=np.complex128)]
    for _ in range(length):
        layer = [W @ X for W, X in product(layer, letters)]
        out.extend(layer)
    return out


def trace_gram(A: np.ndarray, word_len: int) -> np.ndarray:
    """tr(u v) for all words u (length <= ceil(L/2)) and v (length <= floor(L/2)) in A_i, A_i^*.

    Together these are the traces of all words of length <= L.
    """
    letters = list(A) + [dagger(M) for M in A]
    U = np.stack([W.ravel() for W in _words(letters, ceil(word_len / 2))])
    V = np.stack([W.T.ravel() for W in _words(letters, word_len // 2)])
    return U @ V.T


def unitary_equiv(A: SymbolTuple, B: SymbolTuple, word_len: int | None = None, tol: float = 1e-8,
                  seed: int = 0) -> Verdict:
    """Simultaneous unitary equivalence of A-tuples.

    Traces of all words in (A_i, A_i^*) up to ``word_len`` (default
    min(2d^2, 8)) must match.  A witness is then built from the space of
    *-intertwiners: a random element X has polar part W with W A_i W^* = B_i.
    The verdict holds only with a witness residual <= tol; a trace pass with
    no witness is reported as unresolved.
    """
    if A.d != B.d or A.n != B.n:
        return Verdict(False, float("inf"), tol,
                       {"status": "shape-mismatch", "d": [A.d, B.d], "n": [A.n, B.n]})
    d = A.d
    L = word_len if word_len is not None else min(2 * d * d, 8)
    c = max(1e-300, float(np.abs(A.A).max()), float(np.abs(B.A).max()))
    GA, GB = trace_gram(A.A / c, L), trace_gram(B.A / c, L)
    mismatch = float(np.abs(GA - GB).max())
    diag = {"word_len": L, "words_checked": int(GA.size), "trace_mismatch": mismatch * 1.0}
    if mismatch > tol * d:
        idx = np.unravel_index(int(np.argmax(np.abs(GA - GB))), GA.shape)
        return Verdict(False, mismatch, tol, {"status": "trace-mismatch", "entry": list(map(int, idx)),
                                              "mismatch": mismatch}, diag)
    lhs = np.concatenate([A.A, np.conj(np.swapaxes(A.A, -1, -2))]) / c
    rhs = np.concatenate([B.A, np.conj(np.swapaxes(B.A, -1, -2))]) / c
    K = intertwiner_kernel(lhs, rhs, tol=1e-9)
    residual, W = float("inf"), None
    rng = np.random.default_rng(seed)
    for _ in range(3 if K.shape[0] else 0):
        coeff = rng.normal(size=K.shape[0]) + 1j * rng.normal(size=K.shape[0])
        X = np.tensordot(coeff, K, axes=1)
        U, _ = scipy.linalg.polar(X)
        r = max(opnorm(U @ Ai @ dagger(U) - Bi) for Ai, Bi in zip(A.A, B.A))
        if r < residual:
            residual, W = r, U
        if residual <= tol:
            break
    diag.update({"intertwiner_dim": int(K.shape[0]), "witness_residual": residual})
    if W is not None:
        diag["witness"] = W
    if residual <= tol:
        return Verdict(True, residual, tol, None, diag)
    return Verdict(False, residual, tol, {"status": "traces-pass, witness-unresolved"}, diag)
