"""Decision procedures for Gamma_n-contractions, unitaries and isometries.

Spectral-set tests are falsification tests: a tuple "passes" when no
polynomial in a finite battery violates

    ||q(S)|| <= sup_{Gamma_n} |q|,

and a failing verdict always carries the violating polynomial.  The supremum
is taken over the distinguished boundary s(T^n), where it is attained.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from math import comb, pi

import numpy as np
import scipy.optimize

from . import _backend
from .geometry import boundary_routes_batch, fiber, gammas
from .operators import (
    MatrixTuple,
    NORM_TOL,
    commutation_defect,
    commute_tol,
    dagger,
    is_normal_tuple,
    joint_diagonalize,
    opnorm,
    poly_of_tuple,
    symmetrize_tuple,
)
from .polynomials import MultiPoly, elem_sym_all, monomials, reduce_symmetric, kv_polynomial
from .verdict import ConvergenceError, GammaError, Verdict

MARGIN_TOL = 1e-8


def default_grid(n: int) -> int:
    """Points per angle for torus searches: 64 up to three angles, coarser beyond."""
    return {1: 256, 2: 128, 3: 64, 4: 32}.get(n, 16)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("GAMMAKIT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Budget:
    """Falsification budget for spectral-set tests."""

    max_degree: int = 4
    random_polys: int = 64
    grid: int | None = None

    def grid_for(self, n: int) -> int:
        return self.grid if self.grid is not None else default_grid(n)


DEFAULT_BUDGET = Budget()


# ------------------------------------------------------------ torus sups

@dataclass(frozen=True)
class SupResult:
    """sup of |q| over Gamma_n, found on s(T^n).

    ``value`` is attained at ``argmax`` (a point of T^n), so it is a lower
    bound; ``value + lipschitz_bound * pi / resolution`` is a certified upper
    bound.
    """

    value: float
    argmax: np.ndarray
    resolution: int
    lipschitz_bound: float

    @property
    def slack(self) -> float:
        return self.lipschitz_bound * pi / self.resolution

    @property
    def upper(self) -> float:
        return self.value + self.slack

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmax": self.argmax,
            "resolution": self.resolution,
            "lipschitz_bound": self.lipschitz_bound,
            "certified_upper": self.upper,
        }


def lipschitz_bound(q: MultiPoly) -> float:
    """Bound on sum_j sup |d/dtheta_j q(s(e^{i theta}))| over the torus.

    On T^n, |s_k| <= C(n, k) and |d s_k / d theta_j| <= C(n-1, k-1).
    """
    n = q.n_vars
    cap = [comb(n, k) for k in range(n + 1)]
    per_angle = 0.0
    for e, c in q.terms.items():
        for k, a in enumerate(e, start=1):
            if not a:
                continue
            rest = 1.0
            for l, b in enumerate(e, start=1):
                rest *= cap[l] ** (b - (1 if l == k else 0))
            per_angle += abs(c) * a * comb(n - 1, k - 1) * rest
    return n * per_angle


class _TorusObjective:
    """|q(s(e^{i theta}))| and its gradient in theta."""

    def __init__(self, q: MultiPoly):
        self.n = q.n_vars
        self.exps, self.coeffs = q.arrays()
        self.partials = [q.derivative(k).arrays() for k in range(1, self.n + 1)]

    def values(self, Theta: np.ndarray) -> np.ndarray:
        S = elem_sym_all(np.exp(1j * np.atleast_2d(Theta)))
        return np.abs(_backend.poly_eval_batch(self.exps, self.coeffs, S))

    def neg_sq_and_grad(self, theta: np.ndarray):
        z = np.exp(1j * theta)
        s = elem_sym_all(z)
        g = _backend.poly_eval_batch(self.exps, self.coeffs, s[None, :])[0]
        dq = np.array([_backend.poly_eval_batch(e, c, s[None, :])[0] if e.shape[0] else 0j
                       for e, c in self.partials])
        grad = np.empty(self.n)
        for j in range(self.n):
            others = np.delete(z, j)
            e_rest = np.concatenate([[1.0], elem_sym_all(others)]) if self.n > 1 else np.array([1.0])
            ds = 1j * z[j] * e_rest[: self.n]  # d s_k / d theta_j for k = 1..n
            grad[j] = 2.0 * np.real(np.conj(g) * np.dot(dq, ds))
        return -abs(g) ** 2, -grad


def _select_seeds(idx: np.ndarray, vals: np.ndarray, grid: int, count: int) -> list[np.ndarray]:
    seeds: list[np.ndarray] = []
    for row in idx[np.argsort(-vals, kind="stable")]:
        if all(np.max(np.minimum(np.abs(row - s), grid - np.abs(row - s))) > 2 for s in seeds):
            seeds.append(row)
        if len(seeds) >= count:
            break
    return seeds


def _refine(obj: _TorusObjective, theta0: np.ndarray, step: float, iters: int) -> tuple[float, np.ndarray]:
    theta = theta0.astype(float).copy()
    best = float(obj.values(theta)[0])
    offsets = np.linspace(-1.0, 1.0, 33)
    h = step
    for _ in range(iters):
        for j in range(obj.n):
            trial = np.repeat(theta[None, :], offsets.size, axis=0)
            trial[:, j] += h * offsets
            v = obj.values(trial)
            k = int(np.argmax(v))
            if v[k] > best:
                best, theta = float(v[k]), trial[k]
        h *= 0.25
    res = scipy.optimize.minimize(obj.neg_sq_and_grad, theta, jac=True, method="BFGS",
                                  options={"gtol": 1e-13, "maxiter": 200})
    val = float(obj.values(res.x)[0])
    if val > best:
        best, theta = val, res.x
    return best, theta


@lru_cache(maxsize=4096)
def _sup_cached(q: MultiPoly, grid: int, refine_iters: int, threads: int) -> SupResult:
    n = q.n_vars
    exps, coeffs = q.arrays()
    if all(sum(e) == 0 for e in q.terms):
        c = abs(q.coefficient((0,) * n))
        return SupResult(c, np.ones(n, dtype=np.complex128), grid, 0.0)
    k = 64
    if threads > 1 and grid >= 2 * threads:
        cuts = np.linspace(0, grid, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda ab: _backend.torus_grid_top(exps, coeffs, n, grid, k, int(ab[0]), int(ab[1])),
                                zip(cuts[:-1], cuts[1:])))
        vals = np.concatenate([p[0] for p in parts])
        idx = np.concatenate([p[1] for p in parts])
    else:
        vals, idx = _backend.torus_grid_top(exps, coeffs, n, grid, k)
    obj = _TorusObjective(q)
    best_val, best_theta = -1.0, None
    for seed in _select_seeds(idx, vals, grid, 8):
        theta0 = 2 * pi * seed / grid
        v, th = _refine(obj, theta0, 2 * pi / grid, refine_iters)
        if v > best_val:
            best_val, best_theta = v, th
    return SupResult(best_val, np.exp(1j * np.asarray(best_theta)), grid, lipschitz_bound(q))


def sup_on_gamma(q: MultiPoly, n: int | None = None, grid: int | None = None,
                 refine_iters: int = 6, threads: int | None = None) -> SupResult:
    """sup over Gamma_n of |q|, searched on s(T^n).

    A uniform grid of T^n restricted to non-decreasing angle tuples (q o s is
    symmetric, so this loses nothing) is scanned by the compiled kernel; the
    best separated grid points are refined by coordinate sweeps and a BFGS
    polish.
    """
    if n is None:
        n = q.n_vars
    if q.n_vars != n:
        raise GammaError(f"polynomial has {q.n_vars} variables, expected {n}")
    grid = default_grid(n) if grid is None else int(grid)
    if grid < 4:
        raise GammaError("grid must be at least 4")
    return _sup_cached(q, grid, int(refine_iters), threads or default_threads())


# --------------------------------------------------------------- batteries

def canonical_battery(n: int, max_degree: int = 4) -> list[tuple[str, MultiPoly]]:
    """Coordinates, pairwise products, pure powers, and the KV reduction for n = 3."""
    out = []
    x = [MultiPoly.variable(k, n) for k in range(1, n + 1)]
    for k in range(n):
        out.append((f"x{k + 1}", x[k]))
    for j in range(n):
        for k in range(j + 1, n):
            out.append((f"x{j + 1}*x{k + 1}", x[j] * x[k]))
    for k in range(n):
        for m in range(2, max_degree + 1):
            out.append((f"x{k + 1}^{m}", x[k] ** m))
    if n == 3:
        out.append(("kv", reduce_symmetric(kv_polynomial())))
    return out


@lru_cache(maxsize=64)
def random_battery(n: int, max_degree: int, count: int, seed: int) -> tuple[tuple[str, MultiPoly], ...]:
    """Dense polynomials with i.i.d. complex Gaussian coefficients and random degree."""
    rng = np.random.default_rng(seed)
    out = []
    for r in range(count):
        deg = int(rng.integers(1, max_degree + 1))
        exps = monomials(n, deg)
        c = (rng.normal(size=len(exps)) + 1j * rng.normal(size=len(exps))) / np.sqrt(2 * len(exps))
        out.append((f"random[{r}]", MultiPoly(n, dict(zip(exps, c)))))
    return tuple(out)


def battery(n: int, budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> list[tuple[str, MultiPoly]]:
    return canonical_battery(n, budget.max_degree) + list(
        random_battery(n, budget.max_degree, budget.random_polys, seed))


# ------------------------------------------------------- vN inequality

def _as_tuple(S) -> MatrixTuple:
    if isinstance(S, MatrixTuple):
        return S
    if hasattr(S, "s"):
        return MatrixTuple.from_point(S)
    return MatrixTuple(np.asarray(S))


def vn_margin(S, q: MultiPoly, grid: int | None = None) -> float:
    """||q(S)|| - sup_{Gamma_n}|q|; positive means q violates the inequality for S."""
    S = _as_tuple(S)
    if q.n_vars != S.n:
        raise GammaError(f"polynomial has {q.n_vars} variables, tuple has {S.n} entries")
    return opnorm(poly_of_tuple(q, S)) - sup_on_gamma(q, S.n, grid).value


def contraction_verdict(S, budget: Budget = DEFAULT_BUDGET, seed: int = 0,
                        tol: float = MARGIN_TOL, polys: list[tuple[str, MultiPoly]] | None = None) -> Verdict:
    """Sampled test of Gamma_n as a spectral set for S.

    A pass only says that no polynomial in the battery (canonical entries
    first, then ``budget.random_polys`` random ones) exceeds its supremum by
    more than ``tol``; it is never a proof.  The certificate is the first
    violator in battery order.
    """
    S = _as_tuple(S)
    n = S.n
    grid = budget.grid_for(n)
    polys = battery(n, budget, seed) if polys is None else polys
    margins = []
    first = None
    for label, q in polys:
        m = opnorm(poly_of_tuple(q, S)) - sup_on_gamma(q, n, grid).value
        margins.append(m)
        if m > tol and first is None:
            first = {"label": label, "poly": str(q), "margin": m}
    worst = int(np.argmax(margins))
    return Verdict.from_defect(max(margins), tol, certificate=first, sampled=True,
                               polys_checked=len(polys), grid=grid,
                               worst={"label": polys[worst][0], "margin": margins[worst]})


# ----------------------------------------------------- structural checks

def _commuting_failure(S: MatrixTuple, tol: float) -> Verdict | None:
    cd = commutation_defect(S)
    ctol = commute_tol(S) + tol
    if cd > ctol:
        return Verdict.from_defect(cd, tol, certificate={"check": "commuting", "defect": cd})
    return None


def _projected(S: MatrixTuple) -> MatrixTuple:
    return MatrixTuple(S.mats[:-1] * gammas(S.n)[:, None, None])


def _isometry_identities(S: MatrixTuple) -> tuple[float, float, float]:
    """(||Sn* Sn - I||, ||Sn Sn* - I||, max_i ||Sn* S_i - S_(n-i)*||)."""
    n = S.n
    Sn = S.mats[-1]
    eye = np.eye(S.dim)
    a1 = opnorm(dagger(Sn) @ Sn - eye)
    a2 = opnorm(Sn @ dagger(Sn) - eye)
    b = max((opnorm(dagger(Sn) @ S.mats[i - 1] - dagger(S.mats[n - i - 1])) for i in range(1, n)), default=0.0)
    return a1, a2, b


def is_gamma_unitary(S, tol: float = NORM_TOL, grid: int | None = None,
                     budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> Verdict:
    """Gamma_n-unitary test.

    Decides by the algebraic route: S_n unitary, S_n* S_i = S_(n-i)*, and the
    scaled (n-1)-tuple passing :func:`contraction_verdict`.  The spectral route
    (normal entries, joint spectrum inside b Gamma_n) is evaluated as a
    cross-check and reported under ``diagnostics``.
    """
    S = _as_tuple(S)
    bad = _commuting_failure(S, tol)
    if bad is not None:
        return bad
    a1, a2, b = _isometry_identities(S)
    checks = {"unitary_last": max(a1, a2), "adjoint_relations": b}
    cert = None
    if S.n > 1:
        if grid is not None:
            budget = Budget(budget.max_degree, budget.random_polys, grid)
        cv = contraction_verdict(_projected(S), budget, seed, tol=max(tol, MARGIN_TOL))
        checks["projected_contraction"] = cv.defect
        if not cv.holds:
            cert = {"check": "projected_contraction", **(cv.certificate or {})}
    route_ii = max(checks.values())
    route_i = spectral_unitary_defect(S, tol)
    if cert is None and route_ii > tol:
        name = max(checks, key=checks.get)
        cert = {"check": name, "defect": checks[name]}
    agree = (route_ii <= tol) == (route_i <= tol)
    return Verdict.from_defect(route_ii, tol, certificate=cert, checks=checks,
                               route_algebraic=route_ii, route_spectral=route_i, routes_agree=agree)


def spectral_unitary_defect(S, tol: float = NORM_TOL) -> float:
    """Defect of the spectral characterization: normality, then joint spectrum in b Gamma_n."""
    S = _as_tuple(S)
    nv = is_normal_tuple(S, tol * max(1.0, max(opnorm(M) for M in S.mats)))
    if not nv.holds:
        return nv.defect
    try:
        points, _ = joint_diagonalize(S, tol)
    except (GammaError, ConvergenceError):
        return float("inf")
    res = boundary_routes_batch(points, tol)
    return float(res["closure"][1].max())


def unitary_generators(S, tol: float = 1e-8, seed: int = 0) -> MatrixTuple:
    """Commuting unitaries U_1, ..., U_n with s(U) = S for a Gamma_n-unitary S."""
    S = _as_tuple(S)
    try:
        points, Q = joint_diagonalize(S, NORM_TOL, seed)
    except (GammaError, ConvergenceError) as exc:
        raise GammaError(f"not a Gamma_n-unitary: {exc}") from exc
    lam = np.empty_like(points)
    cache: dict[bytes, np.ndarray] = {}
    for r, p in enumerate(points):
        key = np.round(p, 9).tobytes()
        if key not in cache:
            cache[key] = fiber(p)
        lam[r] = cache[key]
    off = float(np.abs(np.abs(lam) - 1.0).max()) if lam.size else 0.0
    if off > tol:
        raise GammaError(f"joint spectrum leaves b Gamma_n: fiber modulus off by {off:.3g}")
    lam = lam / np.abs(lam)
    U = np.stack([Q @ np.diag(lam[:, k]) @ dagger(Q) for k in range(S.n)])
    return MatrixTuple(U)


def is_gamma_isometry(S, tol: float = NORM_TOL, grid: int | None = None,
                      budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> Verdict:
    """S_n* S_n = I, S_n* S_i = S_(n-i)*, scaled (n-1)-tuple a Gamma_(n-1)-contraction.

    Model tuples are checked at symbol level (see
    :func:`gammakit.hardy.model_isometry_verdict`).
    """
    from .hardy import ModelTuple, model_isometry_verdict

    if grid is not None:
        budget = Budget(budget.max_degree, budget.random_polys, grid)
    if isinstance(S, ModelTuple):
        return model_isometry_verdict(S, tol, budget, seed)
    S = _as_tuple(S)
    bad = _commuting_failure(S, tol)
    if bad is not None:
        return bad
    a1, _, b = _isometry_identities(S)
    checks = {"isometric_last": a1, "adjoint_relations": b}
    cert = None
    if S.n > 1:
        cv = contraction_verdict(_projected(S), budget, seed, tol=max(tol, MARGIN_TOL))
        checks["projected_contraction"] = cv.defect
        if not cv.holds:
            cert = {"check": "projected_contraction", **(cv.certificate or {})}
    d = max(checks.values())
    if cert is None and d > tol:
        name = max(checks, key=checks.get)
        cert = {"check": name, "defect": checks[name]}
    return Verdict.from_defect(d, tol, certificate=cert, checks=checks)


def is_gamma_coisometry(S, tol: float = NORM_TOL, grid: int | None = None,
                        budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> Verdict:
    """Gamma_n-isometry test applied to the adjoint tuple."""
    from .hardy import ModelTuple

    adj = S.adjoint() if isinstance(S, ModelTuple) else _as_tuple(S).H
    return is_gamma_isometry(adj, tol, grid, budget, seed)


def product_unitary_promotion(T, tol: float = NORM_TOL, budget: Budget = DEFAULT_BUDGET,
                              seed: int = 0) -> Verdict:
    """Commuting contractions with unitary product: each factor unitary, s(T) a Gamma_n-unitary.

    Precondition failures come back as a failing verdict whose certificate
    has ``stage = "precondition"``.
    """
    T = _as_tuple(T)
    eye = np.eye(T.dim)

    def pre_fail(reason: str, defect: float) -> Verdict:
        return Verdict.from_defect(max(defect, np.nextafter(tol, np.inf)), tol,
                                   certificate={"stage": "precondition", "reason": reason, "defect": defect})

    cd = commutation_defect(T)
    if cd > commute_tol(T) + tol:
        return pre_fail("not commuting", cd)
    norms = [opnorm(M) for M in T.mats]
    if max(norms) > 1 + tol:
        return pre_fail(f"T_{int(np.argmax(norms)) + 1} is not a contraction", max(norms) - 1)
    P = eye
    for M in T.mats:
        P = P @ M
    pu = max(opnorm(dagger(P) @ P - eye), opnorm(P @ dagger(P) - eye))
    if pu > tol:
        return pre_fail("product is not unitary", pu)
    derived = 2 * T.n * tol
    unit = [max(opnorm(dagger(M) @ M - eye), opnorm(M @ dagger(M) - eye)) for M in T.mats]
    gu = is_gamma_unitary(symmetrize_tuple(T), max(tol, derived), budget=budget, seed=seed)
    d = max(max(unit) - derived + tol, gu.defect) if max(unit) > derived else gu.defect
    cert = None
    if max(unit) > derived:
        cert = {"stage": "factors", "index": int(np.argmax(unit)) + 1, "defect": max(unit)}
    elif not gu.holds:
        cert = {"stage": "symmetrization", **(gu.certificate or {})}
    return Verdict.from_defect(d, max(tol, derived), certificate=cert, factor_unitarity=unit,
                               gamma_unitary=gu.to_dict())
