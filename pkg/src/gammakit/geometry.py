"""Points of the symmetrized polydisc: characteristic polynomials, membership,
distinguished-boundary tests, fibers, the maps pi and pi_alpha, samplers.

A point s = (s_1, ..., s_n) lies in Gamma_n exactly when every root of

    p(z) = sum_i (-1)^(n-i) s_(n-i) z^i        (s_0 = 1)

lies in the closed unit disc.  Everything here reduces to locating those
roots, so root accuracy at repeated unimodular roots (the generic situation on
the boundary) is handled by :func:`refine_roots`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .polynomials import elem_sym_all
from .verdict import GammaError, Verdict

MEMBERSHIP_TOL = 1e-9
ROUTES = ("fiber", "recursive", "closure")
_EPS = np.finfo(float).eps


# ---------------------------------------------------------------- types

@dataclass(frozen=True, eq=False)
class GammaPoint:
    """Candidate point (s_1, ..., s_n) of Gamma_n."""

    s: np.ndarray

    def __post_init__(self):
        s = np.array(self.s, dtype=np.complex128).ravel()
        if s.size < 1:
            raise GammaError("a point needs n >= 1 coordinates")
        if not np.all(np.isfinite(s)):
            raise GammaError("non-finite coordinate")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.s.size

    def __iter__(self):
        return iter(self.s)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, GammaPoint) and np.array_equal(self.s, other.s)

    def __repr__(self):
        return f"GammaPoint({np.array2string(self.s, precision=6, separator=', ')})"

    def close_to(self, other: "GammaPoint", tol: float = 1e-9) -> bool:
        return self.n == other.n and float(np.max(np.abs(self.s - other.s))) <= tol

    def to_dict(self) -> dict:
        return {"n": self.n, "s": [[float(c.real), float(c.imag)] for c in self.s]}

    @classmethod
    def from_dict(cls, d: dict) -> "GammaPoint":
        try:
            n = int(d["n"])
            s = [complex(re, im) for re, im in d["s"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise GammaError(f"malformed GammaPoint JSON: {exc}") from exc
        if len(s) != n:
            raise GammaError(f"GammaPoint declares n={n} but has {len(s)} coordinates")
        return cls(np.array(s))

    @classmethod
    def from_json(cls, text: str) -> "GammaPoint":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True, eq=False)
class UniPoly:
    """Univariate complex polynomial, coefficients in ascending degree."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def trim(self, tol: float = 0.0) -> "UniPoly":
        c = self.coeffs
        k = c.size
        while k > 0 and abs(c[k - 1]) <= tol:
            k -= 1
        return UniPoly(c[:k])

    @property
    def degree(self) -> int:
        t = self.trim()
        return t.coeffs.size - 1

    def derivative(self) -> "UniPoly":
        c = self.coeffs
        return UniPoly(c[1:] * np.arange(1, c.size))

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def roots(self) -> np.ndarray:
        return roots(self)

    def __eq__(self, other):
        return isinstance(other, UniPoly) and np.array_equal(self.trim().coeffs, other.trim().coeffs)

    def __repr__(self):
        return f"UniPoly({self.coeffs.tolist()})"


def _as_point(s) -> GammaPoint:
    return s if isinstance(s, GammaPoint) else GammaPoint(np.asarray(s))


# ------------------------------------------------------ characteristic poly

def char_poly_coeffs(S: np.ndarray) -> np.ndarray:
    """Rows of S (m, n) -> ascending coefficient rows (m, n + 1) of p."""
    S = np.atleast_2d(np.asarray(S, dtype=np.complex128))
    m, n = S.shape
    full = np.concatenate([np.ones((m, 1), dtype=np.complex128), S], axis=1)  # s_0 .. s_n
    i = np.arange(n + 1)
    return full[:, n - i] * (-1.0) ** (n - i)


def char_poly(s) -> UniPoly:
    """Monic p(z) = sum_i (-1)^(n-i) s_(n-i) z^i."""
    return UniPoly(char_poly_coeffs(_as_point(s).s[None, :])[0])


# ---------------------------------------------------------------- roots

def _companion_roots(C: np.ndarray) -> np.ndarray:
    """Eigenvalues of companion matrices for monic ascending rows C (m, n+1)."""
    m, n1 = C.shape
    n = n1 - 1
    if n == 0:
        return np.zeros((m, 0), dtype=np.complex128)
    comp = np.zeros((m, n, n), dtype=np.complex128)
    comp[:, 0, :] = -C[:, n - 1 :: -1]
    if n > 1:
        comp[:, np.arange(1, n), np.arange(n - 1)] = 1.0
    return np.linalg.eigvals(comp)


def _taylor_at(c: np.ndarray, x: complex) -> np.ndarray:
    """Coefficients of p(x + h) in h (repeated synthetic division)."""
    a = np.array(c[::-1], dtype=np.complex128)  # descending
    n = a.size - 1
    out = np.empty(n + 1, dtype=np.complex128)
    for j in range(n + 1):
        for i in range(1, n + 1 - j):
            a[i] += x * a[i - 1]
        out[j] = a[n - j]
    return out


def _taylor_noise(c: np.ndarray, x: complex) -> np.ndarray:
    """Rounding-error scale of each Taylor coefficient of p at x."""
    n = c.size - 1
    ax = abs(x)
    absc = np.abs(c)
    return np.array([
        sum(absc[i] * comb(i, j) * ax ** (i - j) for i in range(j, n + 1)) for j in range(n + 1)
    ])


def _groups(r: np.ndarray, radius: float) -> list[list[int]]:
    """Single-linkage clusters of the points r under ``radius``."""
    n = r.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(r[i] - r[j]) <= radius:
                parent[find(i)] = find(j)
    out: dict[int, list[int]] = {}
    for i in range(n):
        out.setdefault(find(i), []).append(i)
    return list(out.values())


def _newton_polish(c: np.ndarray, r: complex, steps: int = 2, others: np.ndarray | None = None) -> complex:
    """Newton steps on p, deflated by ``others`` (the remaining roots) when given.

    Deflation keeps the step well defined next to a tight cluster, where p'
    is tiny and plain Newton stalls in rounding noise.
    """
    p = np.polynomial.polynomial
    dc = c[1:] * np.arange(1, c.size)
    best, best_res = r, abs(p.polyval(r, c))
    x = r
    for _ in range(steps):
        d = p.polyval(x, dc)
        if d == 0:
            break
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            ratio = p.polyval(x, c) / d
            if others is not None and others.size:
                ratio = ratio / (1 - ratio * np.sum(1.0 / (x - others)))
            x = x - ratio
            res = abs(p.polyval(x, c))
        if not np.isfinite(res):
            break
        if res < best_res:
            best, best_res = x, res
    return best


def refine_roots(c: np.ndarray, raw: np.ndarray, radius: float = 1e-2, slack: float = 64.0) -> np.ndarray:
    """Multiplicity-aware clean-up of eigenvalue roots of one polynomial.

    A k-fold root comes out of the eigen-solver as a ring of radius ~eps^(1/k)
    whose centroid is accurate to ~eps.  Roots are grouped by single linkage;
    a group of size k is replaced by k copies of its centroid when the Taylor
    coefficients of orders 0..k-1 at the centroid vanish to within ``slack``
    times their rounding-error scale.  Groups that fail are split with a
    radius three times smaller, down to 1e-9; surviving singletons then get
    Newton polish deflated by the other roots.
    """
    c = np.asarray(c, dtype=np.complex128)
    out = np.array(raw, dtype=np.complex128)

    def settle(idx: list[int], rad: float):
        if len(idx) == 1:
            singles.append(idx[0])
            return
        centre = out[idx].mean()
        k = len(idx)
        t = _taylor_at(c, centre)
        # a k-fold root is a simple root of p^(k-1): polish the centroid there
        for _ in range(3):
            if t[k] == 0:
                break
            cand = centre - t[k - 1] / (k * t[k])
            tc = _taylor_at(c, cand)
            if not abs(tc[k - 1]) < abs(t[k - 1]):
                break
            centre, t = cand, tc
        noise = _taylor_noise(c, centre) * _EPS * slack
        if np.all(np.abs(t[:k]) <= noise[:k]):
            out[idx] = centre
            return
        if rad <= 1e-9:
            singles.extend(idx)
            return
        for g in _groups(out[idx], rad / 3):
            settle([idx[j] for j in g], rad / 3)

    singles: list[int] = []
    for g in _groups(out, radius):
        settle(g, radius)
    settled = np.setdiff1d(np.arange(out.size), singles)
    for i in singles:
        out[i] = _newton_polish(c, out[i], steps=3, others=out[settled])
    return out


def roots_batch(C: np.ndarray, refine: bool = True) -> np.ndarray:
    """Roots of monic ascending coefficient rows C (m, n + 1)."""
    C = np.atleast_2d(np.asarray(C, dtype=np.complex128))
    R = _companion_roots(C)
    n = R.shape[1]
    if not refine or n == 0:
        return R
    if n > 1:
        gap = np.abs(R[:, :, None] - R[:, None, :])
        gap[:, np.arange(n), np.arange(n)] = np.inf
        clustered = gap.min(axis=(1, 2)) <= 1e-2
    else:
        clustered = np.zeros(R.shape[0], dtype=bool)
    simple = ~clustered
    if simple.any():
        R[simple] = _newton_batch(C[simple], R[simple])
    for row in np.flatnonzero(clustered):
        R[row] = refine_roots(C[row], R[row])
    return R


def _horner_rows(C: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Evaluate row polynomials C (m, k) at points X (m, r)."""
    acc = np.zeros_like(X)
    for j in range(C.shape[1] - 1, -1, -1):
        acc = acc * X + C[:, j : j + 1]
    return acc


def _newton_batch(C: np.ndarray, R: np.ndarray, steps: int = 2) -> np.ndarray:
    D = C[:, 1:] * np.arange(1, C.shape[1])
    best = R.copy()
    best_res = np.abs(_horner_rows(C, best))
    x = R.copy()
    for _ in range(steps):
        d = _horner_rows(D, x)
        ok = d != 0
        step = np.zeros_like(x)
        step[ok] = _horner_rows(C, x)[ok] / d[ok]
        x = x - step
        res = np.abs(_horner_rows(C, x))
        better = res < best_res
        best[better] = x[better]
        best_res[better] = res[better]
    return best


def roots(p: UniPoly) -> np.ndarray:
    """All complex roots (with multiplicity) via companion-matrix eigenvalues."""
    q = p.trim()
    if q.coeffs.size == 0:
        raise GammaError("the zero polynomial has no well-defined roots")
    if q.coeffs.size == 1:
        return np.zeros(0, dtype=np.complex128)
    monic = q.coeffs / q.coeffs[-1]
    return roots_batch(monic[None, :])[0]


# ---------------------------------------------------------------- fibers

def order_fiber(lam: np.ndarray) -> np.ndarray:
    """Sort by argument in [0, 2 pi), then modulus; angles rounded so ties are stable."""
    lam = np.asarray(lam, dtype=np.complex128)
    ang = np.round(np.mod(np.angle(lam), 2 * np.pi), 10)
    ang[ang >= np.round(2 * np.pi, 10)] = 0.0
    mod = np.round(np.abs(lam), 10)
    return lam[np.lexsort((mod, ang))]


def fiber(s) -> np.ndarray:
    """A root multiset lambda with s(lambda) = s, in deterministic order."""
    return order_fiber(roots(char_poly(s)))


def symmetrize_point(z) -> GammaPoint:
    return GammaPoint(elem_sym_all(np.asarray(z, dtype=np.complex128)))


# --------------------------------------------------------------- membership

def in_gamma_batch(S: np.ndarray, tol: float = MEMBERSHIP_TOL):
    """Vectorised membership: (holds, defect, max-modulus root) per row."""
    S = np.atleast_2d(np.asarray(S, dtype=np.complex128))
    R = roots_batch(char_poly_coeffs(S))
    mod = np.abs(R)
    arg = np.argmax(mod, axis=1)
    worst = R[np.arange(R.shape[0]), arg]
    defect = np.maximum(0.0, mod.max(axis=1) - 1.0)
    return defect <= tol, defect, worst


def in_gamma(s, tol: float = MEMBERSHIP_TOL) -> Verdict:
    """Membership in Gamma_n: every root of char_poly(s) has modulus <= 1 + tol."""
    pt = _as_point(s)
    _, defect, worst = in_gamma_batch(pt.s[None, :], tol)
    d = float(defect[0])
    return Verdict.from_defect(d, tol, certificate={"root": complex(worst[0])} if d > tol else None,
                               max_root_modulus=float(abs(worst[0])))


def is_self_inversive(p: UniPoly, tol: float = MEMBERSHIP_TOL) -> Verdict:
    """Test z^d conj(p(1/conj z)) = omega p(z) for a unimodular omega.

    omega is read off the largest-modulus coefficient; the defect is the
    max-abs residual of the conjugate-reversed coefficients against omega * p,
    relative to the largest coefficient.
    """
    c = p.trim().coeffs
    if c.size < 2:
        raise GammaError("self-inversiveness needs degree >= 1")
    rev = np.conj(c[::-1])
    j = int(np.argmax(np.abs(c)))
    omega = rev[j] / c[j]
    omega = omega / abs(omega) if abs(omega) > 0 else 1.0 + 0j
    scale = float(np.abs(c).max())
    defect = float(np.abs(rev - omega * c).max()) / scale
    return Verdict.from_defect(defect, tol, certificate={"omega": complex(omega)})


def cohn_boundary_batch(S: np.ndarray, tol: float = MEMBERSHIP_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cohn's criterion for all roots of char_poly(s) on the unit circle.

    p must be self-inversive and p' must have every root in the closed disc;
    p'/n is char_poly(pi(s)).  Returns (holds, self-inversive defect,
    derivative-root defect) per row.
    """
    S = np.atleast_2d(np.asarray(S, dtype=np.complex128))
    C = char_poly_coeffs(S)
    rev = np.conj(C[:, ::-1])
    j = np.argmax(np.abs(C), axis=1)
    rows = np.arange(C.shape[0])
    omega = rev[rows, j] / C[rows, j]
    omega = omega / np.abs(omega)
    scale = np.abs(C).max(axis=1)
    inv_def = np.abs(rev - omega[:, None] * C).max(axis=1) / scale
    if S.shape[1] == 1:
        der_def = np.zeros(S.shape[0])
    else:
        _, der_def, _ = in_gamma_batch(project_batch(S), tol)
    return (inv_def <= tol) & (der_def <= tol), inv_def, der_def


def cohn_boundary(s, tol: float = MEMBERSHIP_TOL) -> Verdict:
    pt = _as_point(s)
    _, inv_def, der_def = cohn_boundary_batch(pt.s[None, :], tol)
    inv_d, der_d = float(inv_def[0]), float(der_def[0])
    cert = None
    if inv_d > tol:
        cert = {"condition": "self_inversive", "defect": inv_d}
    elif der_d > tol:
        cert = {"condition": "derivative_roots", "defect": der_d}
    return Verdict.from_defect(max(inv_d, der_d), tol, certificate=cert,
                               self_inversive_defect=inv_d, derivative_root_defect=der_d)


# ---------------------------------------------------------------- maps

def gammas(n: int) -> np.ndarray:
    """(n - i) / n for i = 1 .. n - 1."""
    return (n - np.arange(1, n)) / n


def project(s) -> GammaPoint:
    """pi(s) = (gamma_1 s_1, ..., gamma_(n-1) s_(n-1)), gamma_i = (n - i)/n."""
    pt = _as_point(s)
    if pt.n < 2:
        raise GammaError("projection needs n >= 2")
    return GammaPoint(gammas(pt.n) * pt.s[:-1])


def project_batch(S: np.ndarray) -> np.ndarray:
    S = np.atleast_2d(S)
    return S[:, :-1] * gammas(S.shape[1])


def embed(s, alpha: complex) -> GammaPoint:
    """pi_alpha(s) = (alpha + s_1, alpha s_1 + s_2, ..., alpha s_(n-1) + s_n, alpha s_n)."""
    pt = _as_point(s)
    return GammaPoint(embed_batch(pt.s[None, :], alpha)[0])


def embed_batch(S: np.ndarray, alpha) -> np.ndarray:
    S = np.atleast_2d(np.asarray(S, dtype=np.complex128))
    m, n = S.shape
    alpha = np.broadcast_to(np.asarray(alpha, dtype=np.complex128), (m,))
    prev = np.concatenate([np.ones((m, 1)), S], axis=1)  # s_0 .. s_n
    cur = np.concatenate([S, np.zeros((m, 1))], axis=1)  # s_1 .. s_{n+1}
    return alpha[:, None] * prev + cur


def boundary_from_mu(mu, theta: float, tol: float = MEMBERSHIP_TOL) -> GammaPoint:
    """Point of b Gamma_n with s_n = exp(i theta) over mu in b Gamma_(n-1).

    s_j = mu_j + conj(mu_(n-j)) exp(i theta), with mu_0 = 1 and mu_n = 0.
    """
    m = _as_point(mu)
    check = on_boundary(m, tol, route="closure")
    if not check.holds:
        raise GammaError(f"mu is not on the distinguished boundary (defect {check.defect:.3g})")
    n = m.n + 1
    full = np.concatenate([[1.0], m.s, [0.0]]).astype(np.complex128)  # mu_0 .. mu_n
    w = np.exp(1j * theta)
    j = np.arange(1, n + 1)
    return GammaPoint(full[j] + np.conj(full[n - j]) * w)


# ------------------------------------------------------- boundary routes

def boundary_routes_batch(S: np.ndarray, tol: float = MEMBERSHIP_TOL) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Evaluate the three characterizations of b Gamma_n on every row of S.

    Returns {route: (holds, defect)}.

    fiber      all roots of char_poly unimodular
    recursive  |s_n| = 1, conj(s_n) s_i = conj(s_(n-i)), pi(s) in Gamma_(n-1)
    closure    s in Gamma_n and |s_n| = 1
    """
    S = np.atleast_2d(np.asarray(S, dtype=np.complex128))
    m, n = S.shape
    R = roots_batch(char_poly_coeffs(S))
    mod = np.abs(R)
    fiber_def = np.abs(mod - 1.0).max(axis=1)
    unimod = np.abs(np.abs(S[:, -1]) - 1.0)
    in_def = np.maximum(0.0, mod.max(axis=1) - 1.0)
    closure_def = np.maximum(in_def, unimod)
    if n == 1:
        rec_def = unimod
    else:
        i = np.arange(1, n)
        sym = np.abs(np.conj(S[:, -1:]) * S[:, i - 1] - np.conj(S[:, n - i - 1])).max(axis=1)
        _, proj_def, _ = in_gamma_batch(project_batch(S), tol)
        rec_def = np.maximum.reduce([unimod, sym, proj_def])
    return {
        "fiber": (fiber_def <= tol, fiber_def),
        "recursive": (rec_def <= tol, rec_def),
        "closure": (closure_def <= tol, closure_def),
    }


def on_boundary(s, tol: float = MEMBERSHIP_TOL, route: str = "all", max_escalations: int = 3) -> Verdict:
    """Distinguished-boundary test by one route, or all three with agreement check.

    With ``route="all"`` a disagreement triggers up to ``max_escalations``
    re-evaluations at tol * 10^k.  A disagreement that survives escalation is
    reported in ``diagnostics["inconsistent"]`` and the closure route decides.
    """
    pt = _as_point(s)
    if route not in ROUTES + ("all",):
        raise GammaError(f"unknown route {route!r}")
    res = boundary_routes_batch(pt.s[None, :], tol)
    if route != "all":
        d = float(res[route][1][0])
        return Verdict.from_defect(d, tol, certificate=None if d <= tol else {"route": route}, route=route)
    routes = {r: {"holds": bool(res[r][0][0]), "defect": float(res[r][1][0])} for r in ROUTES}
    t = tol
    escalations = 0
    while len({v["holds"] for v in routes.values()}) > 1 and escalations < max_escalations:
        escalations += 1
        t = tol * 10 ** escalations
        res = boundary_routes_batch(pt.s[None, :], t)
        routes = {r: {"holds": bool(res[r][0][0]), "defect": float(res[r][1][0])} for r in ROUTES}
    consistent = len({v["holds"] for v in routes.values()}) == 1
    d = routes["closure"]["defect"]
    cert = None
    if not routes["closure"]["holds"]:
        cert = {"failed_routes": [r for r in ROUTES if not routes[r]["holds"]]}
    v = Verdict.from_defect(d, t, certificate=cert, routes=routes, escalations=escalations,
                            inconsistent=not consistent)
    return v


# ---------------------------------------------------------------- sampling

def sample_array(n: int, count: int, boundary: bool = False, seed: int | None = 0) -> tuple[np.ndarray, np.ndarray]:
    """(points (count, n), underlying polydisc/torus draws (count, n))."""
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0.0, 2 * np.pi, size=(count, n))
    if boundary:
        Z = np.exp(1j * ang)
    else:
        Z = np.sqrt(rng.uniform(0.0, 1.0, size=(count, n))) * np.exp(1j * ang)
    return elem_sym_all(Z) if count else np.zeros((0, n), complex), Z


def sample(n: int, count: int, boundary: bool = False, seed: int | None = 0) -> list[GammaPoint]:
    """Symmetrizations of i.i.d. uniform points of the closed polydisc (or torus)."""
    S, _ = sample_array(n, count, boundary, seed)
    return [GammaPoint(row) for row in S]


def points_to_csv(points: Iterable[GammaPoint | Sequence[complex]]) -> str:
    """One point per row, real and imaginary parts interleaved."""
    rows = []
    for p in points:
        s = p.s if isinstance(p, GammaPoint) else np.asarray(p, dtype=np.complex128)
        rows.append(",".join(f"{x.real!r},{x.imag!r}" for x in map(complex, s)))
    return "\n".join(rows) + ("\n" if rows else "")


def points_from_csv(text: str) -> list[GammaPoint]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        vals = [float(v) for v in line.split(",")]
        out.append(GammaPoint(np.array(vals[0::2]) + 1j * np.array(vals[1::2])))
    return out
