"""Sparse multivariate polynomials, elementary symmetric functions and the
reduction of symmetric polynomials to polynomials in s_1, ..., s_n.
"""
from __future__ import annotations

import itertools
import re
from functools import lru_cache
from math import comb
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import _backend

COEFF_TOL = 1e-10


class MultiPoly:
    """Complex polynomial in ``n_vars`` variables stored as {exponent: coefficient}.

    Exponent tuples compare lexicographically, which is the x_1 > ... > x_n
    monomial order used by :func:`reduce_symmetric`.  Instances are immutable
    and hashable.
    """

    __slots__ = ("n_vars", "_terms", "_hash")

    def __init__(self, n_vars: int, terms: Mapping[Sequence[int], complex] | None = None, tol: float = 0.0):
        if n_vars < 1:
            raise ValueError("n_vars must be positive")
        clean: dict[tuple[int, ...], complex] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n_vars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for {n_vars} variables")
            clean[exp] = clean.get(exp, 0j) + complex(c)
        self.n_vars = int(n_vars)
        self._terms = {e: c for e, c in clean.items() if abs(c) > tol}
        self._hash = None

    # construction helpers
    @classmethod
    def constant(cls, c: complex, n_vars: int) -> "MultiPoly":
        return cls(n_vars, {(0,) * n_vars: c})

    @classmethod
    def variable(cls, k: int, n_vars: int) -> "MultiPoly":
        """The coordinate x_k, 1-based."""
        if not 1 <= k <= n_vars:
            raise ValueError(f"variable index {k} out of range 1..{n_vars}")
        exp = [0] * n_vars
        exp[k - 1] = 1
        return cls(n_vars, {tuple(exp): 1.0})

    @property
    def terms(self) -> Mapping[tuple[int, ...], complex]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def max_exponent(self) -> int:
        return max((max(e) for e in self._terms), default=0)

    def coefficient(self, exp: Sequence[int]) -> complex:
        return self._terms.get(tuple(exp), 0j)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(exponents (T, n) int64, coefficients (T,) complex) in sorted order."""
        items = sorted(self._terms.items())
        exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), self.n_vars)
        coeffs = np.array([c for _, c in items], dtype=np.complex128)
        return exps, coeffs

    def chop(self, tol: float = COEFF_TOL) -> "MultiPoly":
        return MultiPoly(self.n_vars, self._terms, tol=tol)

    # arithmetic
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.n_vars != self.n_vars:
                raise ValueError("variable count mismatch")
            return other
        return MultiPoly.constant(complex(other), self.n_vars)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0j) + c
        return MultiPoly(self.n_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.n_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = complex(other)
            return MultiPoly(self.n_vars, {e: c * v for e, v in self._terms.items()})
        other = self._coerce(other)
        out: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0j) + c1 * c2
        return MultiPoly(self.n_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(1.0, self.n_vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.n_vars == other.n_vars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n_vars, frozenset(self._terms.items())))
        return self._hash

    def allclose(self, other: "MultiPoly", tol: float = COEFF_TOL) -> bool:
        return max_coeff_diff(self, other) <= tol

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # transformations
    def permute(self, perm: Sequence[int]) -> "MultiPoly":
        """p(z_{perm[0]}, ..., z_{perm[n-1]}) with 0-based ``perm``."""
        inv = np.argsort(perm)
        return MultiPoly(self.n_vars, {tuple(e[i] for i in inv): c for e, c in self._terms.items()})

    def derivative(self, k: int) -> "MultiPoly":
        """Partial derivative in x_k, 1-based."""
        out = {}
        for e, c in self._terms.items():
            if e[k - 1]:
                ne = list(e)
                ne[k - 1] -= 1
                out[tuple(ne)] = c * e[k - 1]
        return MultiPoly(self.n_vars, out)

    def compose(self, subs: Sequence["MultiPoly"]) -> "MultiPoly":
        """Substitute ``subs[k]`` for x_{k+1}; all substitutes share one ring."""
        if len(subs) != self.n_vars:
            raise ValueError("need one substitute per variable")
        m = subs[0].n_vars
        powers = [[MultiPoly.constant(1.0, m)] for _ in subs]
        result = MultiPoly(m)
        for e, c in self._terms.items():
            term = MultiPoly.constant(c, m)
            for k, a in enumerate(e):
                while len(powers[k]) <= a:
                    powers[k].append(powers[k][-1] * subs[k])
                if a:
                    term = term * powers[k][a]
            result = result + term
        return result

    # evaluation
    def __call__(self, z):
        return evaluate(self, z)

    # text form
    def to_text(self) -> str:
        lines = [f"# {self.n_vars} variables"]
        for e, c in sorted(self._terms.items(), reverse=True):
            lines.append(f"{c.real!r} {c.imag!r} : " + " ".join(map(str, e)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, n_vars: int | None = None) -> "MultiPoly":
        """Parse the ``re im : e1 ... en`` one-term-per-line format."""
        terms: dict[tuple[int, ...], complex] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            head = re.match(r"\s*#\s*(\d+)\s+variables?\b", raw)
            if head and n_vars is None:
                n_vars = int(head.group(1))
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                lhs, rhs = line.split(":")
                re_s, im_s = lhs.split()
                exp = tuple(int(t) for t in rhs.split())
            except ValueError as exc:
                raise ValueError(f"line {lineno}: cannot parse {raw!r}") from exc
            if n_vars is None:
                n_vars = len(exp)
            if len(exp) != n_vars:
                raise ValueError(f"line {lineno}: expected {n_vars} exponents")
            terms[exp] = terms.get(exp, 0j) + complex(float(re_s), float(im_s))
        if n_vars is None:
            raise ValueError("empty polynomial text needs an explicit variable count")
        return cls(n_vars, terms)

    def __repr__(self):
        return f"MultiPoly({self.n_vars}, {self._terms!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in sorted(self._terms.items(), reverse=True):
            mono = "*".join(
                f"x{k + 1}" + (f"^{a}" if a > 1 else "") for k, a in enumerate(e) if a
            )
            if c.imag == 0:
                cs = f"{c.real:g}"
            else:
                cs = f"({c.real:g}{c.imag:+g}j)"
            if mono:
                parts.append(mono if cs == "1" else ("-" + mono if cs == "-1" else f"{cs}*{mono}"))
            else:
                parts.append(cs)
        return " + ".join(parts).replace("+ -", "- ")


def max_coeff_diff(p: MultiPoly, q: MultiPoly) -> float:
    keys = set(p.terms) | set(q.terms)
    return max((abs(p.coefficient(e) - q.coefficient(e)) for e in keys), default=0.0)


def monomials(n_vars: int, max_degree: int) -> list[tuple[int, ...]]:
    """All exponents with total degree <= max_degree, graded then lex."""
    out = []
    for d in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n_vars), d):
            e = [0] * n_vars
            for k in combo:
                e[k] += 1
            out.append(tuple(e))
    return out


# ---------------------------------------------------------------- evaluation

def evaluate(p: MultiPoly, z) -> complex | np.ndarray:
    """Evaluate ``p`` at a point, or at every row of a (m, n) array."""
    z = np.asarray(z, dtype=np.complex128)
    if z.shape[-1] != p.n_vars:
        raise ValueError(f"point has {z.shape[-1]} coordinates, polynomial has {p.n_vars} variables")
    exps, coeffs = p.arrays()
    flat = z.reshape(-1, p.n_vars)
    vals = _backend.poly_eval_batch(exps, coeffs, flat)
    if z.ndim == 1:
        return complex(vals[0])
    return vals.reshape(z.shape[:-1])


def evaluate_matrices(p: MultiPoly, mats) -> np.ndarray:
    """p(T_1, ..., T_n) for a commuting stack ``mats`` of shape (n, d, d)."""
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.shape[0] != p.n_vars:
        raise ValueError(f"tuple has {mats.shape[0]} entries, polynomial has {p.n_vars} variables")
    d = mats.shape[1]
    eye = np.eye(d, dtype=np.complex128)
    powers = [[eye] for _ in range(p.n_vars)]
    out = np.zeros((d, d), dtype=np.complex128)
    for e, c in p.terms.items():
        term = eye
        for k, a in enumerate(e):
            while len(powers[k]) <= a:
                powers[k].append(powers[k][-1] @ mats[k])
            if a:
                term = term @ powers[k][a]
        out += c * term
    return out


# ----------------------------------------------------- elementary symmetric

def elem_sym(k: int, z) -> complex:
    """s_k(z): coefficient of t^k in prod_i (1 + z_i t); s_0 = 1."""
    z = np.asarray(z, dtype=np.complex128).ravel()
    if not 0 <= k <= z.size:
        raise ValueError(f"k={k} outside 0..{z.size}")
    return complex(_backend.elem_sym_batch(z[None, :])[0, k])


def elem_sym_all(z) -> np.ndarray:
    """(s_1(z), ..., s_n(z)) for one point or for every row of a (m, n) array."""
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim == 1:
        return _backend.elem_sym_batch(z[None, :])[0, 1:]
    return _backend.elem_sym_batch(z)[:, 1:]


@lru_cache(maxsize=None)
def elem_sym_polys(n: int) -> tuple[MultiPoly, ...]:
    """(s_0, s_1, ..., s_n) as polynomials in n variables."""
    out = []
    for k in range(n + 1):
        terms = {}
        for idx in itertools.combinations(range(n), k):
            e = [0] * n
            for i in idx:
                e[i] = 1
            terms[tuple(e)] = 1.0
        out.append(MultiPoly(n, terms))
    return tuple(out)


def compose_with_s(q: MultiPoly) -> MultiPoly:
    """q o s as a polynomial in z_1, ..., z_n."""
    return q.compose(elem_sym_polys(q.n_vars)[1:])


# ------------------------------------------------------------- symmetry

def is_symmetric(p: MultiPoly, tol: float = COEFF_TOL) -> bool:
    """Invariance under the adjacent transpositions (i, i+1), which generate S_n."""
    n = p.n_vars
    for i in range(n - 1):
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        if max_coeff_diff(p, p.permute(perm)) > tol:
            return False
    return True


def symmetrize_poly(p: MultiPoly) -> MultiPoly:
    """Sum of p over all variable permutations (used to build test data)."""
    out = MultiPoly(p.n_vars)
    for perm in itertools.permutations(range(p.n_vars)):
        out = out + p.permute(perm)
    return out


def _s_monomial(b: tuple[int, ...], cache: dict) -> MultiPoly:
    if b not in cache:
        s = elem_sym_polys(len(b))
        prod = MultiPoly.constant(1.0, len(b))
        for k, a in enumerate(b):
            if a:
                prod = prod * s[k + 1] ** a
        cache[b] = prod
    return cache[b]


def reduce_symmetric(p: MultiPoly, tol: float = COEFF_TOL) -> MultiPoly:
    """Return q with q o s = p for symmetric ``p``.

    Classical leading-term elimination: the lex-leading monomial
    z^a (a_1 >= ... >= a_n) is cancelled by c * s_1^{a_1-a_2} ... s_n^{a_n}.
    Coefficients below ``tol`` (relative to the largest input coefficient,
    floored at 1) are treated as zero.
    """
    n = p.n_vars
    if not is_symmetric(p, tol * max(1.0, p.max_abs_coeff())):
        raise ValueError("polynomial is not symmetric")
    thresh = tol * max(1.0, p.max_abs_coeff())
    rest = {e: c for e, c in p.terms.items() if abs(c) > thresh}
    q: dict[tuple[int, ...], complex] = {}
    cache: dict = {}
    # each step strictly lowers the lex-leading monomial among those of degree <= deg p
    bound = comb(n + p.degree(), n) + 1
    for _ in range(bound):
        if not rest:
            break
        lead = max(rest)
        c = rest[lead]
        if any(lead[i] < lead[i + 1] for i in range(n - 1)):
            raise ValueError(f"leading monomial {lead} is not a partition; input not symmetric within tol")
        b = tuple(lead[i] - (lead[i + 1] if i + 1 < n else 0) for i in range(n))
        q[b] = q.get(b, 0j) + c
        for e, v in _s_monomial(b, cache).terms.items():
            rest[e] = rest.get(e, 0j) - c * v
        rest = {e: v for e, v in rest.items() if abs(v) > thresh}
    else:
        raise RuntimeError("symmetric reduction did not terminate")
    return MultiPoly(n, q)


def kv_polynomial() -> MultiPoly:
    """z1^2 + z2^2 + z3^2 - 2 z1 z2 - 2 z2 z3 - 2 z3 z1."""
    return MultiPoly(3, {
        (2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1,
        (1, 1, 0): -2, (0, 1, 1): -2, (1, 0, 1): -2,
    })

