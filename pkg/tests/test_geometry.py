import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from gammakit.geometry import (
    GammaPoint,
    UniPoly,
    boundary_from_mu,
    boundary_routes_batch,
    char_poly,
    cohn_boundary,
    embed,
    fiber,
    in_gamma,
    is_self_inversive,
    on_boundary,
    points_from_csv,
    points_to_csv,
    project,
    roots,
    sample,
    symmetrize_point,
)
from gammakit.verdict import GammaError

from conftest import disc_points, torus_points


def test_char_poly_examples():
    assert np.allclose(char_poly([2, 1]).coeffs, [1, -2, 1])
    assert np.allclose(char_poly([0, 0, 0]).coeffs, [0, 0, 0, 1])
    assert np.allclose(char_poly([3, 3, 1]).coeffs, [-1, 3, -3, 1])


@pytest.mark.parametrize("coeffs, expected", [
    ([1, -2, 1], [1, 1]),
    ([1, 0, 1], [-1j, 1j]),
    ([1, -3, 1], [(3 - 5 ** 0.5) / 2, (3 + 5 ** 0.5) / 2]),
])
def test_roots_examples(coeffs, expected):
    r = roots(UniPoly(np.array(coeffs, dtype=complex)))
    assert np.allclose(sorted(r, key=lambda z: (z.real, z.imag)), expected)


def test_triple_unimodular_root_is_exact_enough():
    # companion eigenvalues scatter by ~eps^(1/3); cluster refinement removes it
    r = roots(char_poly([3, 3, 1]))
    assert np.abs(r - 1).max() < 1e-12


def test_membership_examples():
    assert in_gamma([0, 0]).holds
    v = in_gamma([3, 1])
    assert not v.holds
    assert v.certificate["root"].real == pytest.approx((3 + 5 ** 0.5) / 2)
    assert in_gamma([3, 3, 1]).holds


def test_fiber_examples():
    assert np.allclose(sorted(fiber([0, -1]).real), [-1, 1])
    assert np.allclose(fiber([2, 1]), [1, 1])
    theta = 0.7
    for n in (2, 3, 5):
        lam = fiber([0] * (n - 1) + [np.exp(1j * theta)])
        assert np.allclose(np.abs(lam), 1)
        assert np.allclose(lam ** n, (-1) ** (n + 1) * np.exp(1j * theta))


def test_self_inversive_examples():
    assert is_self_inversive(UniPoly(np.array([1, -2, 1]))).holds
    assert is_self_inversive(UniPoly(np.array([1, -3, 1]))).holds
    assert not is_self_inversive(UniPoly(np.array([0, -0.5, 1]))).holds


@pytest.mark.parametrize("route", ["all", "fiber", "recursive", "closure"])
def test_boundary_examples(route):
    assert on_boundary([2, 1], route=route).holds
    assert not on_boundary([3, 1], route=route).holds
    assert on_boundary([1, -1, -1], route=route).holds


def test_maps_examples():
    assert project([3, 3, 1]).close_to(GammaPoint([2, 1]))
    assert project([0, 0]).close_to(GammaPoint([0]))
    assert project([2, 1]).close_to(GammaPoint([1]))
    assert embed([2, 1], 0).close_to(GammaPoint([2, 1, 0]))
    assert embed([2, 1], 1).close_to(GammaPoint([3, 3, 1]))
    assert embed([2, 1], -1).close_to(GammaPoint([1, -1, -1]))
    with pytest.raises(GammaError):
        project([1])


def test_boundary_from_mu_examples():
    assert boundary_from_mu([2, 1], np.pi).close_to(GammaPoint([1, -1, -1]))
    assert boundary_from_mu([2, 1], 0).close_to(GammaPoint([3, 3, 1]))
    assert boundary_from_mu([1], 0).close_to(GammaPoint([2, 1]))
    # complex mu needs the conjugate on mu_(n-j)
    p = boundary_from_mu([1 + 1j, 1j], np.pi / 2)
    assert p.close_to(GammaPoint([2 + 1j, 1 + 2j, 1j]))
    assert on_boundary(p).holds
    with pytest.raises(GammaError):
        boundary_from_mu([0.5], 0.0)


@given(torus_points(4), st.floats(0, 2 * np.pi))
def test_boundary_from_mu_lands_on_boundary(z, theta):
    mu = symmetrize_point(z[:3])
    assert on_boundary(boundary_from_mu(mu, theta), 1e-8).holds


@given(disc_points(4))
def test_fiber_symmetrize_roundtrip(z):
    s = symmetrize_point(z)
    assert symmetrize_point(fiber(s)).close_to(s, 1e-9)


def _separated(z: np.ndarray, gap: float = 1e-2) -> bool:
    """Distinct points of z are at least ``gap`` apart (exact repeats allowed)."""
    d = np.abs(z[:, None] - z[None, :])
    return bool(np.all((d == 0) | (d >= gap)))


@given(st.integers(2, 5), torus_points(5))
def test_routes_agree_on_torus_images(n, z):
    # distinct roots closer than ~1e-4 to a multiple root are not resolvable
    # from the coefficients in double precision; see README, Limitations
    assume(_separated(z[:n]))
    s = symmetrize_point(z[:n])
    res = boundary_routes_batch(s.s[None, :], 1e-8)
    assert all(bool(h[0]) for h, _ in res.values())
    assert cohn_boundary(s, 1e-8).holds


@given(st.integers(2, 5), disc_points(5))
def test_heredity(n, z):
    s = symmetrize_point(z[:n])
    assert in_gamma(project(s), 1e-9).holds
    for alpha in (0, 1, -1j, 0.3 + 0.4j):
        assert in_gamma(embed(s, alpha), 1e-9).holds


def test_cohn_rejects_off_boundary_with_unimodular_product():
    # roots r and 1/r on the same ray: self-inversive, so the derivative test must catch it
    v = cohn_boundary(symmetrize_point([2.0, 0.5, 1j]))
    assert not v.holds and v.certificate["condition"] == "derivative_roots"
    v = cohn_boundary(symmetrize_point([2.0, 0.5j, 1]))
    assert not v.holds and v.certificate["condition"] == "self_inversive"


def test_sample_determinism_and_csv_roundtrip():
    a, b = sample(3, 50, True, 7), sample(3, 50, True, 7)
    assert points_to_csv(a) == points_to_csv(b)
    back = points_from_csv(points_to_csv(a))
    assert all(p == q for p, q in zip(a, back))
    assert all(on_boundary(p, 1e-8).holds for p in a)
    assert all(in_gamma(p).holds for p in sample(4, 50, False, 1))


def test_point_json_roundtrip_and_errors():
    p = GammaPoint([1 + 2j, -0.5])
    assert GammaPoint.from_json(p.to_json()) == p
    with pytest.raises(GammaError):
        GammaPoint.from_dict({"n": 3, "s": [[1, 0]]})
    with pytest.raises(GammaError):
        GammaPoint([np.nan])


def test_on_boundary_reports_escalation_diagnostics():
    v = on_boundary([2, 1])
    assert set(v.diagnostics["routes"]) == {"fiber", "recursive", "closure"}
    assert v.diagnostics["inconsistent"] is False


def test_routes_agree_beside_triple_root():
    s = symmetrize_point(np.exp(1j * np.array([5.5, 5.5, 5.5, 5.4375])))
    res = boundary_routes_batch(s.s[None, :], 1e-8)
    assert all(bool(h[0]) for h, _ in res.values())


@pytest.mark.parametrize("angles", [
    [0.24876938] * 4 + [0.23876938],  # quadruple root, neighbour 0.01 away
    [1.9, 1.9, 1.91, 1.92, 1.92],     # two double roots and a simple root in a row
])
def test_clustered_fibers_reach_conditioning_floor(angles):
    # |p'| ~ 1e-8 at the simple root, so root moduli are only good to ~1e-7
    s = symmetrize_point(np.exp(1j * np.array(angles)))
    res = boundary_routes_batch(s.s[None, :], 1e-8)
    assert res["recursive"][0][0]
    assert res["fiber"][1][0] <= 1e-6
