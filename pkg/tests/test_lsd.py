import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from autocov_spectra.linalg import NumericalError
from autocov_spectra.lsd import (
    Law,
    LsdModel,
    cdf,
    continuous_mass,
    cubic_coefficients,
    density,
    density_csv,
    density_curve,
    density_via_inversion,
    moments,
    point_mass,
    raw_support_endpoints,
    solve_stieltjes,
    stieltjes_by_quadrature,
    support_endpoints,
)


def alpha_grid():
    return [complex(u, v) for v in (0.1, 1.0, 10.0) for u in np.linspace(-5, 25, 34)]


def laurent_moments():
    """Moments of the A-law read off the large-alpha expansion of its cubic."""
    z, c = sp.symbols("z c")
    m = sp.symbols("m1:5")
    y = -z * (1 + sum(m[i] * z ** (i + 1) for i in range(4)))
    alpha = 1 / z
    cubic = alpha**2 * c**2 * y**3 + alpha * c * (c - 1) * y**2 - alpha * y - 1
    series = sp.series(sp.expand(cubic), z, 0, 5).removeO()
    (sol,) = sp.solve([series.coeff(z, k) for k in range(1, 5)], m, dict=True)
    return [sp.lambdify(c, sol[mk]) for mk in m]


# -- support and atoms ------------------------------------------------------


def test_support_c_one():
    a, b = support_endpoints(1.0)
    assert a == 0.0 and abs(b - 6.75) < 1e-12


def test_support_c_half():
    raw_a, b = raw_support_endpoints(0.5)
    assert raw_a == pytest.approx(-0.0225425, abs=1e-7)
    assert b == pytest.approx(2.7725424, abs=1e-7)
    assert support_endpoints(0.5) == (0.0, b)


def test_support_c_two():
    a, b = support_endpoints(2.0)
    assert a == pytest.approx(0.1134, abs=1e-4)
    assert b == pytest.approx(17.6366, abs=1e-4)


@pytest.mark.parametrize("c", [0.0, -1.0, float("nan")])
def test_support_rejects_bad_c(c):
    with pytest.raises(ValueError):
        support_endpoints(c)


@given(st.floats(0.01, 50))
def test_support_ordering(c):
    a, b = raw_support_endpoints(c)
    assert a < b and b > 0
    if c < 1:
        assert -0.25 < a <= 0  # a rounds to 0 as c -> 1


def test_point_masses():
    assert point_mass(0.5, Law.B) == pytest.approx(0.5)
    assert point_mass(2.0, Law.B) == 0.0
    assert point_mass(2.0, Law.A) == pytest.approx(0.5)
    assert point_mass(0.5, Law.A) == 0.0
    model = LsdModel(4.0, "A")
    assert model.point_mass_at_zero == pytest.approx(0.75)


# -- Stieltjes transforms ----------------------------------------------------


@pytest.mark.parametrize("law", [Law.A, Law.B])
@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_residual_grid(c, law):
    for alpha in alpha_grid():
        sol = solve_stieltjes(alpha, c, law)
        assert sol.residual <= 1e-10 * (1 + abs(alpha) ** 3)
        assert sol.value.imag > 0


def test_near_atom_root_is_found():
    # A-law with c = 3 has mass 2/3 at 0, so m(alpha) ~ -(2/3)/alpha near 0
    alpha = 1e-6j
    value = solve_stieltjes(alpha, 3.0, Law.A).value
    assert value == pytest.approx(-(2 / 3) / alpha, rel=1e-3)


@pytest.mark.parametrize("law", [Law.A, Law.B])
@pytest.mark.parametrize("c", [0.1, 1.0, 7.0])
def test_large_alpha_asymptote(c, law):
    alpha = 1e6j
    value = solve_stieltjes(alpha, c, law).value
    assert abs(value - (-1 / alpha)) <= 1e-4 * abs(1 / alpha)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_cross_law_identity(c):
    for alpha in alpha_grid():
        x = solve_stieltjes(alpha, c, Law.B).value
        y = solve_stieltjes(alpha, c, Law.A).value
        assert abs((1 - c) * (-1 / alpha) + c * y - x) <= 1e-9


def test_solver_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        solve_stieltjes(1 - 1j, 1.0)


def test_cubic_coefficients_shape():
    coeffs = cubic_coefficients(2j, 0.5, Law.B)
    assert len(coeffs) == 4
    assert coeffs[0] == pytest.approx((2j) ** 2)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 10), st.floats(-10, 40), st.floats(1e-6, 50), st.sampled_from([Law.A, Law.B]))
def test_stieltjes_maps_upper_half_plane(c, re, im, law):
    alpha = complex(re, im)
    sol = solve_stieltjes(alpha, c, law)
    value = sol.value
    assert value.imag > 0
    # a transform of a law on [0, inf) also has Im(alpha m) >= 0
    assert (alpha * value).imag >= -1e-9 * abs(alpha * value)


def test_stieltjes_matches_quadrature():
    for c in (0.5, 1.0, 2.0, 3.0):
        for law in Law:
            exact = solve_stieltjes(1 + 1j, c, law).value
            assert abs(stieltjes_by_quadrature(1 + 1j, c, law) - exact) <= 1e-5


def test_model_wraps_solver():
    model = LsdModel(2.0, Law.B)
    assert model.stieltjes(1j).value == solve_stieltjes(1j, 2.0, Law.B).value


# -- densities -----------------------------------------------------------


def test_density_outside_support():
    for c in (0.5, 2.0):
        _, b = support_endpoints(c)
        assert density(b + 1, c) == 0.0
        assert density(-1.0, c) == 0.0
    assert density(0.05, 2.0) == 0.0  # below a(2)


def test_density_diverges_at_zero_for_c_one():
    assert density(1e-4, 1.0, Law.B) > 10


def test_two_routes_at_c_two():
    assert abs(density(5.0, 2.0, Law.B) - density_via_inversion(5.0, 2.0, Law.B)) <= 1e-4


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 3.0])
def test_two_routes_interior(c):
    lo, b = support_endpoints(c)
    for u in np.linspace(lo, b, 52)[1:-1]:
        assert abs(density(u, c, Law.B) - density_via_inversion(u, c, Law.B)) <= 1e-4


def test_inversion_refuses_coarse_eps():
    # near the pole at 0 the finite-eps bias is far above the tolerance
    with pytest.raises(NumericalError, match="smaller eps"):
        density_via_inversion(1e-4, 1.0, Law.B, eps=1e-6)


def test_a_law_density_is_scaled():
    for c in (0.5, 2.0):
        np.testing.assert_allclose(density([1.0, 1.5], c, Law.A), density([1.0, 1.5], c, Law.B) / c)


@pytest.mark.parametrize("c", np.geomspace(0.05, 10, 15))
def test_radicand_positive_inside(c):
    lo, b = support_endpoints(c)
    u = np.linspace(lo, b, 402)[1:-1]
    q = c - 1
    d = (
        -2 * q**3
        + 9 * (1 + 2 * c) * u
        + 3
        * math.sqrt(3)
        * np.sqrt(np.maximum(u * (-4 * u * u + (-1 + 4 * c * (5 + 2 * c)) * u - 4 * c * q**3), 0))
    )
    assert np.all(d > 0)
    assert np.all(np.isfinite(density(u, c)))


def test_edge_decay():
    _, b = support_endpoints(2.0)
    assert density(b - 1e-6, 2.0) < density(b - 0.1, 2.0)


# -- cdf and moments ---------------------------------------------------------


def test_cdf_examples():
    assert cdf(-1.0, 0.7) == 0.0
    assert cdf(1e-9, 2.0, Law.A) == pytest.approx(0.5, abs=1e-6)
    _, b = support_endpoints(0.5)
    assert cdf(b, 0.5, Law.B) == pytest.approx(1.0, abs=1e-6)
    assert continuous_mass(0.5, Law.B) == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("c", [0.3, 0.5, 0.9, 1.0, 2.0, 3.0])
def test_normalization(c):
    assert continuous_mass(c, Law.B) == pytest.approx(min(c, 1.0), abs=1e-6)
    assert continuous_mass(c, Law.A) == pytest.approx(1 - point_mass(c, Law.A), abs=1e-6)
    assert moments(c, Law.A, 0) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.5])
def test_cdf_monotone_and_vectorized(c):
    _, b = support_endpoints(c)
    u = np.linspace(-0.5, b + 0.5, 60)
    values = cdf(u, c)
    assert np.all(np.diff(values) >= -1e-12)
    assert values[0] == 0.0 and values[-1] == 1.0
    shuffled = np.random.default_rng(0).permutation(u)
    np.testing.assert_allclose(cdf(shuffled, c), cdf(np.sort(shuffled), c)[np.argsort(np.argsort(shuffled))])
    assert cdf(u[20], c) == pytest.approx(values[20], abs=1e-10)


def test_moment_examples():
    assert moments(0.5, Law.A, 1) == pytest.approx(0.5, abs=1e-5)
    assert moments(2.0, Law.A, 1) == pytest.approx(2.0, abs=1e-5)
    assert moments(1.0, Law.A, 2) == pytest.approx(3.0, abs=1e-5)
    with pytest.raises(ValueError):
        moments(1.0, Law.A, -1)


@pytest.mark.parametrize("c", [0.3, 1.0, 2.0, 3.0])
def test_moments_match_laurent_series(c):
    oracle = laurent_moments()
    for k in range(1, 5):
        expected = oracle[k - 1](c)
        assert moments(c, Law.A, k) == pytest.approx(expected, rel=1e-7, abs=1e-5)
        # the B-law puts mass (1 - c) at 0 and c times the A-law elsewhere
        assert moments(c, Law.B, k) == pytest.approx(c * expected, rel=1e-7, abs=1e-5)


def test_ppf_inverts_cdf():
    model = LsdModel(0.5)
    q = np.array([0.1, 0.5, 0.9])
    np.testing.assert_allclose(model.cdf(model.ppf(q)), q, atol=1e-3)
    heavy = LsdModel(3.0)  # atom of mass 2/3 at 0
    assert np.all(heavy.ppf([0.1, 0.6]) == 0.0)
    assert heavy.ppf(0.8) >= heavy.a


# -- curves ------------------------------------------------------------------


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 3.0])
def test_density_curve_properties(c):
    table = density_curve(c, Law.A, 200)
    assert np.all(np.diff(table[:, 0]) > 0)
    assert np.all(table[:, 1] >= 0) and np.all(np.isfinite(table[:, 1]))
    lo, b = support_endpoints(c)
    assert table[0, 0] >= lo and table[-1, 0] == pytest.approx(b)


def test_density_curve_shapes():
    small = density_curve(0.5, Law.A, 200)
    mid = small[np.searchsorted(small[:, 0], small[-1, 0] / 2), 1]
    assert small[0, 1] > mid
    large = density_curve(2.0, Law.A, 200)
    assert large[:, 1].max() < 10


def test_density_curve_needs_two_points():
    with pytest.raises(ValueError):
        density_curve(1.0, Law.A, 1)


def test_density_csv_text():
    text = density_csv(np.array([[0.5, 1.25], [1.0, 0.0]]))
    assert text == "u,density\n0.5,1.25\n1.0,0.0\n"


@pytest.mark.parametrize("c", [0.4, 1.0, 2.0])
def test_cdf_interp_tracks_quadrature(c):
    model = LsdModel(c)
    u = np.concatenate([np.linspace(-1, model.b + 1, 120), np.geomspace(1e-12, 1e-2, 20)])
    assert np.abs(model.cdf_interp(u) - model.cdf(u)).max() <= 1e-5
