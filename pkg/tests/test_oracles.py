import warnings

import numpy as np
import pytest
from hypothesis import example, given, strategies as st

from gauge_optics.fields import fringe_minima_positions
from gauge_optics.oracles import (FringeParams, ScatterParams, TruncationWarning, ab_closed_form_half,
                                  ab_partial_wave, complex_erf, free_fringe, fringe_envelope, fringe_minima,
                                  screen_profile, shifted_fringe, write_profile_csv)

P = FringeParams(1.0, 4.0, 6.0)


def _axis_amplitude(x, x0, q0, a, tau):
    """One-axis k-integral of the spectral Gaussian, by brute-force quadrature."""
    q = np.linspace(q0 - 9 / a, q0 + 9 / a, 40001)
    phi = np.sqrt(a) / (2 * np.pi ** 3) ** 0.25 * np.exp(-a * a * (q - q0) ** 2)
    integrand = phi[None, :] * np.exp(1j * np.outer(x - x0, q) - 1j * q * q * tau)
    return np.trapezoid(integrand, q, axis=1)


@pytest.mark.parametrize("p", [P, FringeParams(0.8, 3.0, 5.0)])
def test_free_fringe_matches_k_space_quadrature(p):
    eta = np.array([-1.3, -0.4, 0.0, 0.25, 1.1])
    tau = p.eta0 / (2 * p.k)
    xi = np.full_like(eta, p.eta0)
    total = 0
    for sign in (-1, 1):
        # packets at (0, -/+eta0) with momenta (k, +/-k), phases referred to each center
        ax = _axis_amplitude(xi, 0.0, p.k, p.a, tau)
        ay = _axis_amplitude(eta, sign * p.eta0, -sign * p.k, p.a, tau)
        total = total + ax * ay
    np.testing.assert_allclose(np.abs(total) ** 2, free_fringe(eta, p), rtol=1e-8, atol=1e-12)


def test_free_fringe_zeros_and_peak():
    m = np.arange(-4, 4)
    zeros = (np.pi / 2 + m * np.pi) / P.k
    assert np.abs(free_fringe(zeros, P)).max() < 1e-30
    peak = 8 * P.a ** 2 * P.k ** 2 / (np.pi * (4 * P.a ** 4 * P.k ** 2 + P.eta0 ** 2))
    assert free_fringe(0.0, P) == pytest.approx(peak, rel=1e-15)


def test_shifted_fringe_reduces_and_wraps():
    eta = np.linspace(-3, 3, 301)
    for loc in "bd":
        np.testing.assert_allclose(shifted_fringe(eta, P, 0.0, loc), free_fringe(eta, P), rtol=1e-15)
    np.testing.assert_allclose(shifted_fringe(eta, P, 2 * np.pi, "b"), shifted_fringe(eta, P, 2 * np.pi, "d"),
                               atol=1e-15)
    with pytest.raises(ValueError):
        shifted_fringe(eta, P, 1.0, "x")


@given(st.floats(-2 * np.pi, 2 * np.pi), st.floats(0.5, 6.0))
def test_minima_formula(phi_flux, k):
    p = FringeParams(1.0, k, 6.0)
    for loc, sign in (("b", -1), ("d", 1)):
        m = fringe_minima(k, phi_flux, loc, (-3.0, 3.0))
        assert np.all(np.abs(shifted_fringe(m, p, phi_flux, loc)) < 1e-20)
        phase = (k * m - sign * phi_flux / 4 - np.pi / 2) / np.pi
        np.testing.assert_allclose(phase, np.round(phase), atol=1e-9)


def test_minima_finder_agrees_with_formula():
    k, flux = 4.0, 1.3
    eta = np.linspace(-3, 3, 6001)
    for loc in "bd":
        found = fringe_minima_positions((eta, shifted_fringe(eta, P, flux, loc)), (-2.0, 2.0))
        exact = fringe_minima(k, flux, loc, (-2.0, 2.0))
        np.testing.assert_allclose(found, exact, atol=1e-6)


def test_displacement_between_b_and_d():
    k, flux = 1.0, np.pi
    mb = fringe_minima(k, flux, "b", (-5, 5))
    md = fringe_minima(k, flux, "d", (-5, 5))
    disp = np.abs(mb[:, None] - md[None, :]).min()
    assert disp == pytest.approx(flux / (2 * k))


def test_fringe_params_validation():
    with pytest.raises(ValueError):
        FringeParams(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ScatterParams(0.5, -1.0)
    with pytest.raises(ValueError):
        ScatterParams(0.5, 10.0, m_max=20)


def test_envelope_integral():
    eta = np.linspace(-40, 40, 80001)
    s = 4 * P.a ** 4 * P.k ** 2 + P.eta0 ** 2
    expected = 8 * P.a ** 2 * P.k ** 2 / (np.pi * s) * np.sqrt(np.pi * s / (2 * P.a ** 2 * P.k ** 2))
    assert np.trapezoid(fringe_envelope(eta, P), eta) == pytest.approx(expected, rel=1e-10)


# --- scattering ---

def test_jacobi_anger(rng):
    r = rng.uniform(0.5, 30, 50)
    phi = rng.uniform(-np.pi, np.pi, 50)
    psi = ab_partial_wave(r, phi, ScatterParams(0.0, 0.0))
    assert np.abs(psi - np.exp(-1j * r * np.cos(phi))).max() < 1e-10


@pytest.mark.parametrize("ka", [0.5, 2.0, 4.0])
@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.5])
def test_hard_wall(ka, alpha):
    phi = np.linspace(-np.pi, np.pi, 73)
    assert np.abs(ab_partial_wave(ka, phi, ScatterParams(alpha, ka))).max() < 1e-10


def test_inside_cylinder_rejected():
    with pytest.raises(ValueError):
        ab_partial_wave(0.5, 0.0, ScatterParams(0.5, 1.0))


def test_series_matches_erf_closed_form(rng):
    r = rng.uniform(1, 50, 80)
    phi = rng.uniform(-np.pi, np.pi, 80)
    series = ab_partial_wave(r, phi, ScatterParams(0.5, 0.0))
    closed = ab_closed_form_half(r, phi)
    assert np.max(np.abs(series - closed) / np.abs(closed)) < 1e-6


def test_printed_branch_same_modulus_with_phase_jump():
    phi = np.linspace(-np.pi, np.pi, 181)
    m = ab_closed_form_half(7.0, phi, branch="matched")
    p = ab_closed_form_half(7.0, phi, branch="printed")
    np.testing.assert_allclose(np.abs(p), np.abs(m), rtol=1e-12)
    eps = 1e-9
    jump = ab_closed_form_half(7.0, np.array([-eps, eps]), branch="printed")
    smooth = ab_closed_form_half(7.0, np.array([-eps, eps]))
    assert abs(jump[1] - jump[0]) > 0.5 and abs(smooth[1] - smooth[0]) < 1e-6
    with pytest.raises(ValueError):
        ab_closed_form_half(1.0, 0.0, branch="other")


def test_closed_form_nodal_line_symmetry_asymptotics():
    r = np.array([1.0, 5.0, 40.0])
    assert np.abs(ab_closed_form_half(r, np.pi)).max() < 1e-15
    phi = np.linspace(0.1, 3.0, 30)
    np.testing.assert_allclose(np.abs(ab_closed_form_half(9.0, phi)), np.abs(ab_closed_form_half(9.0, -phi)),
                               rtol=1e-12)
    far = np.abs(ab_closed_form_half(1e4, np.array([0.0, 0.5, 1.5, 2.5])))
    np.testing.assert_allclose(far, 1.0, atol=1e-2)


def test_complex_erf_against_series():
    z = np.array([0.3 + 0.2j, -0.7 + 0.5j, 1.1 - 0.4j])
    n = np.arange(60)
    from scipy.special import factorial
    series = 2 / np.sqrt(np.pi) * np.sum((-1) ** n[:, None] * z[None, :] ** (2 * n[:, None] + 1)
                                         / (factorial(n)[:, None] * (2 * n[:, None] + 1)), axis=0)
    np.testing.assert_allclose(complex_erf(z), series, rtol=1e-10)


@given(st.floats(0.0, 0.99), st.floats(0.0, 3.0))
@example(2.225073858507e-311, 1.0)
def test_integer_flux_periodicity(alpha, ka):
    r = np.array([ka + 0.5, ka + 2.0, ka + 7.0])
    phi = np.array([-2.0, 0.3, 3.0])
    a = np.abs(ab_partial_wave(r, phi, ScatterParams(alpha, ka))) ** 2
    b = np.abs(ab_partial_wave(r, phi, ScatterParams(alpha + 1, ka))) ** 2
    assert np.abs(a - b).max() < 1e-8


def test_truncation_converged():
    eta = np.linspace(-3, 3, 41)
    p = ScatterParams(0.5, 4.0, 4.0)
    base = p.order_cutoff(4.0 * np.hypot(4.0, 3.0))
    a = screen_profile(ScatterParams(0.5, 4.0, 4.0, m_max=base), 4.0, eta)
    b = screen_profile(ScatterParams(0.5, 4.0, 4.0, m_max=base + 10), 4.0, eta)
    assert np.abs(a - b).max() < 1e-8


def test_truncation_warning():
    with pytest.warns(TruncationWarning):
        ab_partial_wave(np.array([60.0]), np.array([0.3]), ScatterParams(0.3, 0.0, m_max=20))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ab_partial_wave(np.array([60.0]), np.array([0.3]), ScatterParams(0.3, 0.0))


def test_poisson_spot_and_suppression():
    eta = np.linspace(-1.0, 1.0, 201)
    plain = screen_profile(ScatterParams(0.0, 4.0, 4.0), 4.0, eta)
    flux = screen_profile(ScatterParams(0.5, 4.0, 4.0), 4.0, eta)
    c = 100
    assert plain[c] == plain[c - 20:c + 21].max()
    assert flux[c] < 1e-20
    assert flux[c - 5:c + 6].mean() < 0.25 * plain[c - 5:c + 6].mean()
    np.testing.assert_allclose(screen_profile(ScatterParams(1.0, 4.0, 4.0), 4.0, eta), plain, atol=1e-8)


def test_screen_inside_cylinder_rejected():
    with pytest.raises(ValueError):
        screen_profile(ScatterParams(0.5, 4.0, 1.0), 3.0, np.array([0.0]))


def test_profile_csv(tmp_path):
    p = ScatterParams(0.5, 2.0)
    path = tmp_path / "p.csv"
    write_profile_csv(path, [0.0, 1.0], [0.5, 0.25], p)
    lines = path.read_text().splitlines()
    assert lines[0] == "eta,intensity,alpha,ka" and len(lines) == 3
