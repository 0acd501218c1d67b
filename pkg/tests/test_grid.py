import numpy as np
import pytest
from hypothesis import given, strategies as st

from gauge_optics.grid import GridSpec, fft2, ifft2, make_grid, spectral_derivative


def test_unit_spacing():
    g = make_grid(GridSpec(8, 8, 0.0, 8.0, 0.0, 8.0))
    assert g.dxi == 1.0
    np.testing.assert_array_equal(g.xi, np.arange(8.0))
    assert g.xi[0] == 0.0 and g.xi[-1] == 8.0 - g.dxi


def test_wavenumber_layout_matches_hand_dft():
    g = make_grid(GridSpec(8, 8, 0.0, 8.0, 0.0, 8.0))
    expected = 2 * np.pi / 8 * np.array([0, 1, 2, 3, -4, -3, -2, -1])
    np.testing.assert_allclose(g.kxi, expected, atol=1e-15)
    # exp(2 pi i x / 8) by an explicit 8-point DFT lands in bin 1, i.e. k = 2 pi / 8
    x = np.arange(8)
    u = np.exp(2j * np.pi * x / 8)
    dft = np.array([np.sum(u * np.exp(-2j * np.pi * m * x / 8)) for m in range(8)])
    assert np.argmax(np.abs(dft)) == 1
    assert g.kxi[1] == pytest.approx(2 * np.pi / 8)


def test_half_unit_spacing_arithmetic():
    # nx = 4 is below the minimum size; the spacing arithmetic is checked at nx = 8
    with pytest.raises(ValueError):
        GridSpec(4, 8, -1.0, 1.0, -1.0, 1.0)
    assert GridSpec(8, 8, -2.0, 2.0, -1.0, 1.0).dxi == 0.5


@pytest.mark.parametrize("bad", [
    dict(nx=6), dict(nx=9), dict(xi_max=-1.0), dict(eta_max=-5.0), dict(ny=7.5),
])
def test_invalid_specs(bad):
    kw = dict(nx=8, ny=8, xi_min=0.0, xi_max=1.0, eta_min=0.0, eta_max=1.0)
    kw.update(bad)
    with pytest.raises(ValueError):
        GridSpec(**kw)


def test_half_cell_offset_keeps_origin_off_grid():
    g = make_grid(GridSpec.square(16, 4.0, half_cell_offset=True))
    assert np.min(np.abs(g.xi)) == pytest.approx(g.dxi / 2)
    assert g.spec.xi_max - g.spec.xi_min == pytest.approx(8.0)


def test_constant_field_is_dc(small_grid):
    U = fft2(np.ones(small_grid.shape, complex), small_grid)
    assert abs(U[0, 0]) == pytest.approx(small_grid.spec.nx * small_grid.spec.ny)
    U[0, 0] = 0
    assert np.abs(U).max() < 1e-9


def test_pure_mode_single_bin(small_grid):
    u = np.exp(1j * small_grid.kxi[1] * small_grid.XI)
    U = np.abs(fft2(u, small_grid))
    assert np.count_nonzero(U > 1e-8 * U.max()) == 1


def test_shape_mismatch(small_grid):
    with pytest.raises(ValueError):
        fft2(np.zeros((8, 8)), small_grid)


@given(st.integers(0, 2**32 - 1), st.sampled_from([8, 16, 30]), st.sampled_from([8, 12, 32]))
def test_roundtrip_and_parseval(seed, nx, ny):
    rng = np.random.default_rng(seed)
    g = make_grid(GridSpec(nx, ny, -3.0, 5.0, -1.0, 2.0))
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    back = ifft2(fft2(u, g), g)
    assert np.abs(back - u).max() / np.abs(u).max() < 1e-12
    lhs = np.sum(np.abs(u) ** 2) * g.cell_area
    rhs = np.sum(np.abs(fft2(u, g)) ** 2) * g.cell_area / (nx * ny)
    assert abs(lhs - rhs) / lhs < 1e-12


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_spectral_derivative_of_modes(mx, my):
    g = make_grid(GridSpec(16, 16, 0.0, 2 * np.pi, -1.0, 1.0))
    kx, ky = g.kxi[mx % 16], g.keta[my % 16]
    u = np.exp(1j * (kx * g.XI + ky * g.ETA))
    np.testing.assert_allclose(spectral_derivative(u, g, 0), 1j * kx * u, atol=1e-10)
    np.testing.assert_allclose(spectral_derivative(u, g, 1), 1j * ky * u, atol=1e-10)


def test_threads_env(monkeypatch, small_grid, rng):
    monkeypatch.setenv("GAUGE_OPTICS_THREADS", "2")
    u = rng.standard_normal(small_grid.shape).astype(complex)
    assert np.abs(ifft2(fft2(u)) - u).max() < 1e-12
