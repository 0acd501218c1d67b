import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gauge_optics import _kernels_py, kernels
from gauge_optics.holonomy import expi_hermitian

BACKENDS = kernels.backends()


def _random_state(rng, shape):
    c = lambda: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)  # noqa: E731
    return c(), c(), [np.ascontiguousarray(c()) for _ in range(4)]


def test_python_backend_always_available():
    assert BACKENDS["python"] is _kernels_py
    assert kernels.BACKEND in BACKENDS


def test_compiled_backend_built():
    # the installed package ships the extension; the fallback remains importable
    assert "compiled" in BACKENDS, "compiled extension missing: rebuild with pip install -e ."


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("weighted", [False, True])
def test_apply_potential_matches_reference(name, weighted, rng):
    f, g, e = _random_state(rng, (12, 10))
    w = rng.uniform(0, 1, (12, 10)) if weighted else None
    ref_f = e[0] * f + e[1] * g
    ref_g = e[2] * f + e[3] * g
    if weighted:
        ref_f, ref_g = ref_f * w, ref_g * w
    BACKENDS[name].apply_potential(f, g, *e, w)
    assert np.abs(f - ref_f).max() < 1e-13 and np.abs(g - ref_g).max() < 1e-13


@settings(max_examples=20)
@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_ordered_product_backends_agree(n, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))
    factors = np.ascontiguousarray(expi_hermitian(0.1 * (h + np.conj(np.swapaxes(h, 1, 2)))))
    ref = np.eye(2, dtype=complex)
    for m in factors:
        ref = m @ ref
    for mod in BACKENDS.values():
        assert np.abs(np.asarray(mod.ordered_product(factors)) - ref).max() < 1e-12


def test_ordered_product_order():
    a = np.array([[0, 1], [1, 0]], complex)
    b = np.array([[1, 0], [0, -1]], complex)
    for mod in BACKENDS.values():
        np.testing.assert_array_equal(np.asarray(mod.ordered_product(np.ascontiguousarray([a, b]))), b @ a)
        np.testing.assert_array_equal(np.asarray(mod.ordered_product(np.zeros((0, 2, 2), complex))), np.eye(2))


def test_backends_agree_on_propagation():
    from gauge_optics.grid import GridSpec, make_grid
    from gauge_optics.models import SpinFieldParams, spin_field_potentials
    from gauge_optics.propagator import Propagator, PropagatorConfig

    grid = make_grid(GridSpec.square(32, 4.0, half_cell_offset=True))
    pot = spin_field_potentials(SpinFieldParams(1.0, 2.0), grid)
    prop = Propagator(grid, pot, PropagatorConfig(dtau=0.005, absorber_width=0.1, absorber_strength=3.0))
    rng = np.random.default_rng(5)
    psi = rng.standard_normal((2, 32, 32)) + 0j
    out = {}
    for name, mod in BACKENDS.items():
        p = np.fft.ifft2(np.fft.fft2(psi) * prop.kin_half)
        p = np.ascontiguousarray(p)
        mod.apply_potential(p[0], p[1], *prop.exp_v, prop.weight)
        out[name] = p
    vals = list(out.values())
    assert all(np.abs(v - vals[0]).max() < 1e-14 for v in vals)
