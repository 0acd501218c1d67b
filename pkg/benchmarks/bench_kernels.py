"""Compiled vs pure-Python kernels: pointwise 2x2 propagation and the Wilson-line product.

Usage::

    python benchmarks/bench_kernels.py [--n 512] [--factors 10000] [--repeat 5]

Also times one full Strang step (two FFTs plus the potential kernel) so the
kernel share of a step is visible. Timings are best-of-``repeat``.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from gauge_optics import kernels
from gauge_optics.grid import GridSpec, make_grid
from gauge_optics.holonomy import expi_hermitian
from gauge_optics.models import CoupledPotential, SpinFieldParams, spin_field_potentials
from gauge_optics.propagator import Propagator, PropagatorConfig, default_dtau, potential_exponential


def _best(fn, repeat: int, number: int) -> float:
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_potential(mod, n: int, repeat: int, weighted: bool) -> float:
    rng = np.random.default_rng(0)
    shape = (n, n)
    # unitary pointwise factors, as in a real run, so repeated application stays bounded
    pot = CoupledPotential(rng.standard_normal(shape), rng.standard_normal(shape) + 1j * rng.standard_normal(shape),
                           rng.standard_normal(shape))
    e = potential_exponential(pot, 0.01)
    f = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    w = rng.uniform(0.5, 1.0, shape) if weighted else None
    return _best(lambda: mod.apply_potential(f, g, *e, w), repeat, 3)


def bench_product(mod, nfactors: int, repeat: int) -> float:
    rng = np.random.default_rng(1)
    h = rng.standard_normal((nfactors, 2, 2)) + 1j * rng.standard_normal((nfactors, 2, 2))
    h = 1e-3 * (h + np.conj(np.swapaxes(h, 1, 2)))
    factors = np.ascontiguousarray(np.array([expi_hermitian(m) for m in h]))
    return _best(lambda: mod.ordered_product(factors), repeat, 1)


def bench_step(n: int, repeat: int) -> float:
    grid = make_grid(GridSpec.square(n, 16.0, half_cell_offset=True))
    pot = spin_field_potentials(SpinFieldParams.from_gap(160.0, np.pi / 2), grid)
    prop = Propagator(grid, pot, PropagatorConfig(dtau=default_dtau(grid, pot)))
    psi = np.zeros((2, n, n), complex)
    psi[1] = np.exp(-(grid.XI ** 2 + grid.ETA ** 2))
    return _best(lambda: prop.evolve(psi, 4), repeat, 1) / 4


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=512, help="grid points per axis")
    ap.add_argument("--factors", type=int, default=10000, help="Wilson-line segments")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    mods = kernels.backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(mods)}")
    rows = []
    for label, fn in [
        (f"apply_potential {args.n}^2", lambda m: bench_potential(m, args.n, args.repeat, False)),
        (f"apply_potential {args.n}^2 + weight", lambda m: bench_potential(m, args.n, args.repeat, True)),
        (f"ordered_product {args.factors}", lambda m: bench_product(m, args.factors, args.repeat)),
    ]:
        t = {name: fn(mod) for name, mod in mods.items()}
        rows.append((label, t))
    print(f"{'kernel':<36s}" + "".join(f"{name:>14s}" for name in mods) + f"{'speedup':>10s}")
    for label, t in rows:
        speed = t["python"] / t["compiled"] if "compiled" in t else float("nan")
        print(f"{label:<36s}" + "".join(f"{t[name] * 1e3:>11.3f} ms" for name in mods) + f"{speed:>9.1f}x")
    print(f"full Strang step {args.n}^2 ({kernels.BACKEND}): {bench_step(args.n, args.repeat) * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
