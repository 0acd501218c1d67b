"""Uniform periodic 2-D grid and the FFT contract used by the split-step propagator.

All coordinates are dimensionless (lengths in units of L, time in units of
2mL^2/hbar), so the kinetic operator is ``-laplacian`` and a plane wave of
wavenumber k moves with group velocity 2k.

Arrays on the grid are indexed ``[i, j]`` with ``i`` running along xi
(axis 0) and ``j`` along eta (axis 1).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "GridSpec",
    "Grid2D",
    "make_grid",
    "fft2",
    "ifft2",
    "spectral_derivative",
    "fft_workers",
]


def fft_workers() -> int | None:
    """Thread count for scipy.fft, taken from ``GAUGE_OPTICS_THREADS``."""
    value = os.environ.get("GAUGE_OPTICS_THREADS")
    if not value:
        return None
    return max(1, int(value))


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    xi_min: float
    xi_max: float
    eta_min: float
    eta_max: float

    def __post_init__(self) -> None:
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 8:
                raise ValueError(f"{name} must be an integer >= 8, got {n!r}")
            if n % 2:
                raise ValueError(f"{name} must be even for a symmetric wavenumber layout, got {n}")
        if not self.xi_max > self.xi_min:
            raise ValueError("xi_max must exceed xi_min")
        if not self.eta_max > self.eta_min:
            raise ValueError("eta_max must exceed eta_min")

    @property
    def dxi(self) -> float:
        return (self.xi_max - self.xi_min) / self.nx

    @property
    def deta(self) -> float:
        return (self.eta_max - self.eta_min) / self.ny

    @classmethod
    def square(cls, n: int, half_width: float, *, half_cell_offset: bool = False) -> "GridSpec":
        """Square domain ``[-half_width, half_width)^2``.

        With ``half_cell_offset`` the nodes are shifted by half a cell so that
        the origin falls between grid points (used whenever a phase
        singularity sits at the origin).
        """
        shift = (half_width / n) if half_cell_offset else 0.0
        return cls(n, n, -half_width + shift, half_width + shift,
                   -half_width + shift, half_width + shift)

    def to_dict(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "xi_min": self.xi_min, "xi_max": self.xi_max,
                "eta_min": self.eta_min, "eta_max": self.eta_max}


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Coordinates and FFT-ordered wavenumbers for a :class:`GridSpec`."""

    spec: GridSpec
    xi: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)
    kxi: np.ndarray = field(repr=False)
    keta: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.spec.nx, self.spec.ny)

    @property
    def dxi(self) -> float:
        return self.spec.dxi

    @property
    def deta(self) -> float:
        return self.spec.deta

    @property
    def cell_area(self) -> float:
        return self.spec.dxi * self.spec.deta

    @cached_property
    def XI(self) -> np.ndarray:
        return np.broadcast_to(self.xi[:, None], self.shape)

    @cached_property
    def ETA(self) -> np.ndarray:
        return np.broadcast_to(self.eta[None, :], self.shape)

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kxi[:, None] ** 2 + self.keta[None, :] ** 2

    def polar(self, center: tuple[float, float] = (0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
        """Radius and azimuth ``atan2(eta - eta_c, xi - xi_c)`` about ``center``."""
        dx = self.XI - center[0]
        dy = self.ETA - center[1]
        return np.hypot(dx, dy), np.arctan2(dy, dx)

    def check_shape(self, u: np.ndarray) -> None:
        if u.shape[-2:] != self.shape:
            raise ValueError(f"array shape {u.shape} does not match grid {self.shape}")


def make_grid(spec: GridSpec) -> Grid2D:
    nx, ny = spec.nx, spec.ny
    xi = spec.xi_min + spec.dxi * np.arange(nx)
    eta = spec.eta_min + spec.deta * np.arange(ny)
    kxi = 2 * np.pi * np.fft.fftfreq(nx, d=spec.dxi)
    keta = 2 * np.pi * np.fft.fftfreq(ny, d=spec.deta)
    for a in (xi, eta, kxi, keta):
        a.setflags(write=False)
    return Grid2D(spec, xi, eta, kxi, keta)


def fft2(u: np.ndarray, grid: Grid2D | None = None) -> np.ndarray:
    """Forward 2-D FFT over the last two axes (unnormalized, numpy convention).

    Discrete Parseval then reads
    ``sum(|u|^2) * dA == sum(|fft2(u)|^2) * dA / (nx * ny)``.
    """
    if grid is not None:
        grid.check_shape(u)
    return sfft.fft2(u, axes=(-2, -1), workers=fft_workers())


def ifft2(U: np.ndarray, grid: Grid2D | None = None) -> np.ndarray:
    if grid is not None:
        grid.check_shape(U)
    return sfft.ifft2(U, axes=(-2, -1), workers=fft_workers())


def spectral_derivative(u: np.ndarray, grid: Grid2D, axis: int) -> np.ndarray:
    """d/dxi (axis 0) or d/deta (axis 1) by multiplication with i*k."""
    if axis not in (0, 1):
        raise ValueError("axis must be 0 (xi) or 1 (eta)")
    k = grid.kxi[:, None] if axis == 0 else grid.keta[None, :]
    return ifft2(1j * k * fft2(u, grid), grid)
