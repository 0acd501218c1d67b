"""Initial states: Gaussian packets, the coherent interferometer pair, the scattering slab."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import SpinorField
from .grid import Grid2D

__all__ = ["PacketSpec", "gaussian", "coherent_pair", "slab", "to_spinor", "interior_mask",
           "gaussian_normalization"]

CHANNELS = ("ground", "excited", "f", "g")


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian packet with momentum-space profile exp(-a^2 (k - k0)^2).

    ``channel`` picks the internal state: the adiabatic ``ground`` or
    ``excited`` column of a frame, or a bare diabatic channel ``f``/``g``.
    """

    center: tuple[float, float]
    momentum: tuple[float, float]
    width: float
    channel: str = "ground"

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ValueError("packet width must be positive")
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}")


def gaussian_normalization(a: float) -> float:
    """Per-axis position-space amplitude of the unit-norm packet.

    The k-integral of sqrt(a)/(2 pi^3)^(1/4) exp(-a^2 k^2) exp(i k x) is
    sqrt(a)/(2 pi^3)^(1/4) * sqrt(pi)/a * exp(-x^2 / (4 a^2)).
    """
    return np.sqrt(a) / (2 * np.pi ** 3) ** 0.25 * np.sqrt(np.pi) / a


def interior_mask(grid: Grid2D, absorber_width: float) -> np.ndarray:
    """True away from the absorbing band (``absorber_width`` is a fraction per edge)."""
    s = grid.spec
    wx = absorber_width * (s.xi_max - s.xi_min)
    wy = absorber_width * (s.eta_max - s.eta_min)
    mx = (grid.xi >= s.xi_min + wx) & (grid.xi <= s.xi_max - wx)
    my = (grid.eta >= s.eta_min + wy) & (grid.eta <= s.eta_max - wy)
    return mx[:, None] & my[None, :]


def gaussian(spec: PacketSpec, grid: Grid2D, absorber_width: float = 0.0) -> np.ndarray:
    """Scalar packet of unit L2 norm at tau = 0.

    Raises if more than 1e-6 of the norm lies inside the absorbing band.
    """
    a = spec.width
    dx = grid.XI - spec.center[0]
    dy = grid.ETA - spec.center[1]
    amp = gaussian_normalization(a) ** 2
    psi = amp * np.exp(-(dx * dx + dy * dy) / (4 * a * a)
                       + 1j * (spec.momentum[0] * dx + spec.momentum[1] * dy))
    if absorber_width > 0:
        dens = np.abs(psi) ** 2
        leak = dens[~interior_mask(grid, absorber_width)].sum() / dens.sum()
        if leak > 1e-6:
            raise ValueError(f"packet leaks {leak:.2e} of its norm into the absorber")
    return psi


def to_spinor(envelope: np.ndarray, channel: str, grid: Grid2D,
              frame: np.ndarray | None = None, tau: float = 0.0) -> SpinorField:
    """Attach an internal state to a scalar envelope.

    Without a frame the adiabatic and diabatic bases coincide (``ground`` is
    the ``g`` channel).
    """
    zero = np.zeros_like(envelope)
    if channel == "f" or (channel == "excited" and frame is None):
        return SpinorField(grid, envelope, zero, tau)
    if channel == "g" or (channel == "ground" and frame is None):
        return SpinorField(grid, zero, envelope, tau)
    col = 1 if channel == "ground" else 0
    return SpinorField(grid, frame[..., 0, col] * envelope, frame[..., 1, col] * envelope, tau)


def coherent_pair(eta0: float, k: float, a: float, grid: Grid2D, reversed: bool = False,
                  frame: np.ndarray | None = None, channel: str = "ground",
                  absorber_width: float = 0.0, offset: tuple[float, float] = (0.0, 0.0)) -> SpinorField:
    """Two coherent packets at (0, -eta0) and (0, +eta0) converging on xi = eta0.

    Momenta are (k, +k) and (k, -k); with ``reversed`` the xi-momenta flip
    sign, so the pair instead meets on xi = -eta0 (the mirror image under
    xi -> -xi). ``offset`` translates the whole configuration. Total norm 2.
    """
    if eta0 < 4 * a:
        raise ValueError(f"packets overlap: eta0={eta0} < 4a={4 * a}")
    kx = -k if reversed else k
    env = np.zeros(grid.shape, complex)
    for sign in (-1, 1):
        spec = PacketSpec((offset[0], offset[1] + sign * eta0), (kx, -sign * k), a, channel)
        env += gaussian(spec, grid, absorber_width)
    return to_spinor(env, channel, grid, frame)


def slab(xi_front: float, thickness: float, k: float, edge_smoothing: int, grid: Grid2D,
         half_width: float | None = None, frame: np.ndarray | None = None,
         channel: str = "ground") -> SpinorField:
    """Slab packet moving along +xi, flat across eta, unit norm.

    Longitudinal profile exp(-(xi - xi_c)^2 / (4 thickness^2)) centred at
    ``xi_front - 2 * thickness``. Across eta the profile is 1 for
    ``|eta - eta_mid| <= half_width`` and falls off as cos^2 over
    ``edge_smoothing`` cells (zero smoothing gives hard edges).
    """
    s = grid.spec
    eta_mid = 0.5 * (s.eta_min + s.eta_max)
    if half_width is None:
        half_width = 0.3 * (s.eta_max - s.eta_min)
    xc = xi_front - 2 * thickness
    longitudinal = np.exp(-(grid.xi - xc) ** 2 / (4 * thickness ** 2) + 1j * k * (grid.xi - xc))
    d = np.abs(grid.eta - eta_mid) - half_width
    ramp = edge_smoothing * grid.deta
    transverse = np.where(d <= 0, 1.0, 0.0)
    if edge_smoothing > 0:
        edge = (d > 0) & (d < ramp)
        transverse = np.where(edge, np.cos(0.5 * np.pi * d / ramp) ** 2, transverse)
    env = longitudinal[:, None] * transverse[None, :]
    env /= np.sqrt(np.sum(np.abs(env) ** 2) * grid.cell_area)
    return to_spinor(env, channel, grid, frame)
