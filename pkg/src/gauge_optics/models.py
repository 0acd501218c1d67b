"""Adiabatic Hamiltonians and the gauge objects derived from their diagonalizing frames.

Three internal Hamiltonians are modelled, all of the form ``|h| n(R).sigma``:

* the velocity sieve, ``(delta + eps) * n(Omega(x), phi(y))``;
* a spin-1/2 in the vortex field ``B = B_rho phi_hat + B0 z_hat``;
* the conical intersection ``[[x, y], [y, -x]]``.

Frame convention used throughout the package: the columns of a frame
matrix ``U`` are the adiabatic states, column 0 the excited (upper) state
and column 1 the ground (lower) state, so ``H_ad = U diag(+e, -e) U^dagger``.
Gauge potentials are ``A = i U^dagger grad U`` and the Abelian projection is
the ground-ground entry ``A[1, 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Grid2D

__all__ = [
    "SievePotentialParams",
    "SpinFieldParams",
    "CoupledPotential",
    "SpinGaugeField",
    "SieveGaugeField",
    "sieve_potentials",
    "sieve_frame",
    "spin_field_potentials",
    "spin_frame",
    "spin_counter_term",
    "conical_potentials",
    "conical_frame",
    "longuet_higgins_frame",
    "conical_gauge",
    "flux",
    "gauge_field_spin",
    "gauge_from_frame",
    "PAULI",
]

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class SievePotentialParams:
    """Velocity-sieve constants (all dimensionless).

    ``mass`` is the classical inertia matching the kinetic operator
    ``-laplacian`` (hbar^2/2m = 1, hence m = 1/2); quantum and classical runs
    share this one parameter set.
    """

    delta: float
    v0: float
    b0: float
    l_param: float
    beta: float
    mass: float = 0.5

    def __post_init__(self) -> None:
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    @property
    def phase_gradient(self) -> float:
        """d(phi)/dy = L * B0."""
        return self.l_param * self.b0

    def omega(self, x):
        return 0.5 * np.pi * (1 + np.tanh(self.beta * x))

    def domega(self, x):
        return 0.5 * np.pi * self.beta / np.cosh(self.beta * x) ** 2

    def phase(self, y):
        return self.phase_gradient * y

    def curvature(self, x):
        """Geometric field H(x) = (pi/4) B0 L beta sech^2(beta x) cos((pi/2) tanh(beta x))."""
        t = np.tanh(self.beta * x)
        return 0.25 * np.pi * self.b0 * self.l_param * self.beta * (1 - t * t) * np.cos(0.5 * np.pi * t)

    def dcurvature(self, x):
        t = np.tanh(self.beta * x)
        s2 = 1 - t * t
        c = 0.25 * np.pi * self.b0 * self.l_param * self.beta
        return c * self.beta * s2 * (-2 * t * np.cos(0.5 * np.pi * t) - 0.5 * np.pi * s2 * np.sin(0.5 * np.pi * t))

    def energy_shift(self, x, y):
        """eps(R) = v0 * y * H(x)."""
        return self.v0 * y * self.curvature(x)

    def counter_term(self, x):
        """|A_12|^2 = (Omega'^2 + sin^2(Omega) (L B0)^2) / 4."""
        return 0.25 * (self.domega(x) ** 2 + np.sin(self.omega(x)) ** 2 * self.phase_gradient ** 2)


@dataclass(frozen=True)
class SpinFieldParams:
    """Spin-1/2 in ``B0 z_hat + B_rho phi_hat`` (field strengths in units with mu_B = 1)."""

    b0: float
    brho: float
    flux_center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not (self.b0 ** 2 + self.brho ** 2) > 0:
            raise ValueError("b0 and brho cannot both vanish")
        object.__setattr__(self, "flux_center", tuple(float(c) for c in self.flux_center))

    @classmethod
    def from_gap(cls, gap: float, omega: float, flux_center=(0.0, 0.0)) -> "SpinFieldParams":
        """Field with Zeeman half-gap ``gap`` and mixing angle ``omega`` (tan omega = B_rho/B0)."""
        return cls(gap * np.cos(omega), gap * np.sin(omega), flux_center)

    @property
    def gap(self) -> float:
        return float(np.hypot(self.b0, self.brho))

    @property
    def omega(self) -> float:
        return float(np.arctan2(self.brho, self.b0))

    @property
    def flux(self) -> float:
        return flux(self.b0, self.brho)


@dataclass
class CoupledPotential:
    """Pointwise Hermitian matrix ``[[V - b, V12], [conj(V12), -(V + b)]]``."""

    V: np.ndarray
    V12: np.ndarray
    b_ct: np.ndarray

    def __post_init__(self) -> None:
        self.V = np.asarray(self.V, dtype=float)
        self.V12 = np.asarray(self.V12, dtype=complex)
        self.b_ct = np.broadcast_to(np.asarray(self.b_ct, dtype=float), self.V.shape).copy()
        if self.V12.shape != self.V.shape:
            raise ValueError("V and V12 shapes differ")
        for name in ("V", "V12", "b_ct"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")

    def matrix(self) -> np.ndarray:
        m = np.empty(self.V.shape + (2, 2), dtype=complex)
        m[..., 0, 0] = self.V - self.b_ct
        m[..., 0, 1] = self.V12
        m[..., 1, 0] = np.conj(self.V12)
        m[..., 1, 1] = -(self.V + self.b_ct)
        return m

    def eigenvalues(self) -> tuple[np.ndarray, np.ndarray]:
        """(lower, upper) eigenvalues at every point."""
        r = np.sqrt(self.V ** 2 + np.abs(self.V12) ** 2)
        return -self.b_ct - r, -self.b_ct + r

    def max_abs(self) -> float:
        return float(np.max(np.sqrt(self.V ** 2 + np.abs(self.V12) ** 2) + np.abs(self.b_ct)))


def flux(b0: float, brho: float) -> float:
    """Effective flux pi (1 - cos Omega) = pi (1 - b0 / sqrt(b0^2 + brho^2))."""
    r = np.hypot(b0, brho)
    if r == 0:
        raise ValueError("flux undefined for vanishing field")
    return float(np.pi * (1 - b0 / r))


# --- velocity sieve ---------------------------------------------------------

def sieve_potentials(params: SievePotentialParams, grid: Grid2D,
                     counter_term: bool = True) -> CoupledPotential:
    x, y = grid.XI, grid.ETA
    amp = params.delta + params.energy_shift(x, y)
    om = params.omega(x)
    V = amp * np.cos(om)
    V12 = np.exp(-1j * params.phase(y)) * amp * np.sin(om)
    b = params.counter_term(x) if counter_term else np.zeros(grid.shape)
    return CoupledPotential(V, V12, np.broadcast_to(b, grid.shape))


def _sieve_frame(theta, phi):
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    e = np.exp(1j * phi)
    u = np.empty(np.broadcast(theta, phi).shape + (2, 2), dtype=complex)
    u[..., 0, 0] = c
    u[..., 0, 1] = -s * np.conj(e)
    u[..., 1, 0] = s * e
    u[..., 1, 1] = c
    return u


def sieve_frame(params: SievePotentialParams, grid: Grid2D) -> np.ndarray:
    """exp(-i s3 phi/2) exp(-i s2 Omega/2) exp(i s3 phi/2) at every grid point."""
    return _sieve_frame(params.omega(grid.XI), params.phase(grid.ETA))


class SieveGaugeField:
    """Closed-form ``A = i U^dagger grad U`` for the sieve frame."""

    def __init__(self, params: SievePotentialParams):
        self.params = params

    def cartesian(self, x, y):
        p = self.params
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        om, dom = p.omega(x), p.domega(x)
        s2 = np.sin(0.5 * om) ** 2
        e = np.exp(-1j * p.phase(y))
        ax = np.zeros(x.shape + (2, 2), complex)
        ay = np.zeros(x.shape + (2, 2), complex)
        # d(theta) = Omega' dx, d(phi) = L B0 dy
        ax[..., 0, 1] = -1j * e * 0.5 * dom
        ax[..., 1, 0] = np.conj(ax[..., 0, 1])
        ay[..., 0, 0] = -s2 * p.phase_gradient
        ay[..., 1, 1] = s2 * p.phase_gradient
        ay[..., 0, 1] = -e * 0.5 * np.sin(om) * p.phase_gradient
        ay[..., 1, 0] = np.conj(ay[..., 0, 1])
        return ax, ay

    def abelian(self, x, y):
        p = self.params
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.zeros(x.shape), np.sin(0.5 * p.omega(x)) ** 2 * p.phase_gradient

    def curvature(self, x, y=0.0):
        return self.params.curvature(np.asarray(x, float) + 0 * np.asarray(y, float))


# --- spin-1/2 in the vortex field --------------------------------------------

def spin_frame(omega, phi) -> np.ndarray:
    """exp(-i s3 phi/2) exp(i s1 Omega/2) exp(i s3 phi/2), broadcast over inputs."""
    omega, phi = np.broadcast_arrays(np.asarray(omega, float), np.asarray(phi, float))
    c, s = np.cos(0.5 * omega), np.sin(0.5 * omega)
    e = np.exp(1j * phi)
    u = np.empty(omega.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = c
    u[..., 0, 1] = 1j * s * np.conj(e)
    u[..., 1, 0] = 1j * s * e
    u[..., 1, 1] = c
    return u


def _check_center_off_grid(grid: Grid2D, center) -> None:
    i = np.argmin(np.abs(grid.xi - center[0]))
    j = np.argmin(np.abs(grid.eta - center[1]))
    if (abs(grid.xi[i] - center[0]) < 1e-9 * grid.dxi
            and abs(grid.eta[j] - center[1]) < 1e-9 * grid.deta):
        raise ValueError(
            f"grid node coincides with the flux center {center}; "
            "offset the grid by half a cell (GridSpec.square(..., half_cell_offset=True))")


def spin_counter_term(omega, rho, domega=0.0, radial_term: str = "off"):
    """Scalar counter-term |A_12|^2 for the spin frame.

    ``radial_term`` selects the treatment of the radial piece: ``"off"``
    drops it, ``"squared"`` adds Omega'^2/4 (what A_rho.A_rho gives) and
    ``"literal"`` adds Omega'/4 as the term is sometimes printed.
    """
    b = np.sin(omega) ** 2 / (4 * np.asarray(rho, float) ** 2)
    if radial_term == "squared":
        b = b + 0.25 * np.asarray(domega) ** 2
    elif radial_term == "literal":
        b = b + 0.25 * np.asarray(domega)
    elif radial_term != "off":
        raise ValueError(f"unknown radial_term {radial_term!r}")
    return b


def spin_field_potentials(params: SpinFieldParams, grid: Grid2D, counter_term: bool = False,
                          disk_radius: float | None = None,
                          radial_term: str = "off") -> CoupledPotential:
    """V = B0, V12 = -i exp(-i phi) B_rho, optional counter-term outside ``disk_radius``."""
    _check_center_off_grid(grid, params.flux_center)
    rho, phi = grid.polar(params.flux_center)
    V = np.full(grid.shape, float(params.b0))
    V12 = -1j * np.exp(-1j * phi) * params.brho
    b = np.zeros(grid.shape)
    if counter_term:
        b = spin_counter_term(params.omega, rho, 0.0, radial_term)
        if disk_radius is not None:
            b = np.where(rho > disk_radius, b, 0.0)
    return CoupledPotential(V, V12, b)


def spin_frame_grid(params: SpinFieldParams, grid: Grid2D) -> np.ndarray:
    _, phi = grid.polar(params.flux_center)
    return spin_frame(np.full(grid.shape, params.omega), phi)


class SpinGaugeField:
    """Gauge potential of the spin frame for a radial mixing profile Omega(rho)."""

    def __init__(self, omega: Callable | float, domega: Callable | None = None,
                 center: tuple[float, float] = (0.0, 0.0)):
        if callable(omega):
            self._omega = omega
            if domega is None:
                h = 1e-5
                domega = lambda r: (omega(r + h) - omega(r - h)) / (2 * h)  # noqa: E731
        else:
            const = float(omega)
            self._omega = lambda r: np.full(np.shape(r), const)
            domega = domega or (lambda r: np.zeros(np.shape(r)))
        self._domega = domega
        self.center = tuple(center)

    def omega(self, rho):
        return self._omega(np.asarray(rho, float))

    def domega(self, rho):
        return self._domega(np.asarray(rho, float))

    def _polar(self, x, y):
        dx = np.asarray(x, float) - self.center[0]
        dy = np.asarray(y, float) - self.center[1]
        rho = np.hypot(dx, dy)
        if np.any(rho == 0):
            raise ValueError("gauge field is singular at the flux center")
        return rho, np.arctan2(dy, dx)

    def a_phi(self, rho, phi):
        """phi-component of A (coefficient of phi_hat)."""
        rho, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(phi, float))
        om = self.omega(rho)
        e = np.exp(-1j * phi)
        out = np.empty(rho.shape + (2, 2), complex)
        out[..., 0, 0] = np.cos(om) - 1
        out[..., 0, 1] = 1j * e * np.sin(om)
        out[..., 1, 0] = -1j * np.conj(e) * np.sin(om)
        out[..., 1, 1] = 1 - np.cos(om)
        return out / (2 * rho[..., None, None])

    def a_rho(self, rho, phi):
        rho, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(phi, float))
        e = np.exp(-1j * phi)
        out = np.zeros(rho.shape + (2, 2), complex)
        out[..., 0, 1] = e
        out[..., 1, 0] = np.conj(e)
        return -0.5 * self.domega(rho)[..., None, None] * out

    def cartesian(self, x, y):
        rho, phi = self._polar(x, y)
        ap, ar = self.a_phi(rho, phi), self.a_rho(rho, phi)
        c, s = np.cos(phi)[..., None, None], np.sin(phi)[..., None, None]
        # phi_hat = (-sin, cos), rho_hat = (cos, sin)
        return ar * c - ap * s, ar * s + ap * c

    def abelian_phi(self, rho):
        """phi-component of A_P = (1 - cos Omega) / (2 rho)."""
        rho = np.asarray(rho, float)
        return (1 - np.cos(self.omega(rho))) / (2 * rho)

    def abelian(self, x, y):
        rho, phi = self._polar(x, y)
        a = self.abelian_phi(rho)
        return -a * np.sin(phi), a * np.cos(phi)

    def curvature(self, x, y=None):
        """Curl of A_P, sin(Omega) Omega' / (2 rho); called with a radius if ``y`` is None."""
        rho = np.asarray(x, float) if y is None else self._polar(x, y)[0]
        return np.sin(self.omega(rho)) * self.domega(rho) / (2 * rho)


def gauge_field_spin(omega_profile: Callable | float, flux_center=(0.0, 0.0),
                     domega: Callable | None = None) -> SpinGaugeField:
    return SpinGaugeField(omega_profile, domega, flux_center)


# --- conical intersection ---------------------------------------------------

def conical_potentials(grid: Grid2D) -> CoupledPotential:
    return CoupledPotential(grid.XI.copy(), grid.ETA.astype(complex), np.zeros(grid.shape))


def conical_frame(phi) -> np.ndarray:
    """Single-valued complex frame diagonalizing [[x, y], [y, -x]].

    Equals exp(-i s2 phi/2) exp(+i s3 phi/2), the matrix printed alongside
    the construction; it is 2*pi periodic in phi.
    """
    phi = np.asarray(phi, float)
    c, s = np.cos(0.5 * phi), np.sin(0.5 * phi)
    ep, em = np.exp(0.5j * phi), np.exp(-0.5j * phi)
    u = np.empty(phi.shape + (2, 2), complex)
    u[..., 0, 0] = ep * c
    u[..., 0, 1] = -em * s
    u[..., 1, 0] = ep * s
    u[..., 1, 1] = em * c
    return u


def longuet_higgins_frame(phi) -> np.ndarray:
    """Real rotation frame; changes sign when phi advances by 2 pi."""
    phi = np.asarray(phi, float)
    c, s = np.cos(0.5 * phi), np.sin(0.5 * phi)
    u = np.empty(phi.shape + (2, 2))
    u[..., 0, 0] = c
    u[..., 0, 1] = -s
    u[..., 1, 0] = s
    u[..., 1, 1] = c
    return u


def conical_gauge(rho, phi) -> tuple[np.ndarray, np.ndarray]:
    """(A_phi, A_rho) of the conical frame; A_rho vanishes identically."""
    rho, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(phi, float))
    if np.any(rho <= 0):
        raise ValueError("conical gauge undefined at rho <= 0")
    e = np.exp(-1j * phi)
    a = np.empty(rho.shape + (2, 2), complex)
    a[..., 0, 0] = -1
    a[..., 0, 1] = -1j * e
    a[..., 1, 0] = 1j * np.conj(e)
    a[..., 1, 1] = 1
    return a / (2 * rho[..., None, None]), np.zeros_like(a)


# --- numerical connection (oracle for the closed forms) ----------------------

def gauge_from_frame(frame_fn: Callable, x, y, h: float = 1e-6):
    """``i U^dagger dU`` by central differences; returns (A_x, A_y)."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    u = frame_fn(x, y)
    ud = np.conj(np.swapaxes(u, -1, -2))
    dux = (frame_fn(x + h, y) - frame_fn(x - h, y)) / (2 * h)
    duy = (frame_fn(x, y + h) - frame_fn(x, y - h)) / (2 * h)
    return 1j * ud @ dux, 1j * ud @ duy
