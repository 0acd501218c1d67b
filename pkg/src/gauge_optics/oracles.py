"""Closed-form references: free and flux-shifted fringes, and Aharonov-Bohm scattering off a hard cylinder.

Scattering convention: the flux-free incident wave is ``exp(-i k r cos phi)``,
so it travels toward -x and the forward (downstream) direction is phi = pi.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import hankel1, jv, wofz

__all__ = [
    "FringeParams",
    "ScatterParams",
    "fringe_envelope",
    "free_fringe",
    "shifted_fringe",
    "fringe_minima",
    "ab_partial_wave",
    "ab_closed_form_half",
    "complex_erf",
    "screen_profile",
    "write_profile_csv",
    "TruncationWarning",
]


class TruncationWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class FringeParams:
    a: float
    k: float
    eta0: float

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.k > 0 and self.eta0 > 0):
            raise ValueError("a, k and eta0 must all be positive")


def fringe_envelope(eta, p: FringeParams):
    """Gaussian envelope of the merged-pair density on the meeting line."""
    eta = np.asarray(eta, float)
    s = 4 * p.a ** 4 * p.k ** 2 + p.eta0 ** 2
    return 8 * p.a ** 2 * p.k ** 2 / (np.pi * s) * np.exp(-2 * p.a ** 2 * p.k ** 2 * eta ** 2 / s)


def free_fringe(eta, p: FringeParams):
    """Density on the line xi = eta0 at tau = eta0/(2k) for the flux-free pair."""
    eta = np.asarray(eta, float)
    return fringe_envelope(eta, p) * np.cos(p.k * eta) ** 2


def shifted_fringe(eta, p: FringeParams, phi_flux: float, location: str):
    """Free fringe with cos^2(k eta) -> cos^2(k eta + Phi/4) at b, cos^2(k eta - Phi/4) at d."""
    if location not in ("b", "d"):
        raise ValueError("location must be 'b' or 'd'")
    delta = phi_flux / 4 if location == "b" else -phi_flux / 4
    eta = np.asarray(eta, float)
    return fringe_envelope(eta, p) * np.cos(p.k * eta + delta) ** 2


def fringe_minima(k: float, phi_flux: float, location: str, window: tuple[float, float]) -> np.ndarray:
    """Zeros of the shifted fringe inside ``window``: k eta_m = (2m+1) pi/2 -/+ Phi/4 at b/d."""
    sign = -1 if location == "b" else 1
    lo, hi = window
    m = np.arange(np.floor((k * lo - np.pi / 2 - abs(phi_flux)) / np.pi) - 1,
                  np.ceil((k * hi + abs(phi_flux)) / np.pi) + 2)
    eta = ((2 * m + 1) * np.pi / 2 + sign * phi_flux / 4) / k
    return eta[(eta >= lo) & (eta <= hi)]


@dataclass(frozen=True)
class ScatterParams:
    """Flux ``alpha`` = Phi / 2 pi, cylinder radius ``ka / k`` (``ka = 0`` is the bare flux line)."""

    alpha: float
    ka: float
    k: float = 1.0
    m_max: int | None = None

    def __post_init__(self) -> None:
        if self.ka < 0:
            raise ValueError("ka must be >= 0")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if self.m_max is not None and self.m_max < self.ka + 20:
            raise ValueError("m_max must be at least ka + 20")

    @property
    def radius(self) -> float:
        return self.ka / self.k

    def order_cutoff(self, kr_max: float) -> int:
        if self.m_max is not None:
            return self.m_max
        kr = max(kr_max, self.ka)
        return int(np.ceil(kr + 8 * np.cbrt(kr) + 25))


def _wall_ratio(nu: np.ndarray, ka: float) -> np.ndarray:
    """J_nu(ka) / H1_nu(ka); zero where J underflows (high orders) or ka = 0."""
    if ka == 0:
        return np.zeros_like(nu, dtype=complex)
    j = jv(nu, ka)
    h = hankel1(nu, ka)
    with np.errstate(invalid="ignore", over="ignore"):
        ratio = j / h
    return np.where(np.isfinite(ratio), ratio, 0.0)


def ab_partial_wave(r, phi, p: ScatterParams):
    """Scattering amplitude outside a hard cylinder threaded by flux ``alpha``.

    Partial-wave sum over |m| <= m_max of
    ``(-i)^nu [J_nu(kr) - J_nu(ka)/H1_nu(ka) H1_nu(kr)] exp(i m phi)`` with
    ``nu = |m - alpha|``. Orders whose terms fall below 1e-14 everywhere are
    dropped; a :class:`TruncationWarning` is issued when the last retained
    orders still exceed 1e-8.
    """
    r, phi = np.broadcast_arrays(np.asarray(r, float), np.asarray(phi, float))
    if np.any(r < p.radius * (1 - 1e-12)):
        raise ValueError("sample points inside the cylinder")
    kr = p.k * r
    mmax = p.order_cutoff(float(kr.max()) if kr.size else 0.0)
    m = np.arange(-mmax, mmax + 1)
    nu = np.abs(m - p.alpha)
    # scipy's hankel1 returns nan for subnormal orders; the functions are continuous in nu
    nu[nu < np.finfo(float).tiny] = 0.0
    coef = np.exp(-0.5j * np.pi * nu)
    ratio = _wall_ratio(nu, p.ka)
    flat_r = kr.reshape(-1)
    flat_phi = phi.reshape(-1)
    out = np.zeros(flat_r.shape, complex)
    tail = 0.0
    # chunk over samples to bound memory at (orders x samples)
    for s in range(0, flat_r.size, 4096):
        x = flat_r[s:s + 4096][None, :]
        nn = nu[:, None]
        radial = jv(nn, x).astype(complex)
        need_h = ratio != 0
        if np.any(need_h):
            with np.errstate(invalid="ignore", over="ignore"):
                h = hankel1(nn[need_h], x)
                term = ratio[need_h][:, None] * h
            radial[need_h] = radial[need_h] - np.where(np.isfinite(term), term, 0.0)
        terms = coef[:, None] * radial
        edge = np.abs(terms[[0, 1, -2, -1]]).max()
        tail = max(tail, float(edge))
        big = np.abs(terms).max(axis=1) >= 1e-14
        ang = np.exp(1j * np.outer(m[big], flat_phi[s:s + 4096]))
        out[s:s + 4096] = np.sum(terms[big] * ang, axis=0)
    if tail > 1e-8:
        warnings.warn(f"partial-wave tail {tail:.1e} exceeds 1e-8; raise m_max", TruncationWarning, stacklevel=2)
    return out.reshape(r.shape)


def complex_erf(z):
    """erf of a complex argument through the Faddeeva function: 1 - exp(-z^2) w(iz)."""
    z = np.asarray(z, complex)
    return 1 - np.exp(-z * z) * wofz(1j * z)


def ab_closed_form_half(r, phi, k: float = 1.0, branch: str = "matched"):
    """Closed form of the flux-line amplitude at alpha = 1/2 (no cylinder).

    ``branch="matched"`` evaluates
    ``-exp(i phi/2) exp(-i k r cos phi) erf(exp(3 pi i/4) sqrt(2 k r) cos(phi/2))``
    on the whole circle. This is the branch that agrees with the
    partial-wave series in phase as well as magnitude and is continuous
    through phi = 0. ``branch="printed"`` instead switches the signs
    ``exp(-/+ i pi/4) erf(exp(-/+ 3 pi i/4) ...)`` between the upper
    (0 < phi <= pi) and lower half-planes; it has the same modulus but a
    phase jump across phi = 0.
    """
    r, phi = np.broadcast_arrays(np.asarray(r, float), np.asarray(phi, float))
    x = np.sqrt(2 * k * r) * np.cos(0.5 * phi)
    base = np.exp(0.5j * phi) * np.exp(-1j * k * r * np.cos(phi))
    if branch == "matched":
        return -base * complex_erf(np.exp(0.75j * np.pi) * x)
    if branch == "printed":
        s = np.where((phi > 0) & (phi <= np.pi), 1.0, -1.0)
        return base * np.exp(-0.25j * np.pi) * np.exp(-0.25j * np.pi * s) * complex_erf(np.exp(-0.75j * np.pi * s) * x)
    raise ValueError("branch must be 'matched' or 'printed'")


def screen_profile(p: ScatterParams, distance: float, eta) -> np.ndarray:
    """|psi|^2 along a screen ``distance`` downstream of the cylinder axis.

    Reported in the frame where the incident wave moves toward +xi and the
    screen is the line xi = distance: the sample (distance, eta) maps to the
    scattering point (-distance, -eta), a rotation by pi that leaves the flux
    orientation unchanged.
    """
    eta = np.asarray(eta, float)
    x, y = -distance * np.ones_like(eta), -eta
    r = np.hypot(x, y)
    if np.any(r <= p.radius):
        raise ValueError("screen intersects the cylinder")
    return np.abs(ab_partial_wave(r, np.arctan2(y, x), p)) ** 2


def write_profile_csv(path: str | Path, eta, intensity, p: ScatterParams) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eta", "intensity", "alpha", "ka"])
        for e, v in zip(eta, intensity):
            w.writerow([repr(float(e)), repr(float(v)), repr(float(p.alpha)), repr(float(p.ka))])
