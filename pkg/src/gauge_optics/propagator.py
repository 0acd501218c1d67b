"""Strang-split spectral propagation of the coupled two-channel equations.

One step of length ``dtau`` is

    half kinetic  ->  exact pointwise exp(-i M dtau), disk mask, absorber  ->  half kinetic

with ``M = [[V - b, V12], [conj(V12), -(V + b)]]`` and the kinetic factor
``exp(-i |k|^2 dtau / 2)`` applied in Fourier space. All position-space
operations sit between the two kinetic halves, so consecutive half steps
fuse into one full kinetic factor during a run.
"""
from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .fields import DetectorTrace, SpinorField, sample_line
from .grid import Grid2D, fft2, ifft2
from .models import CoupledPotential

__all__ = [
    "Disk",
    "PropagatorConfig",
    "Propagator",
    "NumericalBlowUp",
    "potential_exponential",
    "absorber_profile",
    "disk_mask",
    "apply_disk_mask",
    "apply_absorber",
    "step",
    "run",
    "default_dtau",
    "write_snapshot",
    "read_snapshot",
]

log = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"GOPT"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIII5d")


class NumericalBlowUp(RuntimeError):
    def __init__(self, step_index: int):
        super().__init__(f"non-finite amplitudes after step {step_index}")
        self.step_index = step_index


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float
    #: "mask" zeroes amplitudes inside; "smooth" adds a finite smoothstep wall instead.
    kind: str = "mask"
    wall_height: float = 0.0
    wall_width: float = 0.0

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")
        if self.kind not in ("mask", "smooth"):
            raise ValueError(f"unknown disk kind {self.kind!r}")


@dataclass(frozen=True)
class PropagatorConfig:
    dtau: float
    steps: int = 0
    absorber_width: float = 0.0
    absorber_strength: float = 0.0
    disk: Disk | None = None
    #: raise (instead of warn) when the step violates the resolution guidelines
    strict_dtau: bool = False

    def __post_init__(self) -> None:
        if not self.dtau > 0:
            raise ValueError("dtau must be positive")
        if not 0 <= self.absorber_width <= 0.25:
            raise ValueError("absorber_width must lie in [0, 0.25]")
        if self.absorber_strength < 0:
            raise ValueError("absorber_strength must be >= 0")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")


def default_dtau(grid: Grid2D, pot: CoupledPotential | None = None) -> float:
    """min(0.2 * min(dxi, deta)^2, 0.1 / max|M|)."""
    h = min(grid.dxi, grid.deta)
    dt = 0.2 * h * h
    if pot is not None and pot.max_abs() > 0:
        dt = min(dt, 0.1 / pot.max_abs())
    return dt


def potential_exponential(pot: CoupledPotential, dtau: float) -> tuple[np.ndarray, ...]:
    """Entries (e11, e12, e21, e22) of exp(-i M dtau) in closed form.

    With M = -b I + V s3 + Re(V12) s1 - Im(V12) s2 and r = |(V, V12)|,
    exp(-i M t) = exp(i b t) [cos(r t) I - i sin(r t) (M + b I) / r].
    """
    r = np.sqrt(pot.V ** 2 + np.abs(pot.V12) ** 2)
    c = np.cos(r * dtau)
    sinc = dtau * np.sinc(r * dtau / np.pi)  # sin(r t) / r, finite at r = 0
    e0 = np.exp(1j * pot.b_ct * dtau)
    e11 = e0 * (c - 1j * sinc * pot.V)
    e22 = e0 * (c + 1j * sinc * pot.V)
    e12 = e0 * (-1j * sinc * pot.V12)
    e21 = e0 * (-1j * sinc * np.conj(pot.V12))
    return tuple(np.ascontiguousarray(e) for e in (e11, e12, e21, e22))


def absorber_profile(grid: Grid2D, width: float) -> np.ndarray:
    """cos^8 ramp: 1 in the interior, falling to 0 at each domain edge over ``width`` (fraction)."""
    def ramp(coord, lo, hi):
        band = width * (hi - lo)
        w = np.ones_like(coord)
        if band <= 0:
            return w
        # distance into the band measured from its inner boundary
        d = np.maximum(lo + band - coord, coord - (hi - band))
        inside = d > 0
        w[inside] = np.cos(0.5 * np.pi * np.minimum(d[inside] / band, 1.0)) ** 8
        return w
    s = grid.spec
    # the periodic image of xi_min sits at xi_max, so the last node is one cell short of the edge
    wx = ramp(grid.xi, s.xi_min, s.xi_max)
    wy = ramp(grid.eta, s.eta_min, s.eta_max)
    return wx[:, None] * wy[None, :]


def disk_mask(grid: Grid2D, disk: Disk) -> np.ndarray:
    """1 outside the disk, 0 at nodes within ``radius`` of its center."""
    rho, _ = grid.polar(disk.center)
    return np.where(rho <= disk.radius, 0.0, 1.0)


def _smooth_wall(grid: Grid2D, disk: Disk) -> np.ndarray:
    rho, _ = grid.polar(disk.center)
    w = max(disk.wall_width, 2 * max(grid.dxi, grid.deta))
    t = np.clip((disk.radius + 0.5 * w - rho) / w, 0.0, 1.0)
    return disk.wall_height * t * t * (3 - 2 * t)


def apply_disk_mask(psi: SpinorField, disk: Disk) -> SpinorField:
    m = disk_mask(psi.grid, disk)
    return SpinorField(psi.grid, psi.f * m, psi.g * m, psi.tau)


def apply_absorber(psi: SpinorField, config: PropagatorConfig) -> SpinorField:
    """Multiply by the cos^8 ramp raised to ``absorber_strength * dtau``.

    The exponent makes the absorption per unit time independent of the
    step size; strength 0 is the identity.
    """
    if config.absorber_strength == 0 or config.absorber_width == 0:
        return psi.copy()
    w = absorber_profile(psi.grid, config.absorber_width) ** (config.absorber_strength * config.dtau)
    return SpinorField(psi.grid, psi.f * w, psi.g * w, psi.tau)


class Propagator:
    """Precomputed factors for repeated Strang steps on one grid and potential."""

    def __init__(self, grid: Grid2D, pot: CoupledPotential, config: PropagatorConfig):
        grid.check_shape(pot.V)
        self.grid = grid
        self.config = config
        self.dtau = config.dtau
        guide = default_dtau(grid, pot)
        if self.dtau > guide * (1 + 1e-9):
            msg = f"dtau={self.dtau:.3g} exceeds the resolution guideline {guide:.3g}"
            if config.strict_dtau:
                raise ValueError(msg)
            log.debug(msg)
        if config.disk is not None and config.disk.kind == "smooth":
            pot = CoupledPotential(pot.V, pot.V12, pot.b_ct - _smooth_wall(grid, config.disk))
        self.exp_v = potential_exponential(pot, self.dtau)
        self.kin_half = np.exp(-0.5j * self.dtau * grid.k2)
        self.kin_full = self.kin_half * self.kin_half
        weight = np.ones(grid.shape)
        if config.disk is not None and config.disk.kind == "mask":
            weight *= disk_mask(grid, config.disk)
        if config.absorber_strength > 0 and config.absorber_width > 0:
            weight *= absorber_profile(grid, config.absorber_width) ** (config.absorber_strength * self.dtau)
        self.weight = None if np.all(weight == 1.0) else np.ascontiguousarray(weight)

    def _kinetic(self, psi: np.ndarray, factor: np.ndarray) -> np.ndarray:
        return ifft2(fft2(psi) * factor)

    def _position(self, psi: np.ndarray) -> None:
        kernels.apply_potential(psi[0], psi[1], *self.exp_v, self.weight)

    def evolve(self, psi: np.ndarray, nsteps: int, first_index: int = 0) -> np.ndarray:
        """Advance a ``(2, nx, ny)`` array by ``nsteps`` fused Strang steps."""
        if nsteps == 0:
            return psi
        psi = np.ascontiguousarray(self._kinetic(psi, self.kin_half))
        for n in range(nsteps):
            self._position(psi)
            factor = self.kin_full if n < nsteps - 1 else self.kin_half
            psi = np.ascontiguousarray(self._kinetic(psi, factor))
            if (n & 63) == 63 or n == nsteps - 1:
                if not np.isfinite(psi[:, ::16, ::16]).all() or not np.isfinite(psi).all():
                    raise NumericalBlowUp(first_index + n + 1)
        return psi

    def step(self, psi: SpinorField) -> SpinorField:
        out = self.evolve(psi.stack(), 1)
        return SpinorField.from_stack(self.grid, out, psi.tau + self.dtau)


def step(psi: SpinorField, pot: CoupledPotential, dtau: float) -> SpinorField:
    """One Strang step without mask or absorber."""
    return Propagator(psi.grid, pot, PropagatorConfig(dtau=dtau)).step(psi)


def run(psi0: SpinorField, pot: CoupledPotential, config: PropagatorConfig,
        snapshot_times: Sequence[float] = (), detector_xi: Sequence[float] = (),
        frame: np.ndarray | None = None,
        propagator: Propagator | None = None) -> tuple[list[SpinorField], list[DetectorTrace]]:
    """Propagate ``psi0`` and collect snapshots and detector traces.

    Snapshot times must be multiples of ``dtau`` measured from ``psi0.tau``.
    At every snapshot a trace is recorded for each ``detector_xi`` (state
    selection through ``frame`` when given). With no snapshot times the run
    lasts ``config.steps`` steps and the final state is the one snapshot.
    """
    prop = propagator or Propagator(psi0.grid, pot, config)
    dt = config.dtau
    if not len(snapshot_times):
        step_marks = [config.steps]
    else:
        step_marks = []
        for t in snapshot_times:
            n = (t - psi0.tau) / dt
            if n < -1e-9 or abs(n - round(n)) > 1e-6 * max(1.0, abs(n)):
                raise ValueError(f"snapshot time {t} is not a non-negative multiple of dtau={dt}")
            step_marks.append(int(round(n)))
        if any(b < a for a, b in zip(step_marks, step_marks[1:])):
            raise ValueError("snapshot times must be ascending")
    snaps: list[SpinorField] = []
    traces: list[DetectorTrace] = []
    psi = psi0.stack()
    done = 0
    for mark in step_marks:
        psi = prop.evolve(psi, mark - done, first_index=done)
        done = mark
        snap = SpinorField.from_stack(psi0.grid, psi, psi0.tau + done * dt)
        snaps.append(snap)
        for xi0 in detector_xi:
            traces.append(sample_line(snap, xi0, frame=frame))
    return snaps, traces


def write_snapshot(path: str | Path, psi: SpinorField) -> None:
    """Binary dump: header then f and g as row-major little-endian complex128."""
    s = psi.grid.spec
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, s.nx, s.ny,
                              s.xi_min, s.xi_max, s.eta_min, s.eta_max, psi.tau))
        fh.write(np.ascontiguousarray(psi.f, dtype="<c16").tobytes())
        fh.write(np.ascontiguousarray(psi.g, dtype="<c16").tobytes())


def read_snapshot(path: str | Path) -> SpinorField:
    from .grid import GridSpec, make_grid

    data = Path(path).read_bytes()
    magic, version, nx, ny, x0, x1, y0, y1, tau = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError("not a snapshot file")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    grid = make_grid(GridSpec(nx, ny, x0, x1, y0, y1))
    n = nx * ny
    arr = np.frombuffer(data, dtype="<c16", offset=_HEADER.size, count=2 * n)
    return SpinorField(grid, arr[:n].reshape(nx, ny).copy(), arr[n:].reshape(nx, ny).copy(), tau)
