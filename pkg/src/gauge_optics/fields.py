"""Two-channel state, observables, adiabatic projections and detector traces."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid2D

__all__ = [
    "SpinorField",
    "DetectorTrace",
    "norm",
    "expectation_position",
    "adiabatic_project",
    "sample_line",
    "fringe_minima_positions",
    "check_unitary_frame",
]

#: Densities below this fraction of the trace maximum are treated as absorber noise.
NOISE_FLOOR = 1e-14


@dataclass
class SpinorField:
    """psi = (f, g) on a grid at dimensionless time ``tau``.

    Channel order follows the diabatic basis of the coupled equations: ``f``
    is the upper component, ``g`` the lower.
    """

    grid: Grid2D
    f: np.ndarray
    g: np.ndarray
    tau: float = 0.0

    def __post_init__(self) -> None:
        self.f = np.asarray(self.f, dtype=np.complex128)
        self.g = np.asarray(self.g, dtype=np.complex128)
        self.grid.check_shape(self.f)
        self.grid.check_shape(self.g)
        if self.f.shape != self.grid.shape or self.g.shape != self.grid.shape:
            raise ValueError("channel arrays must be exactly grid-shaped")

    @classmethod
    def zeros(cls, grid: Grid2D, tau: float = 0.0) -> "SpinorField":
        return cls(grid, np.zeros(grid.shape, complex), np.zeros(grid.shape, complex), tau)

    @classmethod
    def from_stack(cls, grid: Grid2D, psi: np.ndarray, tau: float = 0.0) -> "SpinorField":
        return cls(grid, psi[0].copy(), psi[1].copy(), tau)

    def stack(self) -> np.ndarray:
        """Channels as one ``(2, nx, ny)`` array (a copy)."""
        return np.stack([self.f, self.g])

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.f.copy(), self.g.copy(), self.tau)

    def density(self) -> np.ndarray:
        return np.abs(self.f) ** 2 + np.abs(self.g) ** 2

    def __add__(self, other: "SpinorField") -> "SpinorField":
        if other.grid is not self.grid and other.grid.spec != self.grid.spec:
            raise ValueError("cannot add fields on different grids")
        return SpinorField(self.grid, self.f + other.f, self.g + other.g, self.tau)


@dataclass
class DetectorTrace:
    """Screen intensities sampled along the line ``xi = xi0``."""

    eta: np.ndarray
    total: np.ndarray
    ground: np.ndarray
    excited: np.ndarray
    tau: float
    xi0: float = float("nan")

    def __post_init__(self) -> None:
        n = len(self.eta)
        for name in ("total", "ground", "excited"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")

    def select(self, which: str) -> np.ndarray:
        if which not in ("total", "ground", "excited"):
            raise ValueError(f"unknown density {which!r}")
        return getattr(self, which)

    def window(self, lo: float, hi: float) -> "DetectorTrace":
        m = (self.eta >= lo) & (self.eta <= hi)
        return DetectorTrace(self.eta[m], self.total[m], self.ground[m], self.excited[m],
                             self.tau, self.xi0)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eta", "total", "ground", "excited", "tau"])
            for row in zip(self.eta, self.total, self.ground, self.excited):
                w.writerow([repr(float(v)) for v in row] + [repr(float(self.tau))])

    @classmethod
    def from_csv(cls, path: str | Path) -> "DetectorTrace":
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            if header != ["eta", "total", "ground", "excited", "tau"]:
                raise ValueError(f"unexpected trace header {header}")
            rows = np.array([[float(v) for v in row] for row in r])
        if rows.size == 0:
            return cls(np.empty(0), np.empty(0), np.empty(0), np.empty(0), 0.0)
        return cls(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], float(rows[0, 4]))


def norm(psi: SpinorField) -> float:
    return float(np.sum(psi.density()) * psi.grid.cell_area)


def expectation_position(psi: SpinorField) -> tuple[float, float]:
    rho = psi.density()
    total = rho.sum()
    if not total > 0:
        raise ValueError("expectation value of a zero-norm field")
    g = psi.grid
    xi_bar = float(np.dot(rho.sum(axis=1), g.xi) / total)
    eta_bar = float(np.dot(rho.sum(axis=0), g.eta) / total)
    return xi_bar, eta_bar


def check_unitary_frame(frame: np.ndarray, samples: int = 64, tol: float = 1e-10) -> None:
    """Raise if ``frame`` (shape ``(..., 2, 2)``) is not unitary on a random subsample."""
    flat = frame.reshape(-1, 2, 2)
    rng = np.random.default_rng(0)
    idx = rng.choice(flat.shape[0], size=min(samples, flat.shape[0]), replace=False)
    u = flat[idx]
    defect = np.abs(np.conj(np.swapaxes(u, -1, -2)) @ u - np.eye(2)).max()
    if defect > tol:
        raise ValueError(f"frame is not unitary (defect {defect:.3e})")


def adiabatic_project(psi: SpinorField, frame: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ground and excited densities in the adiabatic basis defined by ``frame``.

    ``frame[i, j]`` is the unitary whose columns are the adiabatic states at
    grid point ``(i, j)``: column 0 is the excited (upper) state and column 1
    the ground state, i.e. the eigenvector of the lower eigenvalue. The
    adiabatic amplitudes are ``frame^dagger @ psi``.
    """
    psi.grid.check_shape(frame[..., 0, 0])
    check_unitary_frame(frame)
    fc = np.conj(frame)
    excited = fc[..., 0, 0] * psi.f + fc[..., 1, 0] * psi.g
    ground = fc[..., 0, 1] * psi.f + fc[..., 1, 1] * psi.g
    return np.abs(ground) ** 2, np.abs(excited) ** 2


def _interp_column(arr: np.ndarray, grid: Grid2D, xi0: float) -> np.ndarray:
    xi = grid.xi
    if not (xi[0] <= xi0 <= xi[-1]):
        raise ValueError(f"xi0={xi0} outside the sampled domain [{xi[0]}, {xi[-1]}]")
    t = (xi0 - xi[0]) / grid.dxi
    i0 = int(np.floor(t))
    w = t - i0
    if i0 >= len(xi) - 1 or abs(w) < 1e-12:
        return arr[min(i0, len(xi) - 1)].copy()
    if abs(w - 1) < 1e-12:
        return arr[i0 + 1].copy()
    return (1 - w) * arr[i0] + w * arr[i0 + 1]


def sample_line(source: SpinorField | np.ndarray, xi0: float, grid: Grid2D | None = None,
                frame: np.ndarray | None = None, tau: float | None = None) -> DetectorTrace:
    """Densities along ``xi = xi0``, linearly interpolated between grid columns.

    ``source`` is either a :class:`SpinorField` or a real density grid (which
    then needs ``grid``). For a spinor the ground/excited densities come from
    ``frame`` (see :func:`adiabatic_project`); without a frame the diabatic
    channels are reported, ``g`` as ground and ``f`` as excited. A bare
    density grid has no channel information and reports zeros there.
    """
    if isinstance(source, SpinorField):
        grid = source.grid
        total = source.density()
        if frame is not None:
            ground, excited = adiabatic_project(source, frame)
        else:
            ground, excited = np.abs(source.g) ** 2, np.abs(source.f) ** 2
        tau = source.tau if tau is None else tau
    else:
        if grid is None:
            raise ValueError("a density grid needs its Grid2D")
        total = np.asarray(source, dtype=float)
        grid.check_shape(total)
        ground = excited = np.zeros_like(total)
        tau = 0.0 if tau is None else tau
    return DetectorTrace(
        eta=grid.eta.copy(),
        total=_interp_column(total, grid, xi0),
        ground=_interp_column(ground, grid, xi0),
        excited=_interp_column(excited, grid, xi0),
        tau=float(tau),
        xi0=float(xi0),
    )


def fringe_minima_positions(trace: DetectorTrace | tuple[np.ndarray, np.ndarray],
                            window: tuple[float, float], which: str = "total") -> np.ndarray:
    """Sub-grid local minima of a trace inside ``window``, ascending.

    Each discrete local minimum is refined by the vertex of the parabola
    through it and its two neighbours. Minima whose neighbours both lie
    below ``NOISE_FLOOR`` times the trace maximum are discarded as noise.
    """
    if isinstance(trace, DetectorTrace):
        eta, y = trace.eta, trace.select(which)
    else:
        eta, y = (np.asarray(a, dtype=float) for a in trace)
    lo, hi = window
    if lo < eta[0] or hi > eta[-1] or not hi > lo:
        raise ValueError(f"window {window} not inside trace range [{eta[0]}, {eta[-1]}]")
    floor = NOISE_FLOOR * np.max(y)
    out = []
    for i in range(1, len(y) - 1):
        if not (y[i] < y[i - 1] and y[i] <= y[i + 1]):
            continue
        if max(y[i - 1], y[i + 1]) < floor:
            continue
        denom = y[i - 1] - 2 * y[i] + y[i + 1]
        h = eta[i + 1] - eta[i]
        off = 0.5 * (y[i - 1] - y[i + 1]) / denom if denom > 0 else 0.0
        pos = eta[i] + off * h
        if lo <= pos <= hi:
            out.append(pos)
    if not out:
        raise ValueError("no minima in window")
    return np.array(sorted(out))
