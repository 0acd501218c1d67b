"""Classical trajectories through the velocity sieve.

The ground-state particle feels the Lorentz-like force of the geometric
field H(x) and the gradient of the energy shift ``v0 y H(x)``:

    m ax = vy H(x) + y v0 H'(x)
    m ay = -vx H(x) + v0 H(x)

so a particle on y = 0 moving with vx = v0 feels no force at all. Units
match the quantum runs: with kinetic operator ``-laplacian`` the mass is
1/2 and a packet of wavenumber k moves at 2k.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .models import SievePotentialParams

__all__ = ["ClassicalState", "Trajectory", "sieve_rhs", "integrate", "write_trajectory_csv"]


@dataclass(frozen=True)
class ClassicalState:
    x: float
    y: float
    vx: float
    vy: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if not np.all(np.isfinite([self.x, self.y, self.vx, self.vy, self.t])):
            raise ValueError("non-finite classical state")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.vx, self.vy])


@dataclass
class Trajectory:
    """Columns t, x, y, vx, vy sampled at every step (t = 0 included)."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> ClassicalState:
        return ClassicalState(self.x[i], self.y[i], self.vx[i], self.vy[i], self.t[i])

    def position_at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Positions linearly interpolated to times ``t``."""
        return np.interp(t, self.t, self.x), np.interp(t, self.t, self.y)


def _rhs(u: np.ndarray, p: SievePotentialParams) -> np.ndarray:
    x, y, vx, vy = u
    h = p.curvature(x)
    ax = (vy * h + y * p.v0 * p.dcurvature(x)) / p.mass
    ay = (-vx * h + p.v0 * h) / p.mass
    return np.array([vx, vy, ax, ay])


def sieve_rhs(state: ClassicalState, params: SievePotentialParams) -> tuple[float, float, float, float]:
    """(vx, vy, ax, ay) at ``state``."""
    return tuple(float(v) for v in _rhs(state.as_array(), params))


def integrate(state0: ClassicalState, params: SievePotentialParams, dt: float, steps: int) -> Trajectory:
    """Classic fourth-order Runge-Kutta; aborts on a non-finite state."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    out = np.empty((steps + 1, 4))
    u = state0.as_array()
    out[0] = u
    for n in range(steps):
        k1 = _rhs(u, params)
        k2 = _rhs(u + 0.5 * dt * k1, params)
        k3 = _rhs(u + 0.5 * dt * k2, params)
        k4 = _rhs(u + dt * k3, params)
        u = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"non-finite trajectory after step {n + 1}")
        out[n + 1] = u
    t = state0.t + dt * np.arange(steps + 1)
    return Trajectory(t, out[:, 0], out[:, 1], out[:, 2], out[:, 3])


def write_trajectory_csv(path: str | Path, traj: Trajectory) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "vx", "vy"])
        for row in zip(traj.t, traj.x, traj.y, traj.vx, traj.vy):
            w.writerow([repr(float(v)) for v in row])
