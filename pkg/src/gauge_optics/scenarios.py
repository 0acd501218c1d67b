"""Configuration-driven runs: interferometer, velocity sieve, single loop, AB scattering, holonomy report.

A run is described by a YAML document whose keys are checked against the
defaults of its scenario; unknown keys and wrongly typed values are hard
errors that name the offending key path. ``run_scenario`` writes every
result file into ``output_dir`` together with ``config.yaml`` (the fully
resolved configuration) and ``manifest.json``.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import json
import logging
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import yaml

from . import __version__, kernels
from .classical import ClassicalState, integrate, write_trajectory_csv
from .fields import (DetectorTrace, SpinorField, adiabatic_project, expectation_position,
                     fringe_minima_positions, norm)
from .grid import GridSpec, make_grid
from .holonomy import (PathSpec, abelian_line_phase, abelian_loop_phase, format_report,
                       frame_reconstruction_check, pair_fringe_phase, wilson_closed_form, wilson_line)
from .models import (SievePotentialParams, SpinFieldParams, SpinGaugeField, sieve_frame,
                     sieve_potentials, spin_field_potentials, spin_frame_grid)
from .oracles import FringeParams, ScatterParams, fringe_envelope, free_fringe, screen_profile
from .propagator import (Disk, NumericalBlowUp, Propagator, PropagatorConfig, default_dtau, run,
                         write_snapshot)
from .wavepackets import CHANNELS, PacketSpec, coherent_pair, gaussian, slab, to_spinor

__all__ = [
    "PRESETS",
    "SCENARIOS",
    "ConfigError",
    "FitError",
    "ScenarioConfig",
    "RunManifest",
    "CheckRecord",
    "TraceComparison",
    "load_config",
    "default_config",
    "fit_fringe_phase",
    "compare_traces",
    "minima_displacement",
    "run_scenario",
]

log = logging.getLogger(__name__)

#: regime presets: (gap / k^2, Omega)
PRESETS = {
    "free": (10.0, 0.0),
    "adiabatic": (10.0, np.pi / 2),
    "near_adiabatic": (0.1, 2 * np.pi / 3),
    "diabatic": (0.007, 2 * np.pi / 3),
}

SCENARIOS = ("interfere", "sieve", "single_loop", "scatter", "holonomy_report")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class FitError(ValueError):
    pass


# --- schema -----------------------------------------------------------------

_SQUARE_512 = GridSpec.square(512, 16.0, half_cell_offset=True).to_dict()

_PROPAGATION = {
    "dtau": None,
    "steps": None,
    "duration": None,
    "absorber_width": 0.0,
    "absorber_strength": 0.0,
    "disk": None,
}

_DISK = {"center": [0.0, 0.0], "radius": 1.0, "kind": "mask", "wall_height": 0.0, "wall_width": 0.0}

_PATH = {
    "name": "",
    "kind": "polyline",
    "nsteps": 1000,
    "center": [0.0, 0.0],
    "radius": 1.0,
    "phi_start": 0.0,
    "phi_end": float(2 * np.pi),
    "orientation": None,
    "vertices": [],
}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "interfere": {
        "grid": dict(_SQUARE_512),
        "propagation": dict(_PROPAGATION),
        "model": {"preset": "adiabatic", "gap_ratio": None, "omega": None,
                  "flux_center": [0.0, 0.0], "counter_term": False},
        "packet": {"k": 4.0, "width": 1.0, "eta0": 6.0, "channel": "ground"},
        "detectors": {"locations": ["b", "d"], "which": ["total", "ground"], "snapshots": True},
        "paths": [],
        "analysis": {"window_periods": 2.5, "phase_tol": 0.05, "null_tol": 0.02,
                     "residual_tol": 0.01},
    },
    "sieve": {
        "grid": {"nx": 288, "ny": 160, "xi_min": -18.0, "xi_max": 18.0, "eta_min": -10.0, "eta_max": 10.0},
        "propagation": dict(_PROPAGATION, duration=1.4, absorber_width=0.06, absorber_strength=10.0),
        "model": {"delta": 150.0, "v0": 10.0, "b0": 1.0, "l_param": 1.0, "beta": 0.5, "mass": 0.5,
                  "counter_term": True},
        "packet": {"x0": -7.0, "width": 1.0, "speed_factors": [1.0, 0.95, 1.05]},
        "detectors": {"samples": 20},
        "paths": [],
        "analysis": {"classical_tol": 1e-12},
    },
    "scatter": {
        "grid": dict(_SQUARE_512),
        "propagation": dict(_PROPAGATION, absorber_width=0.06, absorber_strength=10.0, disk=dict(_DISK)),
        "model": {"preset": "adiabatic", "gap_ratio": None, "omega": None, "flux_center": [0.0, 0.0],
                  "counter_term": False, "reference": True, "incident_phase": "ab"},
        "packet": {"k": 4.0, "thickness": 1.5, "front": -4.0, "edge_smoothing": 16, "half_width": None},
        "detectors": {"screen": 4.0, "snapshots": 33, "span": 0.8, "write_snapshot": True},
        "paths": [],
        "analysis": {"nodal_tol": 0.05, "lobe_range": 1.5},
    },
    "single_loop": {
        "grid": {},
        "propagation": {},
        "model": {"preset": "adiabatic", "omega": None, "flux_center": [0.0, 0.0]},
        "packet": {},
        "detectors": {},
        "paths": [
            dict(_PATH, name="a-b-c", nsteps=20000, vertices=[[-6.0, 0.0], [0.0, 6.0], [6.0, 0.0]]),
            dict(_PATH, name="a-d-c", nsteps=20000, vertices=[[-6.0, 0.0], [0.0, -6.0], [6.0, 0.0]]),
        ],
        "analysis": {"phase_tol": 1e-6, "wilson_tol": 1e-8},
    },
    "holonomy_report": {
        "grid": {},
        "propagation": {},
        "model": {"omega": 1.1, "flux_center": [0.0, 0.0]},
        "packet": {},
        "detectors": {},
        "paths": [
            dict(_PATH, name="arc", kind="arc", nsteps=10000, radius=1.3, phi_start=0.2, phi_end=1.9),
            dict(_PATH, name="diamond", nsteps=40000,
                 vertices=[[0.0, -6.0], [6.0, 0.0], [0.0, 6.0], [-6.0, 0.0], [0.0, -6.0]]),
        ],
        "analysis": {"convergence_steps": [100, 1000, 10000], "line_tol": 1e-8, "group_tol": 1e-12,
                     "frame_samples": 10, "seed": 0},
    },
}

# keys whose default is null, with the type a non-null value must have
_NULLABLE = {
    "propagation.dtau": float,
    "propagation.steps": int,
    "propagation.duration": float,
    "propagation.disk": dict,
    "model.gap_ratio": float,
    "model.omega": float,
    "packet.half_width": float,
    "paths[].orientation": int,
}

_CHOICES = {
    "model.preset": tuple(PRESETS),
    "model.incident_phase": ("ab", "plain"),
    "packet.channel": CHANNELS,
    "propagation.disk.kind": ("mask", "smooth"),
    "paths[].kind": ("arc", "polyline"),
}

_SUBSETS = {
    "detectors.locations": ("b", "d"),
    "detectors.which": ("total", "ground", "excited"),
}


def _schema_key(path: str) -> str:
    """Strip list indices: ``paths[1].kind`` -> ``paths[].kind``."""
    out, depth = [], 0
    for ch in path:
        if ch == "[":
            depth += 1
            out.append("[]")
        elif ch == "]":
            depth -= 1
        elif depth == 0:
            out.append(ch)
    return "".join(out)


def _check_scalar(default, value, path: str):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        if not np.isfinite(value):
            raise ConfigError(path, "must be finite")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    raise ConfigError(path, "unsupported value")


def _merge(default, value, path: str):
    key = _schema_key(path)
    if value is None:
        if default is None and key in _NULLABLE:
            return None
        raise ConfigError(path, "may not be null")
    if default is None:
        kind = _NULLABLE.get(key)
        if kind is None:
            raise ConfigError(path, "unknown key")
        if kind is dict:
            return _merge(_DISK, value, path)
        return _check_scalar(kind(0), value, path)
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(path, "expected a mapping")
        out = copy.deepcopy(default)
        for k, v in value.items():
            sub = f"{path}.{k}" if path else str(k)
            if k not in default:
                raise ConfigError(sub, "unknown key")
            out[k] = _merge(default[k], v, sub)
        return out
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(path, "expected a list")
        if key == "paths":
            if not default and value:
                raise ConfigError(path, "not used by this scenario")
            return [_merge(_PATH, v, f"{path}[{i}]") for i, v in enumerate(value)]
        if not default:
            if key.endswith("vertices"):
                return [_merge([0.0, 0.0], v, f"{path}[{i}]") for i, v in enumerate(value)]
            if value:
                raise ConfigError(path, "not used by this scenario")
            return []
        if key in ("model.flux_center", "propagation.disk.center", "paths[].center") or key.endswith("vertices[]"):
            if len(value) != 2:
                raise ConfigError(path, "expected a point [xi, eta]")
        return [_check_scalar(default[0], v, f"{path}[{i}]") for i, v in enumerate(value)]
    return _check_scalar(default, value, path)


def _validate(d: dict) -> None:
    def walk(node, path):
        if isinstance(node, dict):
            for k, v in node.items():
                walk(v, f"{path}.{k}" if path else k)
        elif isinstance(node, list):
            for i, v in enumerate(node):
                walk(v, f"{path}[{i}]")
        key = _schema_key(path)
        if key in _CHOICES and node is not None and node not in _CHOICES[key]:
            raise ConfigError(path, f"must be one of {_CHOICES[key]}, got {node!r}")
        if key in _SUBSETS:
            bad = [x for x in node if x not in _SUBSETS[key]]
            if bad or not node:
                raise ConfigError(path, f"entries must be a non-empty subset of {_SUBSETS[key]}")
    walk(d, "")
    if d["grid"]:
        try:
            GridSpec(**d["grid"])
        except (TypeError, ValueError) as exc:
            raise ConfigError("grid", str(exc)) from None
    prop = d["propagation"]
    if prop:
        for k in ("dtau", "duration"):
            if prop[k] is not None and not prop[k] > 0:
                raise ConfigError(f"propagation.{k}", "must be positive")
        if prop["steps"] is not None and prop["steps"] < 1:
            raise ConfigError("propagation.steps", "must be >= 1")
        if not 0 <= prop["absorber_width"] <= 0.25:
            raise ConfigError("propagation.absorber_width", "must lie in [0, 0.25]")
        if prop["absorber_strength"] < 0:
            raise ConfigError("propagation.absorber_strength", "must be >= 0")
        if prop["disk"] is not None and not prop["disk"]["radius"] > 0:
            raise ConfigError("propagation.disk.radius", "must be positive")
    for i, p in enumerate(d["paths"]):
        try:
            _path_spec(p)
        except ValueError as exc:
            raise ConfigError(f"paths[{i}]", str(exc)) from None
    for k, v in d["packet"].items():
        if k in ("k", "width", "eta0", "thickness") and not v > 0:
            raise ConfigError(f"packet.{k}", "must be positive")
    if d["scenario"] == "sieve" and d["model"]["mass"] != 0.5:
        raise ConfigError("model.mass", "the quantum kinetic term fixes the mass at 1/2")


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved run description; every section is a plain mapping."""

    scenario: str
    output_dir: str
    grid: dict
    propagation: dict
    model: dict
    packet: dict
    detectors: dict
    paths: list
    analysis: dict

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "expected a mapping")
        scenario = data.get("scenario")
        if scenario not in SCENARIOS:
            raise ConfigError("scenario", f"must be one of {SCENARIOS}, got {scenario!r}")
        out = data.get("output_dir", f"out_{scenario}")
        if not isinstance(out, str) or not out:
            raise ConfigError("output_dir", "expected a non-empty path string")
        body = {k: v for k, v in data.items() if k not in ("scenario", "output_dir")}
        merged = _merge(_DEFAULTS[scenario], body, "")
        merged = {"scenario": scenario, "output_dir": out, **merged}
        _validate(merged)
        return cls(**merged)

    @classmethod
    def from_yaml(cls, text: str) -> "ScenarioConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError("<root>", f"not valid YAML: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def replace(self, **sections) -> "ScenarioConfig":
        """New config with some sections updated (merged key by key, validated)."""
        d = self.to_dict()
        for name, upd in sections.items():
            if isinstance(upd, dict) and isinstance(d.get(name), dict):
                d[name] = {**d[name], **upd}
            else:
                d[name] = upd
        return ScenarioConfig.from_dict(d)

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def grid_spec(self) -> GridSpec:
        return GridSpec(**self.grid)


def default_config(scenario: str, **sections) -> ScenarioConfig:
    return ScenarioConfig.from_dict({"scenario": scenario, **sections})


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    return ScenarioConfig.from_yaml(text)


def _path_spec(p: dict) -> PathSpec:
    return PathSpec(p["kind"], p["nsteps"], tuple(p["center"]), p["radius"], p["phi_start"],
                    p["phi_end"], p["orientation"], tuple(tuple(v) for v in p["vertices"]))


# --- trace analysis ---------------------------------------------------------

def fit_fringe_phase(eta, y, params: FringeParams) -> tuple[float, float, np.ndarray]:
    """Least-squares phase of ``y ~ E(eta) (c0 + c1 cos 2k eta + c2 sin 2k eta)``.

    Since cos^2(k eta + d) = (1 + cos(2 k eta + 2 d)) / 2 the fringe phase is
    ``d = atan2(-c2, c1) / 2`` (defined modulo pi). Returns the phase, its
    one-sigma error from the fit covariance, and the coefficients.
    """
    eta = np.asarray(eta, float)
    y = np.asarray(y, float)
    env = fringe_envelope(eta, params)
    A = np.c_[env, env * np.cos(2 * params.k * eta), env * np.sin(2 * params.k * eta)]
    c, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < 3:
        raise FitError("fringe fit is rank deficient")
    amp2 = c[1] ** 2 + c[2] ** 2
    if not amp2 > (1e-8 * max(abs(c[0]), np.abs(y).max())) ** 2:
        raise FitError("no fringe modulation to fit")
    delta = 0.5 * np.arctan2(-c[2], c[1])
    dof = max(len(y) - 3, 1)
    s2 = float(np.sum((A @ c - y) ** 2)) / dof
    cov = s2 * np.linalg.pinv(A.T @ A)
    grad = np.array([0.0, 0.5 * c[2] / amp2, -0.5 * c[1] / amp2])
    err = float(np.sqrt(max(grad @ cov @ grad, 0.0)))
    return float(delta), err, c


def _wrap(x: float, period: float) -> float:
    """Representative of ``x`` in [-period/2, period/2)."""
    return float((x + period / 2) % period - period / 2)


def minima_displacement(minima_a: np.ndarray, minima_b: np.ndarray, period: float) -> float:
    """Median offset of each minimum in ``a`` from its nearest neighbour in ``b`` modulo ``period``."""
    if len(minima_a) == 0 or len(minima_b) == 0:
        raise FitError("no minima to compare")
    offs = [_wrap(x - minima_b[np.argmin(np.abs([_wrap(x - m, period) for m in minima_b]))], period)
            for x in minima_a]
    return float(np.median(offs))


@dataclass(frozen=True)
class TraceComparison:
    max_residual: float       # max |sim - oracle| / max(oracle)
    l2_residual: float        # ||sim - oracle|| / ||oracle||
    delta: float              # fitted fringe phase of the simulated trace
    delta_error: float
    oracle_delta: float
    relative_phase: float     # delta - oracle_delta, modulo pi
    minima_displacement: float
    window: tuple[float, float]


def compare_traces(simulated: DetectorTrace, oracle: np.ndarray | Callable, params: FringeParams,
                   which: str = "total", window: tuple[float, float] | None = None) -> TraceComparison:
    """Residuals, fitted fringe phases and minima shift of a trace against an oracle.

    ``oracle`` is an array sampled on ``simulated.eta`` or a callable of eta.
    The default window covers the central five fringe periods.
    """
    eta = simulated.eta
    ref = oracle(eta) if callable(oracle) else np.asarray(oracle, float)
    if ref.shape != eta.shape:
        raise ValueError("oracle must be sampled on the simulated eta grid")
    if window is None:
        half = 2.5 * np.pi / params.k
        window = (max(-half, eta[1]), min(half, eta[-2]))
    m = (eta >= window[0]) & (eta <= window[1])
    y = simulated.select(which)
    diff = y[m] - ref[m]
    peak = np.abs(ref[m]).max()
    if not peak > 0:
        raise FitError("oracle vanishes in the window")
    d_sim, err, _ = fit_fringe_phase(eta[m], y[m], params)
    d_ref, _, _ = fit_fringe_phase(eta[m], ref[m], params)
    period = np.pi / params.k
    mins_sim = fringe_minima_positions((eta, y), window)
    mins_ref = fringe_minima_positions((eta, ref), window)
    return TraceComparison(
        max_residual=float(np.abs(diff).max() / peak),
        l2_residual=float(np.linalg.norm(diff) / np.linalg.norm(ref[m])),
        delta=d_sim,
        delta_error=err,
        oracle_delta=d_ref,
        relative_phase=_wrap(d_sim - d_ref, np.pi),
        minima_displacement=minima_displacement(mins_sim, mins_ref, period),
        window=(float(window[0]), float(window[1])),
    )


# --- manifest ---------------------------------------------------------------

@dataclass
class CheckRecord:
    name: str
    value: float
    tol: float | None
    passed: bool | None

    @classmethod
    def below(cls, name: str, value: float, tol: float | None) -> "CheckRecord":
        return cls(name, float(value), tol, None if tol is None else bool(abs(value) < tol))


@dataclass
class RunManifest:
    scenario: str
    config_hash: str
    versions: dict
    backend: str
    wall_time: float = 0.0
    files: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    status: str = "running"
    failed_step: int | None = None
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def check(self, name: str) -> CheckRecord:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        d = json.loads(text)
        d["checks"] = [CheckRecord(**c) for c in d["checks"]]
        return cls(**d)


def _versions() -> dict:
    import scipy

    return {"gauge_optics": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "pyyaml": yaml.__version__, "python": platform.python_version()}


def _write_csv(path: Path, header: Sequence[str], columns: Sequence) -> None:
    cols = [np.atleast_1d(np.asarray(c)) for c in columns]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([v if isinstance(v, str) else repr(float(v)) for v in row])


class _Run:
    """Bookkeeping shared by the scenario runners."""

    def __init__(self, cfg: ScenarioConfig, out: Path):
        self.cfg = cfg
        self.out = out
        self.manifest = RunManifest(cfg.scenario, cfg.config_hash, _versions(), kernels.BACKEND)

    def path(self, name: str) -> Path:
        if name not in self.manifest.files:
            self.manifest.files.append(name)
        return self.out / name

    def add(self, name: str, value: float, tol: float | None) -> CheckRecord:
        rec = CheckRecord.below(name, value, tol)
        self.manifest.checks.append(rec)
        status = "info" if rec.passed is None else ("PASS" if rec.passed else "FAIL")
        log.info("%-52s %.4g (tol %s) %s", name, value, tol, status)
        return rec

    def flag(self, name: str, ok: bool) -> CheckRecord:
        rec = CheckRecord(name, float(ok), None, bool(ok))
        self.manifest.checks.append(rec)
        return rec


def _time_stepping(prop: dict, grid, pot, duration: float, multiple: int = 1) -> tuple[float, int]:
    """(dtau, steps) covering ``duration`` exactly with a step count divisible by ``multiple``."""
    if prop["dtau"] is not None and prop["steps"] is not None:
        return prop["dtau"], prop["steps"]
    if prop["steps"] is not None:
        return duration / prop["steps"], prop["steps"]
    dt = prop["dtau"] or default_dtau(grid, pot)
    n = int(np.ceil(duration / dt / multiple - 1e-9)) * multiple
    return duration / n, n


def _spin_params(model: dict, k: float) -> SpinFieldParams:
    ratio, omega = PRESETS[model["preset"]]
    if model.get("gap_ratio") is not None:
        ratio = model["gap_ratio"]
    if model.get("omega") is not None:
        omega = model["omega"]
    return SpinFieldParams.from_gap(ratio * k * k, omega, tuple(model["flux_center"]))


def _config_for(prop: dict, dtau: float, steps: int = 0) -> PropagatorConfig:
    disk = None
    if prop.get("disk"):
        d = prop["disk"]
        disk = Disk(tuple(d["center"]), d["radius"], d["kind"], d["wall_height"], d["wall_width"])
    return PropagatorConfig(dtau=dtau, steps=steps, absorber_width=prop["absorber_width"],
                            absorber_strength=prop["absorber_strength"], disk=disk)


# --- interfere --------------------------------------------------------------

def _run_interfere(r: _Run) -> None:
    cfg = r.cfg
    pk, model, an = cfg.packet, cfg.model, cfg.analysis
    k, a, eta0 = pk["k"], pk["width"], pk["eta0"]
    grid = make_grid(cfg.grid_spec())
    par = _spin_params(model, k)
    pot = spin_field_potentials(par, grid, counter_term=model["counter_term"])
    frame = spin_frame_grid(par, grid)
    duration = cfg.propagation["duration"] or eta0 / (2 * k)
    dt, n = _time_stepping(cfg.propagation, grid, pot, duration)
    pconf = _config_for(cfg.propagation, dt, n)
    fp = FringeParams(a, k, eta0)
    gauge = SpinGaugeField(par.omega, center=par.flux_center)
    # which inline checks apply; an Omega override on the free preset makes it adiabatic
    if par.omega == 0:
        regime = "free"
    else:
        regime = "adiabatic" if model["preset"] == "free" else model["preset"]
    half = an["window_periods"] * np.pi / k
    period = np.pi / k
    prop = Propagator(grid, pot, pconf)

    predicted, minima = {}, {}
    for loc in cfg.detectors["locations"]:
        rev = loc == "d"
        meet = (-eta0 if rev else eta0, 0.0)
        start_up, start_down = (0.0, -eta0), (0.0, eta0)
        delta_pred = pair_fringe_phase(gauge, start_up, start_down, meet) if par.omega != 0 else 0.0
        predicted[loc] = delta_pred
        psi = coherent_pair(eta0, k, a, grid, reversed=rev, frame=frame, channel=pk["channel"],
                            absorber_width=pconf.absorber_width)
        snaps, traces = run(psi, pot, pconf, [n * dt], [meet[0]], frame=frame, propagator=prop)
        trace = traces[0]
        trace.to_csv(r.path(f"trace_{loc}.csv"))
        if cfg.detectors["snapshots"]:
            write_snapshot(r.path(f"snapshot_{loc}.bin"), snaps[-1])
        r.add(f"{loc}: norm", norm(snaps[-1]), None)
        if regime == "free":
            oracle = free_fringe(trace.eta, fp)
        else:
            oracle = fringe_envelope(trace.eta, fp) * np.cos(k * trace.eta + delta_pred) ** 2
        win = (-half, half)
        for which in cfg.detectors["which"]:
            y = trace.select(which)
            _write_csv(r.path(f"compare_{loc}_{which}.csv"), ["eta", "simulated", "oracle", "residual"],
                       [trace.eta, y, oracle, y - oracle])
            if which == "excited":
                continue
            cmp = compare_traces(trace, oracle, fp, which, win)
            minima[(loc, which)] = fringe_minima_positions(trace, win, which)
            r.add(f"{loc} {which}: fitted phase", cmp.delta, None)
            r.add(f"{loc} {which}: fitted phase error", cmp.delta_error, None)
            if regime == "free" and which == "total":
                r.add(f"{loc} total: max residual / peak", cmp.max_residual, an["residual_tol"])
            elif regime == "adiabatic":
                r.add(f"{loc} {which}: phase - prediction", _wrap(cmp.delta - delta_pred, np.pi),
                      an["phase_tol"])
            else:
                r.add(f"{loc} {which}: phase - prediction", _wrap(cmp.delta - delta_pred, np.pi), None)
        r.add(f"{loc}: predicted phase", delta_pred, None)

    if not {"b", "d"} <= set(cfg.detectors["locations"]):
        return
    dx = grid.dxi
    loop = PathSpec("polyline", 4000, vertices=((0, -eta0), (eta0, 0), (0, eta0), (-eta0, 0), (0, -eta0)))
    encloses = par.omega != 0 and abelian_loop_phase(gauge, loop).winding != 0
    pred_disp = _wrap(-(predicted["b"] - predicted["d"]) / k, period)
    for which in cfg.detectors["which"]:
        if which == "excited":
            continue
        disp = minima_displacement(minima[("b", which)], minima[("d", which)], period)
        dphase = _wrap(r.manifest.check(f"b {which}: fitted phase").value
                       - r.manifest.check(f"d {which}: fitted phase").value, np.pi)
        r.add(f"{which}: minima displacement b - d", disp, None)
        r.add(f"{which}: predicted displacement b - d", pred_disp, None)
        if regime == "adiabatic":
            r.add(f"{which}: displacement - prediction", _wrap(disp - pred_disp, period), dx)
            if not encloses:
                r.add(f"{which}: phase difference b - d (null)", dphase, an["null_tol"])
        elif regime == "diabatic":
            if which == "total":
                r.add("total: displacement (washout)", disp, dx)
            else:
                r.add(f"{which}: displacement - prediction", _wrap(disp - pred_disp, period), 2 * dx)
        else:
            r.add(f"{which}: displacement - prediction", _wrap(disp - pred_disp, period), None)


# --- sieve ------------------------------------------------------------------

def _run_sieve(r: _Run) -> None:
    cfg = r.cfg
    m, pk = cfg.model, cfg.packet
    p = SievePotentialParams(delta=m["delta"], v0=m["v0"], b0=m["b0"], l_param=m["l_param"],
                             beta=m["beta"], mass=m["mass"])
    grid = make_grid(cfg.grid_spec())
    pot = sieve_potentials(p, grid, counter_term=m["counter_term"])
    frame = sieve_frame(p, grid)
    samples = cfg.detectors["samples"]
    duration = cfg.propagation["duration"]
    dt, n = _time_stepping(cfg.propagation, grid, pot, duration, samples)
    if n % samples:
        raise ConfigError("detectors.samples", f"must divide the step count {n}")
    pconf = _config_for(cfg.propagation, dt, n)
    prop = Propagator(grid, pot, pconf)
    a, x0 = pk["width"], pk["x0"]
    chunk = n // samples
    for f in pk["speed_factors"]:
        v = f * p.v0
        tag = f"v{f:.3f}"
        env = gaussian(PacketSpec((x0, 0.0), (p.mass * v, 0.0), a), grid, pconf.absorber_width)
        psi = to_spinor(env, "ground", grid, frame).stack()
        rows = [(0.0, x0, 0.0, 1.0, 0.0)]
        for i in range(samples):
            psi = prop.evolve(psi, chunk, first_index=i * chunk)
            s = SpinorField.from_stack(grid, psi, (i + 1) * chunk * dt)
            x, y = expectation_position(s)
            _, exc = adiabatic_project(s, frame)
            rows.append((s.tau, x, y, norm(s), float(exc.sum() * grid.cell_area)))
        q = np.array(rows)
        _write_csv(r.path(f"sieve_{tag}_quantum.csv"), ["t", "x", "y", "norm", "excited"], q.T)
        traj = integrate(ClassicalState(x0, 0.0, v, 0.0), p, dt, n)
        write_trajectory_csv(r.path(f"sieve_{tag}_classical.csv"), traj)
        xc, yc = traj.position_at(q[:, 0])
        dev = np.hypot(q[:, 1] - xc, q[:, 2] - yc)
        _write_csv(r.path(f"sieve_{tag}_compare.csv"),
                   ["t", "x_quantum", "y_quantum", "x_classical", "y_classical", "deviation"],
                   [q[:, 0], q[:, 1], q[:, 2], xc, yc, dev])
        r.add(f"{tag}: final norm", q[-1, 3], None)
        r.add(f"{tag}: excited population", q[-1, 4], None)
        if f == 1.0:
            r.add(f"{tag}: classical max |y|", np.abs(traj.y).max(), cfg.analysis["classical_tol"])
            r.add(f"{tag}: quantum max |y|", np.abs(q[:, 2]).max(), a)
            r.add(f"{tag}: quantum - classical max deviation", dev.max(), a)
        else:
            r.add(f"{tag}: classical final y", traj.y[-1], None)
            r.add(f"{tag}: quantum final y", q[-1, 2], None)
            r.flag(f"{tag}: deflection signs agree", np.sign(q[-1, 2]) == np.sign(traj.y[-1]) != 0)
            r.add(f"{tag}: quantum - classical max deviation", dev.max(), a)


# --- scatter ----------------------------------------------------------------

def first_minimum(profile: Callable, start: float = 0.0, stop: float = 4.0, samples: int = 4001) -> float:
    """Position of the first local minimum of ``profile`` on (start, stop]."""
    x = np.linspace(start, stop, samples)
    y = profile(x)
    i = np.flatnonzero((y[1:-1] < y[:-2]) & (y[1:-1] <= y[2:]))
    if not len(i):
        raise ValueError("profile has no minimum in range")
    return float(x[i[0] + 1])


def _run_scatter(r: _Run) -> None:
    cfg = r.cfg
    m, pk, det, an = cfg.model, cfg.packet, cfg.detectors, cfg.analysis
    k = pk["k"]
    grid = make_grid(cfg.grid_spec())
    disk = cfg.propagation["disk"]
    if disk is None:
        raise ConfigError("propagation.disk", "scatter needs a disk")
    radius = disk["radius"]
    par = _spin_params(m, k)
    xc = pk["front"] - 2 * pk["thickness"]
    t_screen = (det["screen"] - xc) / (2 * k)
    if t_screen - det["span"] <= 0:
        raise ConfigError("detectors.span", "window starts before the run")
    runs = [("flux", par)]
    if m["reference"]:
        runs.append(("reference", SpinFieldParams.from_gap(par.gap, 0.0, par.flux_center)))
    fluence = {}
    for name, sp in runs:
        pot = spin_field_potentials(sp, grid, counter_term=m["counter_term"], disk_radius=radius)
        frame = spin_frame_grid(sp, grid)
        dt = cfg.propagation["dtau"] or default_dtau(grid, pot)
        times = np.round(np.linspace(t_screen - det["span"], t_screen + det["span"], det["snapshots"]) / dt) * dt
        psi = slab(pk["front"], pk["thickness"], k, pk["edge_smoothing"], grid, pk["half_width"], frame=frame)
        alpha = sp.flux / (2 * np.pi)
        if m["incident_phase"] == "ab" and alpha != 0:
            _, phi = grid.polar(sp.flux_center)
            fac = np.exp(1j * alpha * (np.mod(phi, 2 * np.pi) - np.pi))
            psi = SpinorField(grid, psi.f * fac, psi.g * fac, psi.tau)
        snaps, traces = run(psi, pot, _config_for(cfg.propagation, dt), times, [det["screen"]], frame=frame)
        eta = traces[0].eta
        tot = np.mean([t.total for t in traces], axis=0)
        gnd = np.mean([t.ground for t in traces], axis=0)
        fluence[name] = (alpha, tot, gnd)
        _write_csv(r.path(f"fluence_{name}.csv"), ["eta", "total", "ground"], [eta, tot, gnd])
        if det["write_snapshot"]:
            write_snapshot(r.path(f"snapshot_{name}.bin"), snaps[-1])
        r.add(f"{name}: final norm", norm(snaps[-1]), None)

    alpha, tot, _ = fluence["flux"]
    d = det["screen"]
    o1 = screen_profile(ScatterParams(alpha, k * radius, k), d, eta)
    o0 = screen_profile(ScatterParams(0.0, k * radius, k), d, eta)
    _write_csv(r.path("oracle_profiles.csv"), ["eta", "oracle_flux", "oracle_reference"], [eta, o1, o0])
    # central-spot window: half the distance to the first dark fringe of the flux-free profile
    w = 0.5 * first_minimum(lambda e: screen_profile(ScatterParams(0.0, k * radius, k), d, e), 0.0, 3.0, 601)
    win = np.abs(eta) <= w
    golden = o1[win].mean() / o0[win].mean()
    r.add("central window half-width", w, None)
    r.add("golden ratio (oracle)", golden, None)
    if "reference" in fluence:
        ref = fluence["reference"][1]
        ratio = tot[win].mean() / ref[win].mean()
        _write_csv(r.path("compare_scatter.csv"),
                   ["eta", "sim_flux", "sim_reference", "oracle_flux", "oracle_reference", "residual_ratio"],
                   [eta, tot / ref.max(), ref / ref.max(), o1 / o0.max(), o0 / o0.max(),
                    tot / ref.max() - o1 / o0.max()])
        r.add("central-spot ratio below golden", ratio, golden)
    on_axis = float(np.interp(0.0, eta, tot))
    lobe = tot[np.abs(eta) <= an["lobe_range"]].max()
    r.add("forward nodal line: on-axis / lobe", on_axis / lobe, an["nodal_tol"])


# --- holonomy scenarios -----------------------------------------------------

def _omega_from(model: dict) -> float:
    if model.get("omega") is not None:
        return model["omega"]
    return PRESETS[model["preset"]][1]


def _run_single_loop(r: _Run) -> None:
    cfg = r.cfg
    omega = _omega_from(cfg.model)
    center = tuple(cfg.model["flux_center"])
    gauge = SpinGaugeField(omega, center=center)
    if len(cfg.paths) != 2:
        raise ConfigError("paths", "single_loop needs exactly two arms")
    arms = [_path_spec(p) for p in cfg.paths]
    for i, arm in enumerate(arms):
        if arm.closed:
            raise ConfigError(f"paths[{i}]", "arms must be open paths")
    p1, p2 = arms[0].nodes()[0], arms[1].nodes()[0]
    if not (np.allclose(p1[0], p2[0]) and np.allclose(p1[-1], p2[-1])):
        raise ConfigError("paths", "arms must share their start and end points")
    theta = [abelian_line_phase(gauge, arm) for arm in arms]
    w1, w2 = wilson_line(gauge, arms[0]), wilson_line(gauge, arms[1])
    loop = w2.matrix.conj().T @ w1.matrix
    verts = [tuple(v) for v in cfg.paths[0]["vertices"]] + [tuple(v) for v in cfg.paths[1]["vertices"][::-1][1:]]
    closed = PathSpec("polyline", 2 * max(a.nsteps for a in arms), vertices=tuple(verts))
    lp = abelian_loop_phase(gauge, closed, center)
    flux = np.pi * (1 - np.cos(omega))
    adiabatic = _wrap(theta[0] - theta[1], 2 * np.pi)
    expected = _wrap(lp.winding * flux, 2 * np.pi)
    rows = [
        ("flux", flux),
        ("winding", lp.winding),
        ("abelian_phase_arm_1", theta[0]),
        ("abelian_phase_arm_2", theta[1]),
        ("adiabatic_loop_phase", adiabatic),
        ("expected_loop_phase", expected),
        ("diabatic_loop_defect", np.linalg.norm(loop - np.eye(2))),
    ]
    _write_csv(r.path("single_loop.csv"), ["quantity", "value"], [[q for q, _ in rows], [v for _, v in rows]])
    r.add("adiabatic loop phase - winding * flux", _wrap(adiabatic - expected, 2 * np.pi),
          cfg.analysis["phase_tol"])
    r.add("diabatic Wilson loop - identity", np.linalg.norm(loop - np.eye(2)), cfg.analysis["wilson_tol"])


def _run_holonomy_report(r: _Run) -> None:
    cfg = r.cfg
    an = cfg.analysis
    omega = cfg.model["omega"]
    center = tuple(cfg.model["flux_center"])
    gauge = SpinGaugeField(omega, center=center)
    lines = []
    for i, p in enumerate(cfg.paths):
        spec = _path_spec(p)
        label = p["name"] or f"path{i}"
        if spec.kind == "arc" and not spec.closed and np.allclose(spec.center, center):
            exact = wilson_closed_form(spec.phi_end, spec.phi_start, omega)
            errs = []
            for n in an["convergence_steps"]:
                s = _path_spec({**p, "nsteps": n})
                errs.append(wilson_line(gauge, s).distance(exact))
            _write_csv(r.path(f"convergence_{label}.csv"), ["nsteps", "frobenius_error"],
                       [an["convergence_steps"], errs])
            order = -np.polyfit(np.log(an["convergence_steps"][-2:]), np.log(errs[-2:]), 1)[0]
            r.add(f"{label}: line vs closed form at {an['convergence_steps'][-1]} steps", errs[-1], an["line_tol"])
            r.add(f"{label}: convergence order - 2", order - 2, 0.2)
            # group property on a shared segmentation
            half = spec.nsteps // 2
            mid = spec.phi_start + (spec.phi_end - spec.phi_start) * half / spec.nsteps
            first = _path_spec({**p, "nsteps": half, "phi_end": mid})
            second = _path_spec({**p, "nsteps": spec.nsteps - half, "phi_start": mid})
            whole = wilson_line(gauge, spec).matrix
            split = wilson_line(gauge, second).matrix @ wilson_line(gauge, first).matrix
            r.add(f"{label}: group property", np.linalg.norm(whole - split), an["group_tol"])
            lines.append(f"{label}: errors {', '.join(f'{e:.3e}' for e in errs)}; order {order:.3f}")
        if spec.closed:
            w = wilson_line(gauge, spec)
            r.add(f"{label}: Wilson loop - identity (pure gauge)", np.linalg.norm(w.matrix - np.eye(2)),
                  an["line_tol"])
            lp = abelian_loop_phase(gauge, spec, center)
            flux = np.pi * (1 - np.cos(omega))
            r.add(f"{label}: Abelian loop phase - winding * flux",
                  _wrap(lp.raw - lp.winding * flux, 2 * np.pi), 1e-6)
            lines.append(f"{label}: Abelian loop phase {lp.raw:.12f}, winding {lp.winding}")
    frames = frame_reconstruction_check(omega, an["frame_samples"], an["seed"])
    for c in frames:
        r.manifest.checks.append(CheckRecord(c.name, c.defect, c.tol, c.passed))
    report = format_report(frames) + "\n" + "\n".join(lines) + "\n"
    r.path("holonomy_report.txt").write_text(report)


_RUNNERS = {
    "interfere": _run_interfere,
    "sieve": _run_sieve,
    "scatter": _run_scatter,
    "single_loop": _run_single_loop,
    "holonomy_report": _run_holonomy_report,
}


def run_scenario(config: ScenarioConfig, output_dir: str | Path | None = None) -> RunManifest:
    """Run one scenario and write its outputs and ``manifest.json``.

    A numerical blow-up does not raise: the manifest is marked failed and
    records the step index.
    """
    out = Path(output_dir or config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError("output_dir", f"not writable: {exc}") from None
    r = _Run(config, out)
    r.path("config.yaml").write_text(config.to_yaml())
    t0 = time.perf_counter()
    try:
        _RUNNERS[config.scenario](r)
    except NumericalBlowUp as exc:
        r.manifest.status = "failed"
        r.manifest.failed_step = exc.step_index
        r.manifest.error = str(exc)
    except FloatingPointError as exc:
        r.manifest.status = "failed"
        r.manifest.error = str(exc)
    r.manifest.wall_time = time.perf_counter() - t0
    if r.manifest.status == "running":
        ok = all(c.passed is not False for c in r.manifest.checks)
        r.manifest.status = "pass" if ok else "fail"
    r.path("manifest.json")
    r.manifest.files.sort()
    (out / "manifest.json").write_text(r.manifest.to_json())
    return r.manifest
