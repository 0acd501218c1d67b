"""Command-line front end: ``gauge-optics run|check|oracles``.

Exit codes: 0 when every check passes, 1 when a check fails or a run
blows up, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from typing import Sequence

import numpy as np

from . import kernels
from .holonomy import (CheckResult, PathSpec, format_report, frame_reconstruction_check,
                       wilson_closed_form, wilson_line)
from .models import SpinGaugeField
from .oracles import (FringeParams, ScatterParams, ab_closed_form_half, ab_partial_wave, free_fringe,
                      screen_profile, shifted_fringe)
from .scenarios import ConfigError, compare_traces, load_config, run_scenario
from .fields import DetectorTrace

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def self_test() -> list[CheckResult]:
    """Fast oracle and holonomy checks (no wave propagation beyond a tiny kernel test)."""
    out: list[CheckResult] = []
    om = 1.1
    gauge = SpinGaugeField(om)
    exact = wilson_closed_form(1.9, 0.2, om)
    errs = [wilson_line(gauge, PathSpec("arc", n, radius=1.3, phi_start=0.2, phi_end=1.9)).distance(exact)
            for n in (1000, 10000)]
    out.append(CheckResult("Wilson line vs closed form, 1e4 steps", errs[1], 1e-8))
    out.append(CheckResult("Wilson line convergence order - 2", abs(np.log10(errs[0] / errs[1]) - 2), 0.1))
    out.extend(frame_reconstruction_check())

    rng = np.random.default_rng(1)
    r = np.linspace(1, 50, 40)
    phi = rng.uniform(-np.pi, np.pi, 40)
    series = ab_partial_wave(r, phi, ScatterParams(0.5, 0.0))
    closed = ab_closed_form_half(r, phi)
    out.append(CheckResult("AB series vs closed form (alpha = 1/2)",
                           float(np.max(np.abs(series - closed) / np.abs(closed))), 1e-6))
    plane = ab_partial_wave(r, phi, ScatterParams(0.0, 0.0))
    out.append(CheckResult("Jacobi-Anger plane wave", float(np.abs(plane - np.exp(-1j * r * np.cos(phi))).max()),
                           1e-10))
    th = np.linspace(-np.pi, np.pi, 60)
    out.append(CheckResult("hard wall |psi(a)|",
                           float(np.abs(ab_partial_wave(2.0, th, ScatterParams(0.3, 2.0))).max()), 1e-10))
    p0, p1 = ScatterParams(0.3, 0.5), ScatterParams(1.3, 0.5)
    out.append(CheckResult("integer flux periodicity",
                           float(np.abs(np.abs(ab_partial_wave(r, phi, p0)) ** 2
                                        - np.abs(ab_partial_wave(r, phi, p1)) ** 2).max()), 1e-8))

    fp = FringeParams(1.0, 1.0, 6.0)
    eta = np.linspace(-8, 8, 801)
    sim = shifted_fringe(eta, fp, np.pi / 2, "b")
    z = np.zeros_like(eta)
    cmp = compare_traces(DetectorTrace(eta, sim, sim, z, 0.0), free_fringe(eta, fp), fp)
    out.append(CheckResult("fringe fit recovers pi/8", abs(cmp.delta - np.pi / 8), 1e-3))

    f = rng.standard_normal((2, 16, 16)) + 1j * rng.standard_normal((2, 16, 16))
    e = [rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)) for _ in range(4)]
    w = rng.uniform(0, 1, (16, 16))
    a, b = f.copy(), f.copy()
    kernels.apply_potential(a[0], a[1], *e, w)
    kernels.backends()["python"].apply_potential(b[0], b[1], *e, w)
    out.append(CheckResult(f"{kernels.BACKEND} kernel vs python kernel", float(np.abs(a - b).max()), 1e-12))
    return out


def _write_rows(path: str | None, header: Sequence[str], columns: Sequence) -> None:
    fh = open(path, "w", newline="") if path else io.StringIO()
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*[np.atleast_1d(c) for c in columns]):
            w.writerow([repr(float(v)) for v in row])
        if not path:
            sys.stdout.write(fh.getvalue())
    finally:
        fh.close()


def _oracle(args: argparse.Namespace) -> int:
    if args.oracle in ("free-fringe", "shifted-fringe"):
        p = FringeParams(args.a, args.k, args.eta0)
        eta = np.linspace(args.eta_min, args.eta_max, args.n)
        if args.oracle == "free-fringe":
            y = free_fringe(eta, p)
        else:
            y = shifted_fringe(eta, p, args.flux, args.location)
        _write_rows(args.output, ["eta", "intensity"], [eta, y])
    elif args.oracle == "ab-profile":
        p = ScatterParams(args.alpha, args.ka, args.k)
        eta = np.linspace(args.eta_min, args.eta_max, args.n)
        _write_rows(args.output, ["eta", "intensity"], [eta, screen_profile(p, args.distance, eta)])
    elif args.oracle == "ab-closed-form":
        phi = np.linspace(-np.pi, np.pi, args.n)
        psi = ab_closed_form_half(args.r, phi, args.k, args.branch)
        _write_rows(args.output, ["phi", "re", "im", "abs"], [phi, psi.real, psi.imag, np.abs(psi)])
    elif args.oracle == "wilson":
        phis = np.linspace(args.phi0, args.phi, args.n)
        cols = [[] for _ in range(8)]
        gauge = SpinGaugeField(args.omega)
        for ph in phis[1:]:
            m = wilson_closed_form(ph, args.phi0, args.omega).matrix
            num = wilson_line(gauge, PathSpec("arc", args.nsteps, radius=1.0, phi_start=args.phi0,
                                              phi_end=ph)).matrix
            vals = [ph, m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag,
                    m[1, 0].real, m[1, 0].imag, np.linalg.norm(num - m)]
            for c, v in zip(cols, vals):
                c.append(v)
        _write_rows(args.output, ["phi", "w11_re", "w11_im", "w12_re", "w12_im", "w21_re", "w21_im",
                                  "numerical_error"], cols)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gauge-optics", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log check results while running")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario from a YAML config")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="override output_dir")

    sub.add_parser("check", help="run the oracle and holonomy self-test suite")

    o = sub.add_parser("oracles", help="evaluate an oracle to CSV")
    osub = o.add_subparsers(dest="oracle", required=True)
    for name in ("free-fringe", "shifted-fringe"):
        s = osub.add_parser(name)
        s.add_argument("--a", type=float, default=1.0)
        s.add_argument("--k", type=float, default=4.0)
        s.add_argument("--eta0", type=float, default=6.0)
        s.add_argument("--eta-min", type=float, default=-4.0)
        s.add_argument("--eta-max", type=float, default=4.0)
        s.add_argument("--n", type=int, default=401)
        if name == "shifted-fringe":
            s.add_argument("--flux", type=float, default=np.pi)
            s.add_argument("--location", choices=("b", "d"), default="b")
        s.add_argument("--output")
    s = osub.add_parser("ab-profile")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--ka", type=float, default=4.0)
    s.add_argument("--k", type=float, default=4.0)
    s.add_argument("--distance", type=float, default=4.0)
    s.add_argument("--eta-min", type=float, default=-4.0)
    s.add_argument("--eta-max", type=float, default=4.0)
    s.add_argument("--n", type=int, default=401)
    s.add_argument("--output")
    s = osub.add_parser("ab-closed-form")
    s.add_argument("--r", type=float, default=10.0)
    s.add_argument("--k", type=float, default=1.0)
    s.add_argument("--n", type=int, default=361)
    s.add_argument("--branch", choices=("matched", "printed"), default="matched")
    s.add_argument("--output")
    s = osub.add_parser("wilson")
    s.add_argument("--omega", type=float, default=1.1)
    s.add_argument("--phi0", type=float, default=0.0)
    s.add_argument("--phi", type=float, default=2 * np.pi)
    s.add_argument("--n", type=int, default=65)
    s.add_argument("--nsteps", type=int, default=2000)
    s.add_argument("--output")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "check":
        checks = self_test()
        print(format_report(checks))
        ok = all(c.passed is not False for c in checks)
        print("self-test", "passed" if ok else "FAILED")
        return EXIT_OK if ok else EXIT_FAIL
    if args.command == "oracles":
        try:
            return _oracle(args)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        manifest = run_scenario(cfg, args.output)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for c in manifest.checks:
        status = "info" if c.passed is None else ("PASS" if c.passed else "FAIL")
        print(f"{c.name:<52s} {c.value:12.5g}  {status}")
    if manifest.failed_step is not None:
        print(f"run failed at step {manifest.failed_step}: {manifest.error}", file=sys.stderr)
    elif manifest.error:
        print(f"run failed: {manifest.error}", file=sys.stderr)
    print(f"status: {manifest.status} ({manifest.wall_time:.1f} s)")
    return EXIT_OK if manifest.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
