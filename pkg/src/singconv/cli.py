"""Command-line interface.

Subcommands: convolve, moments, solve (poisson|yukawa|scatter),
convergence <experiment-id>, bench, emit.  Problem definitions can be given
in an INI-style config file (key = value sections) and overridden by flags.
Exit codes: 0 ok, 2 bad configuration, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, moments, solvers, windows
from .convolver import ConvolutionPlan, GridDensity, load_field_binary
from .kernels import (KernelSpec, build_moment_table, dipole_x1_kernel,
                      helmholtz_kernel, log_kernel, power_kernel,
                      yukawa_kernel)


class ConfigError(ValueError):
    pass


def parse_kernel(text: str, scale: float | None = None) -> KernelSpec:
    """Kernel descriptors: log, power:<gamma>, helmholtz:<kappa>,
    yukawa:<kappa>, dipole-x1.  Bare-kernel shorthands ln and abs:<gamma>
    select the unit-prefactor versions used in the convergence tables."""
    name, _, arg = text.partition(":")
    try:
        if name == "log":
            return log_kernel(scale=1.0 if scale is None else scale)
        if name == "ln":  # g = log|x| itself
            return log_kernel(scale=-2 * math.pi)
        if name == "power":
            return power_kernel(float(arg), scale=1.0 if scale is None else scale)
        if name == "abs":  # g = |x|^gamma itself
            return power_kernel(float(arg), scale=2 * math.pi)
        if name == "helmholtz":
            return helmholtz_kernel(float(arg))
        if name == "yukawa":
            return yukawa_kernel(float(arg))
        if name == "dipole-x1":
            return dipole_x1_kernel()
    except ValueError as exc:
        raise ConfigError(f"bad kernel {text!r}: {exc}") from exc
    raise ConfigError(f"unknown kernel {text!r}")


def parse_density(text: str):
    name, _, arg = text.partition(":")
    if name == "gaussian":
        return harness.gauss_density(float(arg) if arg else 0.05)
    if name == "poly":
        return harness.poly_density(int(arg) if arg else 3)
    if name == "dipole-gaussian":
        return harness.dipole_gauss_density()[0]
    raise ConfigError(f"unknown density {text!r}")


def load_config(path) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    if path:
        read = cfg.read(path)
        if not read:
            raise ConfigError(f"config file {path} not found")
    return cfg


def _get(cfg, section, key, fallback=None):
    try:
        return cfg.get(section, key, fallback=fallback)
    except (configparser.Error, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _grid_args(args, cfg):
    n = args.n or int(_get(cfg, "grid", "n", "64"))
    b = args.b or int(_get(cfg, "grid", "b", "3"))
    a = args.a if args.a is not None else float(_get(cfg, "grid", "a",
                                                     str(b - 1)))
    beta = args.beta if args.beta is not None else float(
        _get(cfg, "grid", "beta", "0.5"))
    return n, b, a, beta


def _outdir(args) -> Path:
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_convolve(args) -> int:
    cfg = load_config(args.config)
    n, b, a, beta = _grid_args(args, cfg)
    kernel = parse_kernel(args.kernel or _get(cfg, "kernel", "kind", "ln"))
    density = parse_density(args.density or _get(cfg, "density", "kind",
                                                 "gaussian:0.05"))
    u = GridDensity.from_function(density, n)
    if args.localized:
        field = windows.split_convolve(kernel, u, beta=beta, b=b, a=a)
    else:
        try:
            table = build_moment_table(kernel, n, b, a)
        except Exception:
            table = moments.build_moment_table_numeric(kernel, n, b, a=a)
        field = ConvolutionPlan(table).apply(u)
    out = _outdir(args)
    field.export_binary(out / "field.bin")
    if args.format == "csv":
        field.export_csv(out / "field.csv")
    elif args.format == "pgm":
        harness.emit(field, "pgm", out / "field.pgm")
    print(f"wrote {out / 'field.bin'}")
    return 0


def cmd_moments(args) -> int:
    cfg = load_config(args.config)
    n, b, a, beta = _grid_args(args, cfg)
    kernel = parse_kernel(args.kernel or _get(cfg, "kernel", "kind", "ln"))
    if args.localized:
        table = moments.build_moment_table_numeric(
            kernel, n, b, beta=beta, localized=True,
            window=windows.RadialWindow(beta))
    else:
        try:
            table = build_moment_table(kernel, n, b, a)
        except Exception:
            table = moments.build_moment_table_numeric(kernel, n, b, a=a)
    out = _outdir(args)
    path = out / f"{table.content_key()}.scmt"
    table.save(path)
    print(f"moment table ({table.provenance}) -> {path}")
    return 0


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    n, b, a, beta = _grid_args(args, cfg)
    out = _outdir(args)
    gmres_cfg = solvers.GmresConfig(
        tol=float(_get(cfg, "gmres", "tol", "1e-12")),
        restart=int(_get(cfg, "gmres", "restart", "50")),
        maxiter=int(_get(cfg, "gmres", "maxiter", "500")))
    if args.problem in ("poisson", "yukawa"):
        kappa = args.kappa or float(_get(cfg, "problem", "kappa", "1.0"))
        density = parse_density(args.density
                                or _get(cfg, "density", "kind", "gaussian:0.05"))
        problem = solvers.SourceProblem(args.problem, density, n, b=b, a=a,
                                        kappa=kappa if args.problem == "yukawa"
                                        else None)
        field = solvers.solve_source(problem)
        field.export_binary(out / "solution.bin")
        print(f"wrote {out / 'solution.bin'}")
        return 0
    # scattering
    kappa = args.kappa or float(_get(cfg, "problem", "kappa", "10.0"))
    contrast_name = args.contrast or _get(cfg, "problem", "contrast", "disc")
    params = {}
    for key in ("radius", "t1", "t0", "diameter", "half_side", "outer_half",
                "inner_half", "r0", "eps", "m0"):
        val = _get(cfg, "problem", f"contrast_{key}", None)
        if val is not None:
            params[key] = float(val)
    q = _get(cfg, "problem", "contrast_q", None)
    if q is not None:
        params["q"] = int(q)
    contrast = solvers.contrast_library(contrast_name, **params)
    smoothing = None
    if args.smoothing or _get(cfg, "problem", "smoothing", "off") == "on":
        radius = params.get("radius", 0.25)
        chi = windows.indicator_coeffs_disc((0.5, 0.5), radius, n, b)
        m0 = params.get("m0", -1.0)
        smoothing = solvers.Smoothing(
            chi, lambda xx, yy: m0 * np.ones_like(xx))
        if contrast_name != "disc":
            raise ConfigError("CLI smoothing currently supports disc contrast")
    problem = solvers.ScatteringProblem(kappa=kappa, contrast=contrast, n=n,
                                        b=b, a=a, smoothing=smoothing)
    sol = solvers.solve_scattering(problem, gmres_cfg)
    sol.scattered.export_binary(out / "scattered.bin")
    np.save(out / "total.npy", sol.total)
    print(f"iterations: {sol.iterations}; wrote {out / 'scattered.bin'}")
    return 0


def cmd_convergence(args) -> int:
    kwargs = {}
    if args.ns:
        kwargs["ns"] = tuple(int(s) for s in args.ns.split(","))
    reports = harness.run_convergence(args.experiment, **kwargs)
    out = _outdir(args)
    fmt = args.format or "table"
    suffix = {"table": "txt", "csv": "csv", "svg": "svg",
              "gnuplot-data": "dat"}[fmt]
    path = out / f"{args.experiment}.{suffix}"
    harness.emit(reports, fmt, path)
    print(harness.report_table(reports))
    print(f"wrote {path}")
    return 0


def cmd_bench(args) -> int:
    sizes = None
    if args.ns:
        sizes = [int(s) for s in args.ns.split(",")]
    report = harness.run_bench(sizes=sizes)
    out = _outdir(args)
    fmt = args.format or "table"
    suffix = {"table": "txt", "csv": "csv", "svg": "svg",
              "gnuplot-data": "dat"}[fmt]
    path = out / f"bench.{suffix}"
    harness.emit(report, fmt, path)
    print(harness.bench_table(report))
    print(f"wrote {path}")
    return 0


def cmd_emit(args) -> int:
    field = load_field_binary(args.input)
    out = Path(args.output)
    harness.emit(field, args.format or "pgm", out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="singconv",
        description="Fast high-order convolution with weakly singular "
                    "kernels; Poisson/Yukawa and Lippmann-Schwinger solvers.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=int, help="grid refinement")
        p.add_argument("--b", type=int, help="extension period (integer >= 3)")
        p.add_argument("--a", type=float, help="cut radius")
        p.add_argument("--beta", type=float, help="localization radius")
        p.add_argument("--kernel", help="log|ln|power:g|abs:g|helmholtz:k|"
                                        "yukawa:k|dipole-x1")
        p.add_argument("--config", help="INI config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", help="table|csv|svg|gnuplot-data|pgm")

    p = sub.add_parser("convolve", help="apply the convolution scheme")
    common(p)
    p.add_argument("--density", help="gaussian:sigma|poly:m|dipole-gaussian")
    p.add_argument("--localized", action="store_true")
    p.set_defaults(fn=cmd_convolve)

    p = sub.add_parser("moments", help="pre-compute a moment table")
    common(p)
    p.add_argument("--localized", action="store_true")
    p.set_defaults(fn=cmd_moments)

    p = sub.add_parser("solve", help="solve poisson|yukawa|scatter")
    common(p)
    p.add_argument("problem", choices=["poisson", "yukawa", "scatter"])
    p.add_argument("--kappa", type=float)
    p.add_argument("--density", help="source density (poisson/yukawa)")
    p.add_argument("--contrast", help="contrast name (scatter)")
    p.add_argument("--smoothing", action="store_true")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("convergence", help="run a named experiment")
    common(p)
    p.add_argument("experiment", help=", ".join(sorted(harness.EXPERIMENTS)))
    p.add_argument("--ns", help="comma-separated grid sizes")
    p.set_defaults(fn=cmd_convergence)

    p = sub.add_parser("bench", help="time the scheme across sizes")
    common(p)
    p.add_argument("--ns", help="comma-separated grid sizes")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("emit", help="convert a stored field file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--format", help="pgm|csv|binary")
    p.set_defaults(fn=cmd_emit)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (solvers.NumericFailure, moments.NoConvergenceError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
