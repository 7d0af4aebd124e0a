"""Convergence studies, complexity benchmark, and report emission.

Every reproduction experiment is a named entry in EXPERIMENTS; each returns
a list of ConvergenceReport (one per table column).  References are either
closed-form solutions or, where none exists, the scheme's own solution on
the finest grid of the sweep restricted by index (grids nest because n
doubles).  The relative error is the sup-norm ratio over the density grid
and the numerical order of convergence is log2(eps_n / eps_2n), attached to
the finer row.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import moments, solvers, windows
from .convolver import ConvolutionPlan, GridDensity, GridField
from .kernels import (KernelSpec, UnsupportedKernelError, build_moment_table,
                      dipole_x1_kernel, log_kernel, power_kernel)

__all__ = [
    "BenchReport",
    "ConvergenceReport",
    "ConvergenceRow",
    "EXPERIMENTS",
    "emit",
    "localized_precompute_timing",
    "relative_error",
    "run_bench",
    "run_convergence",
]


# ------------------------------------------------------------------ reports

@dataclass
class ConvergenceRow:
    n: int
    eps: float
    noc: float | None = None


@dataclass
class ConvergenceReport:
    experiment: str
    kernel: str
    density: str
    reference: str  # "analytic" or "fine-grid self"
    rows: list = field(default_factory=list)
    label: str = ""

    def noc_at(self, n: int) -> float:
        for row in self.rows:
            if row.n == n and row.noc is not None:
                return row.noc
        raise KeyError(f"no noc entry for n={n}")

    def eps_at(self, n: int) -> float:
        for row in self.rows:
            if row.n == n:
                return row.eps
        raise KeyError(f"no row for n={n}")


@dataclass
class BenchReport:
    rows: list  # (n, N, seconds)
    slope: float
    prefactor: float
    r2: float


def relative_error(approx, exact) -> float:
    """sup_j |approx - exact| / sup_j |exact| over the density grid."""
    a = np.asarray(approx)
    e = np.asarray(exact)
    if a.shape != e.shape:
        raise ValueError("fields must share a grid")
    scale = np.max(np.abs(e))
    if scale == 0:
        raise ZeroDivisionError("reference field is identically zero")
    return float(np.max(np.abs(a - e)) / scale)


def _attach_noc(rows):
    for prev, cur in zip(rows, rows[1:]):
        if cur.n != 2 * prev.n:
            raise ValueError("sweep sizes must double")
        if prev.eps > 0 and cur.eps > 0:
            cur.noc = math.log2(prev.eps / cur.eps)
    return rows


def _restrict(samples, n_from, n_to):
    step = n_from // n_to
    return samples[::step, ::step]


def _grid(n):
    x = np.arange(n) / n
    return np.meshgrid(x, x, indexing="ij")


def _sweep_report(experiment, label, kernel_desc, density_desc, fields,
                  exact_fn=None):
    """Build a report from {n: samples}; self-reference when no exact_fn."""
    ns = sorted(fields)
    rows = []
    if exact_fn is None:
        ref_n = ns[-1]
        reference = fields[ref_n]
        for n in ns[:-1]:
            rows.append(ConvergenceRow(n, relative_error(
                fields[n], _restrict(reference, ref_n, n))))
        ref_kind = "fine-grid self"
    else:
        for n in ns:
            rows.append(ConvergenceRow(n, relative_error(
                fields[n], exact_fn(*_grid(n)))))
        ref_kind = "analytic"
    return ConvergenceReport(experiment, kernel_desc, density_desc, ref_kind,
                             _attach_noc(rows), label)


# ------------------------------------------------- densities and references

def gauss_density(sigma=0.05, center=(0.5, 0.5)):
    cx, cy = center

    def u(x1, x2):
        return np.exp(-((x1 - cx) ** 2 + (x2 - cy) ** 2) / (2 * sigma**2)) \
            / (2 * math.pi * sigma**2)
    return u


def poly_density(m: int):
    def u(x1, x2):
        return (x1 * (1 - x1) * x2 * (1 - x2)) ** m
    return u


def poly_laplacian_density(m: int):
    """Delta((x1(1-x1) x2(1-x2))^m), the non-radial test density."""
    if m < 2:
        raise ValueError("need m >= 2 for a classical Laplacian")

    def u(x1, x2):
        p = (x1 * (1 - x1)) ** m
        q = (x2 * (1 - x2)) ** m
        pm2 = (x1 * (1 - x1)) ** (m - 2)
        qm2 = (x2 * (1 - x2)) ** (m - 2)
        pdd = m * pm2 * ((m - 1) * (1 - 2 * x1) ** 2 - 2 * x1 * (1 - x1))
        qdd = m * qm2 * ((m - 1) * (1 - 2 * x2) ** 2 - 2 * x2 * (1 - x2))
        return pdd * q + p * qdd
    return u


def dipole_poly_exact(m: int):
    def v(x1, x2):
        return -m * (2 * x1 - 1) * (x1 * (1 - x1)) ** (m - 1) \
            * (x2 * (1 - x2)) ** m
    return v


def dipole_gauss_density(alpha=250.0, center=(0.5, 0.5)):
    cx, cy = center

    def u(x1, x2):
        r2 = (x1 - cx) ** 2 + (x2 - cy) ** 2
        return 4 * alpha * (alpha * r2 - 1) * np.exp(-alpha * r2)

    def v(x1, x2):
        r2 = (x1 - cx) ** 2 + (x2 - cy) ** 2
        return -2 * alpha * (x1 - cx) * np.exp(-alpha * r2)
    return u, v


POISSON_CENTERS_3 = [(0.6, 0.6), (0.5, 0.5), (0.35, 0.6)]
POISSON_CENTERS_10 = [(0.6, 0.6), (0.5, 0.5), (0.35, 0.6), (0.6, 0.8),
                      (0.8, 0.8), (0.25, 0.5), (0.75, 0.5), (0.25, 0.25),
                      (0.5, 0.25), (0.75, 0.25)]


def poisson_pair(alpha, centers):
    """Source f = -Delta u and solution u = sum of Gaussian bumps.

    The bump pair is stated in the experiments with f = +Delta u, which is
    inconsistent with the operator -Delta; the source sign here is the one
    that makes (f, u) solve -Delta u = f.
    """
    def f(x1, x2):
        out = np.zeros_like(x1)
        for cx, cy in centers:
            r2 = (x1 - cx) ** 2 + (x2 - cy) ** 2
            out += 4 * alpha * (1 - alpha * r2) * np.exp(-alpha * r2)
        return out

    def u(x1, x2):
        out = np.zeros_like(x1)
        for cx, cy in centers:
            out += np.exp(-alpha * ((x1 - cx) ** 2 + (x2 - cy) ** 2))
        return out
    return f, u


def yukawa_pair(kappa, delta=0.08, center=(0.5, 0.5)):
    cx, cy = center

    def f(x1, x2):
        r2 = (x1 - cx) ** 2 + (x2 - cy) ** 2
        return ((-4 * r2 + 4 * delta**2) / delta**4 + kappa**2) \
            * np.exp(-r2 / delta**2)

    def u(x1, x2):
        return np.exp(-((x1 - cx) ** 2 + (x2 - cy) ** 2) / delta**2)
    return f, u


def _rect_corner_antiderivative(p, q):
    """A(p,q) with d2 A / dp dq = ln(p^2 + q^2); terms vanish with p, q.

    The principal-branch arctan of the ratio is required (not arctan2);
    each term tends to zero with its prefactor.
    """
    r2 = p * p + q * q
    psafe = np.where(p != 0, p, 1.0)
    qsafe = np.where(q != 0, q, 1.0)
    term_log = np.where(r2 > 0, p * q * np.log(np.where(r2 > 0, r2, 1.0)), 0.0)
    term_p = np.where(p != 0, p * p * np.arctan(q / psafe), 0.0)
    term_q = np.where(q != 0, q * q * np.arctan(p / qsafe), 0.0)
    return term_log - 3.0 * p * q + term_p + term_q


def rect_potential(corners):
    """u(x) = int over the rectangle of -(1/2pi) ln|x-y| dy, closed form."""
    x0, y0, x1, y1 = corners

    def u(xx, yy):
        def A(px, qy):
            return _rect_corner_antiderivative(px, qy)
        val = (A(x1 - xx, y1 - yy) - A(x0 - xx, y1 - yy)
               - A(x1 - xx, y0 - yy) + A(x0 - xx, y0 - yy))
        return -val / (4 * math.pi)
    return u


# ------------------------------------------------------------- sweep engine

BARE_KERNELS = {
    "|x|^-1/2": power_kernel(-0.5, scale=2 * math.pi),
    "|x|^-1": power_kernel(-1.0, scale=2 * math.pi),
    "|x|^-3/2": power_kernel(-1.5, scale=2 * math.pi),
    "log": log_kernel(scale=-2 * math.pi),
}


def _plan_for(kernel: KernelSpec, n: int, b: int, a: float, localized: bool,
              beta: float, cache: bool, cache_dir, cap) -> ConvolutionPlan:
    if localized:
        raise ValueError("localized sweeps use split_convolve, not a plan")
    try:
        table = _analytic_table_cached(kernel, n, b, a, cache, cache_dir)
    except UnsupportedKernelError:
        table = moments.build_moment_table_numeric(
            kernel, n, b, a=a, cache=cache, cache_dir=cache_dir, cap=cap)
    return ConvolutionPlan(table)


def _analytic_table_cached(kernel, n, b, a, cache, cache_dir):
    from pathlib import Path

    from .kernels import MomentTable, table_content_key
    cdir = Path(cache_dir) if cache_dir is not None else moments.moment_cache_dir()
    if not cache or cdir is None or n < 512:
        return build_moment_table(kernel, n, b, a)
    cdir.mkdir(parents=True, exist_ok=True)
    path = cdir / f"{table_content_key(kernel, n, b, a, 'analytic')}.scmt"
    if path.exists():
        return MomentTable.load(path)
    table = build_moment_table(kernel, n, b, a)
    table.save(path)
    return table


def convolution_sweep(kernel: KernelSpec, density, ns, b=3, a=2.0,
                      localized=False, beta=0.5, cache=True, cache_dir=None,
                      cap=moments.ADAPT_CAP, reference_fields=None):
    """Fields of A_n u on G_n for each n; localized=True uses the split."""
    fields = {}
    for n in ns:
        u = GridDensity.from_function(density, n)
        if localized:
            out = windows.split_convolve(kernel, u, beta=beta, b=b, a=a,
                                         cache=cache, cache_dir=cache_dir,
                                         cap=cap)
        else:
            out = _plan_for(kernel, n, b, a, False, beta, cache,
                            cache_dir, cap).apply(u)
        fields[n] = out.on_density_grid
    if reference_fields is not None:
        fields.update(reference_fields)
    return fields


def _cap_for(n):
    # the largest |k| classes at n >= 2^9 need one doubling past the default
    return max(moments.ADAPT_CAP, 2**15 if n >= 512 else 0)


# -------------------------------------------------------------- experiments

def exp_gauss_kernels(ns=(4, 8, 16, 32, 64, 128), cache=True, cache_dir=None):
    density = gauss_density()
    reports = []
    for label, ker in BARE_KERNELS.items():
        fields = convolution_sweep(ker, density, ns, cache=cache,
                                   cache_dir=cache_dir, cap=_cap_for(max(ns)))
        reports.append(_sweep_report("table-gauss-kernels", label, label,
                                     "gaussian sigma=0.05", fields))
    return reports


def exp_kernel_sweep(ns=(4, 8, 16, 32, 64, 128, 256, 512), cache=True,
                     cache_dir=None, localized=False, beta=0.5):
    density = poly_density(3)
    exp_id = "table-localized" if localized else "table-kernel-sweep"
    reports = []
    for label, ker in BARE_KERNELS.items():
        cap = _cap_for(max(ns))
        if localized:
            # reference: non-localized scheme on the finest grid
            ref_n = max(ns)
            ref = convolution_sweep(ker, density, [ref_n], cache=cache,
                                    cache_dir=cache_dir, cap=cap)
            fields = convolution_sweep(ker, density,
                                       [n for n in ns if n != ref_n],
                                       localized=True, beta=beta, cache=cache,
                                       cache_dir=cache_dir, cap=cap,
                                       reference_fields=ref)
        else:
            fields = convolution_sweep(ker, density, ns, cache=cache,
                                       cache_dir=cache_dir, cap=cap)
        reports.append(_sweep_report(exp_id, label, label,
                                     "(x1(1-x1)x2(1-x2))^3", fields))
    return reports


def exp_smoothness_sweep(ns=(8, 16, 32, 64, 128, 256, 512, 1024), cache=True,
                         cache_dir=None, localized=False, beta=0.5):
    ker = BARE_KERNELS["|x|^-1"]
    exp_id = "table-localized-smoothness" if localized else "table-smoothness-sweep"
    reports = []
    for m in (1, 2, 3, 4):
        density = poly_density(m)
        cap = _cap_for(max(ns))
        if localized:
            ref_n = max(ns)
            ref = convolution_sweep(ker, density, [ref_n], cache=cache,
                                    cache_dir=cache_dir, cap=cap)
            fields = convolution_sweep(ker, density,
                                       [n for n in ns if n != ref_n],
                                       localized=True, beta=beta, cache=cache,
                                       cache_dir=cache_dir, cap=cap,
                                       reference_fields=ref)
        else:
            fields = convolution_sweep(ker, density, ns, cache=cache,
                                       cache_dir=cache_dir, cap=cap)
        reports.append(_sweep_report(exp_id, f"m={m}", "|x|^-1",
                                     f"(x1(1-x1)x2(1-x2))^{m}", fields))
    return reports


def exp_nonradial(ns=(8, 16, 32, 64, 128, 256), cache=True, cache_dir=None):
    ker = dipole_x1_kernel()
    reports = []
    u, v = dipole_gauss_density()
    fields = convolution_sweep(ker, u, ns)
    reports.append(_sweep_report("table-nonradial", "gaussian",
                                 "x1/(2pi|x|^2)", "gaussian derivative",
                                 fields, exact_fn=v))
    for m in (4, 5, 6):
        fields = convolution_sweep(ker, poly_laplacian_density(m), ns)
        reports.append(_sweep_report("table-nonradial", f"m={m}",
                                     "x1/(2pi|x|^2)", f"Delta(poly^{m})",
                                     fields, exact_fn=dipole_poly_exact(m)))
    return reports


def _source_sweep(exp_id, label, problem_fn, exact, ns, cache, cache_dir):
    fields = {}
    for n in ns:
        sol = solvers.solve_source(problem_fn(n), cache=cache,
                                   cache_dir=cache_dir)
        fields[n] = sol.on_density_grid.real
    return _sweep_report(exp_id, label, problem_fn(ns[0]).operator,
                         label, fields, exact_fn=exact)


def exp_poisson_3(ns=(4, 8, 16, 32, 64), cache=True, cache_dir=None):
    f, u = poisson_pair(250.0, POISSON_CENTERS_3)
    return [_source_sweep("table-poisson-3", "l=3 alpha=250",
                          lambda n: solvers.SourceProblem("poisson", f, n),
                          u, ns, cache, cache_dir)]


def exp_poisson_10(ns=(8, 16, 32, 64, 128), cache=True, cache_dir=None):
    f, u = poisson_pair(950.0, POISSON_CENTERS_10)
    return [_source_sweep("table-poisson-10", "l=10 alpha=950",
                          lambda n: solvers.SourceProblem("poisson", f, n),
                          u, ns, cache, cache_dir)]


def exp_yukawa(ns=(4, 8, 16, 32, 64), cache=True, cache_dir=None):
    reports = []
    for kappa in (1.0, 200.0):
        f, u = yukawa_pair(kappa)
        reports.append(_source_sweep(
            "table-yukawa", f"kappa={kappa:g}",
            lambda n: solvers.SourceProblem("yukawa", f, n, kappa=kappa),
            u, ns, cache, cache_dir))
    return reports


DISC_SOURCE_CORNERS = (0.3, 0.3, 0.7, 0.7)


def exp_fs_poisson(ns=(4, 8, 16, 32, 64, 128, 256), cache=True,
                   cache_dir=None):
    """Poisson with the discontinuous square source, with and without
    Fourier smoothing, against the exact rectangle potential."""
    x0, y0, x1, y1 = DISC_SOURCE_CORNERS
    exact = rect_potential(DISC_SOURCE_CORNERS)
    psi = windows.BoxWindow()
    reports = []
    for label in ("WFS", "FS"):
        fields = {}
        for n in ns:
            if label == "WFS":
                def raw(xx, yy):
                    return np.where((xx >= x0) & (xx <= x1)
                                    & (yy >= y0) & (yy <= y1), 1.0, 0.0)
                density = GridDensity.from_function(raw, n)
            else:
                chi = windows.indicator_coeffs_rect((x0, y0, x1, y1), n, 3)
                density = windows.smooth_density(
                    lambda xx, yy: np.ones_like(xx), chi, psi, n)
            plan = ConvolutionPlan(build_moment_table(log_kernel(), n, 3, 2.0))
            fields[n] = plan.apply(density).on_density_grid.real
        reports.append(_sweep_report("table-fs-poisson", label,
                                     "-(1/2pi)log", "square indicator",
                                     fields, exact_fn=exact))
    return reports


def _scatter_sweep(exp_id, label, ns, problem_fn, cfg=None, ref_problem_fn=None):
    """Self-convergent scattering sweep; the finest grid is the reference."""
    cfg = cfg or solvers.GmresConfig()
    fields = {}
    for n in ns:
        maker = problem_fn if (ref_problem_fn is None or n != max(ns)) \
            else ref_problem_fn
        sol = solvers.solve_scattering(maker(n), cfg)
        fields[n] = sol.total
    rep = _sweep_report(exp_id, label, "helmholtz", label, fields)
    return rep


def exp_ls_disc(ns=(32, 64, 128, 256, 512), ka=1.0, cache=True,
                cache_dir=None):
    t1 = 0.45
    m = solvers.contrast_library("windowed-disc", t1=t1)
    kappa = ka / (2 * t1)
    return [_scatter_sweep(
        "table-ls-disc", f"ka={ka:g}", ns,
        lambda n: solvers.ScatteringProblem(kappa=kappa, contrast=m, n=n))]


def exp_filter_disc(ns=(16, 32, 64, 128), ka=2 * math.pi, cache=True,
                    cache_dir=None):
    diameter = 0.5
    m = solvers.contrast_library("filter-disc", diameter=diameter)
    kappa = ka / diameter
    return [_scatter_sweep(
        "table-filter-disc", f"ka={ka:g}", ns,
        lambda n: solvers.ScatteringProblem(kappa=kappa, contrast=m, n=n))]


def exp_luneburg(ns=(64, 128, 256, 512, 1024), ka=2 * math.pi, cache=True,
                 cache_dir=None):
    diameter = 0.9
    m = solvers.contrast_library("luneburg", diameter=diameter)
    kappa = ka / diameter
    return [_scatter_sweep(
        "table-luneburg", f"ka={ka:g}", ns,
        lambda n: solvers.ScatteringProblem(kappa=kappa, contrast=m, n=n))]


def exp_fs_scatter(ns=(128, 256, 512, 1024), ka=40.0, radius=0.4,
                   cache=True, cache_dir=None, maxiter=3000, restart=300):
    """Constant-contrast disc, with/without Fourier smoothing; the reference
    is the smoothed solver on the finest grid.

    Restarted GMRES stagnates on this resonant problem below restart ~250,
    so deep cycles are the default; the Krylov basis then caps the finest
    desk-scale grid at n = 1024 (restart x n^2 complex entries).
    """
    kappa = ka / (2 * radius)
    center = (0.5, 0.5)
    raw = solvers.contrast_library("disc", radius=radius, center=center)
    cfg = solvers.GmresConfig(tol=1e-8, restart=restart, maxiter=maxiter)

    def smoothed(n):
        chi = windows.indicator_coeffs_disc(center, radius, n, 3)
        smoothing = solvers.Smoothing(chi, lambda xx, yy: -np.ones_like(xx))
        return solvers.ScatteringProblem(kappa=kappa, contrast=None, n=n,
                                         smoothing=smoothing)

    def unsmoothed(n):
        return solvers.ScatteringProblem(kappa=kappa, contrast=raw, n=n)

    reports = [_scatter_sweep("table-fs-scatter", "FS", ns, smoothed, cfg)]
    reports.append(_scatter_sweep("table-fs-scatter", "WFS", ns, unsmoothed,
                                  cfg, ref_problem_fn=smoothed))
    return reports


def exp_square_cavity(ns=(64, 128, 256, 512), ka=64.0, cache=True,
                      cache_dir=None, maxiter=3000, restart=300):
    outer, inner = 0.2, 0.1
    center = (0.5, 0.5)
    kappa = ka / (2 * outer * math.sqrt(2))
    raw = solvers.contrast_library("square-cavity", outer_half=outer,
                                   inner_half=inner, center=center)
    cfg = solvers.GmresConfig(tol=1e-8, restart=restart, maxiter=maxiter)

    def smoothed(n):
        co = windows.indicator_coeffs_rect(
            (center[0] - outer, center[1] - outer,
             center[0] + outer, center[1] + outer), n, 3)
        ci = windows.indicator_coeffs_rect(
            (center[0] - inner, center[1] - inner,
             center[0] + inner, center[1] + inner), n, 3)
        chi = windows.IndicatorSpectrum(n, 3, co.coeffs - ci.coeffs,
                                        "square-cavity", co.bounds)
        smoothing = solvers.Smoothing(chi, lambda xx, yy: -np.ones_like(xx))
        return solvers.ScatteringProblem(kappa=kappa, contrast=None, n=n,
                                         smoothing=smoothing)

    def unsmoothed(n):
        return solvers.ScatteringProblem(kappa=kappa, contrast=raw, n=n)

    reports = [_scatter_sweep("table-square-cavity", "FS", ns, smoothed, cfg)]
    reports.append(_scatter_sweep("table-square-cavity", "WFS", ns,
                                  unsmoothed, cfg, ref_problem_fn=smoothed))
    return reports


def exp_star_cusp(ns=(64, 128, 256, 512), ka=60.0, cache=True,
                  cache_dir=None, maxiter=3000, restart=300):
    r0, eps, q = 0.25, 0.3, 5
    center = (0.5, 0.5)
    kappa = ka / (2 * r0 * (1 + eps))
    cfg = solvers.GmresConfig(tol=1e-8, restart=restart, maxiter=maxiter)

    def smoothed(n):
        chi = windows.indicator_coeffs_polar(
            lambda th: r0 * (1 + eps * np.cos(q * th)), center, n, 3)
        smoothing = solvers.Smoothing(chi, lambda xx, yy: -np.ones_like(xx))
        return solvers.ScatteringProblem(kappa=kappa, contrast=None, n=n,
                                         smoothing=smoothing)

    return [_scatter_sweep("table-star-cusp", "FS", ns, smoothed, cfg)]


EXPERIMENTS = {
    "table-gauss-kernels": exp_gauss_kernels,
    "table-kernel-sweep": exp_kernel_sweep,
    "table-smoothness-sweep": exp_smoothness_sweep,
    "table-localized": lambda **kw: exp_kernel_sweep(localized=True, **kw),
    "table-localized-smoothness":
        lambda **kw: exp_smoothness_sweep(localized=True, **kw),
    "table-nonradial": exp_nonradial,
    "table-poisson-3": exp_poisson_3,
    "table-poisson-10": exp_poisson_10,
    "table-yukawa": exp_yukawa,
    "table-fs-poisson": exp_fs_poisson,
    "table-ls-disc": exp_ls_disc,
    "table-filter-disc": exp_filter_disc,
    "table-luneburg": exp_luneburg,
    "table-fs-scatter": exp_fs_scatter,
    "table-square-cavity": exp_square_cavity,
    "table-star-cusp": exp_star_cusp,
}


def run_convergence(experiment_id: str, **kwargs):
    if experiment_id not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {experiment_id!r}; "
                       f"known: {', '.join(sorted(EXPERIMENTS))}")
    return EXPERIMENTS[experiment_id](**kwargs)


def localized_precompute_timing(n=128, b=3, kernel=None, beta=0.5):
    """Wall time of the localized vs full numeric moment pre-computation."""
    kernel = kernel or power_kernel(-1.0, scale=2 * math.pi)
    t0 = time.perf_counter()
    moments.build_moment_table_numeric(kernel, n, b, beta=beta,
                                       localized=True,
                                       window=windows.RadialWindow(beta),
                                       cache=False)
    t_localized = time.perf_counter() - t0
    t0 = time.perf_counter()
    moments.build_moment_table_numeric(kernel, n, b, a=b - 1.0, cache=False)
    t_full = time.perf_counter() - t0
    return {"n": n, "localized_seconds": t_localized, "full_seconds": t_full}


# ---------------------------------------------------------------- benchmark

def run_bench(kernel=None, density=None, sizes=None, repeats=5, b=3, a=2.0):
    """Median apply() wall time per size plus a log-log fit against N log N."""
    kernel = kernel or log_kernel(scale=-2 * math.pi)
    density = density or gauss_density()
    sizes = list(sizes or (24 * (i + 1) for i in range(21)))
    rows = []
    for n in sizes:
        plan = ConvolutionPlan(build_moment_table(kernel, n, b, a))
        u = GridDensity.from_function(density, n)
        plan.apply(u)  # warm-up excluded from timing
        times = []
        for _ in range(max(repeats, 5)):
            t0 = time.perf_counter()
            plan.apply(u)
            times.append(time.perf_counter() - t0)
        big_n = (b * n) ** 2
        rows.append((n, big_n, float(np.median(times))))
    x = np.log([bn * math.log(bn) for _, bn, _ in rows])
    y = np.log([t for _, _, t in rows])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return BenchReport(rows, float(slope), float(math.exp(intercept)), r2)


# ----------------------------------------------------------------- emission

def _format_eps(v):
    if v == 0:
        return "0"
    exp10 = math.floor(math.log10(abs(v)))
    return f"{v / 10**exp10:.1f}e{exp10:+03d}"


def report_table(reports) -> str:
    """Aligned text table in the paper's (n, eps_n, noc) row format."""
    if isinstance(reports, ConvergenceReport):
        reports = [reports]
    ns = sorted({row.n for rep in reports for row in rep.rows})
    head = [rep.label or rep.density for rep in reports]
    lines = [f"# experiment: {reports[0].experiment}"
             f" (reference: {reports[0].reference})"]
    header = "     n " + "".join(f"| {h:>16s} " for h in head)
    sub = "       " + "".join(f"| {'eps_n':>8s} {'noc':>7s} " for _ in head)
    lines += [header, sub, "-" * len(sub)]
    by_n = {rep.label: {row.n: row for row in rep.rows} for rep in reports}
    for n in ns:
        cells = []
        for rep in reports:
            row = by_n[rep.label].get(n)
            if row is None:
                cells.append(f"| {'-':>8s} {'-':>7s} ")
            else:
                noc = f"{row.noc:7.2f}" if row.noc is not None else "      -"
                cells.append(f"| {_format_eps(row.eps):>8s} {noc} ")
        lines.append(f"{n:6d} " + "".join(cells))
    return "\n".join(lines) + "\n"


def report_csv(reports) -> str:
    if isinstance(reports, ConvergenceReport):
        reports = [reports]
    lines = ["experiment,label,kernel,density,reference,n,eps,noc"]
    for rep in reports:
        for row in rep.rows:
            noc = "" if row.noc is None else f"{row.noc:.6g}"
            lines.append(f"{rep.experiment},{rep.label},{rep.kernel},"
                         f"{rep.density},{rep.reference},{row.n},"
                         f"{row.eps:.10e},{noc}")
    return "\n".join(lines) + "\n"


def bench_table(report: BenchReport) -> str:
    lines = ["#      n          N    seconds",
             f"# fit: t = {report.prefactor:.3e} * (N log N)^{report.slope:.3f},"
             f" R^2 = {report.r2:.4f}"]
    for n, big_n, t in report.rows:
        lines.append(f"{n:8d} {big_n:10d} {t:10.6f}")
    return "\n".join(lines) + "\n"


def bench_csv(report: BenchReport) -> str:
    lines = ["n,N,seconds"]
    for n, big_n, t in report.rows:
        lines.append(f"{n},{big_n},{t:.8e}")
    return "\n".join(lines) + "\n"


def _svg_plot(series, xlabel, ylabel, logx=True, logy=True,
              width=640, height=480):
    """Minimal deterministic SVG line plot (log-log by default)."""
    margin = 60
    xs = [x for pts, _ in series for x, _ in pts]
    ys = [y for pts, _ in series for _, y in pts]
    fx = math.log10 if logx else (lambda v: v)
    fy = math.log10 if logy else (lambda v: v)
    x_lo, x_hi = min(map(fx, xs)), max(map(fx, xs))
    y_lo, y_hi = min(map(fy, ys)), max(map(fy, ys))
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(v):
        return margin + (fx(v) - x_lo) / x_span * (width - 2 * margin)

    def sy(v):
        return height - margin - (fy(v) - y_lo) / y_span * (height - 2 * margin)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{margin}" y1="{height-margin}" x2="{width-margin}" '
             f'y2="{height-margin}" stroke="black"/>',
             f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
             f'y2="{height-margin}" stroke="black"/>',
             f'<text x="{width//2}" y="{height-15}" text-anchor="middle" '
             f'font-size="14">{xlabel}</text>',
             f'<text x="18" y="{height//2}" text-anchor="middle" '
             f'font-size="14" transform="rotate(-90 18 {height//2})">'
             f'{ylabel}</text>']
    for i, (pts, label) in enumerate(series):
        color = colors[i % len(colors)]
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        parts.append(f'<polyline points="{path}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                         f'fill="{color}"/>')
        parts.append(f'<text x="{width-margin+5}" y="{margin+15*i+10}" '
                     f'font-size="12" fill="{color}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def convergence_svg(reports) -> str:
    if isinstance(reports, ConvergenceReport):
        reports = [reports]
    series = []
    for rep in reports:
        pts = [(row.n, row.eps) for row in rep.rows if row.eps > 0]
        series.append((pts, rep.label or rep.density))
    return _svg_plot(series, "n", "relative error")


def bench_svg(report: BenchReport) -> str:
    pts = [(bn * math.log(bn), t) for _, bn, t in report.rows]
    fit = [(x, report.prefactor * x**report.slope) for x, _ in pts]
    return _svg_plot([(pts, "measured"), (fit, "fit C (N log N)^s")],
                     "N log N", "seconds")


def field_pgm(field: GridField) -> bytes:
    """8-bit PGM of |field| on the extended grid."""
    mag = np.abs(field.samples)
    top = mag.max() or 1.0
    img = np.round(255 * mag / top).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    return header + img.tobytes()


def emit(obj, format: str, path) -> None:
    """Write a report or field to disk in the requested format."""
    if isinstance(obj, BenchReport):
        payload = {"table": bench_table, "csv": bench_csv,
                   "gnuplot-data": bench_csv, "svg": bench_svg}[format](obj)
    elif isinstance(obj, GridField):
        if format == "pgm":
            with open(path, "wb") as fh:
                fh.write(field_pgm(obj))
            return
        if format == "csv":
            obj.export_csv(path)
            return
        if format == "binary":
            obj.export_binary(path)
            return
        raise ValueError(f"unsupported field format {format!r}")
    else:
        payload = {"table": report_table, "csv": report_csv,
                   "gnuplot-data": report_csv,
                   "svg": convergence_svg}[format](obj)
    with open(path, "w") as fh:
        fh.write(payload)
