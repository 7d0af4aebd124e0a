"""Free-space Poisson/Yukawa solvers and the Lippmann-Schwinger solver.

The source problems are one application of the convolution scheme with the
appropriate fundamental solution.  The scattering problem solves

    u(x_j) + kappa^2 (A_n (m u))(x_j) = u_inc(x_j),   j in G_n,

with the outgoing Helmholtz kernel (i/4) H0^(1)(kappa |x|) by matrix-free
restarted GMRES: each operator application is one FFT convolution.  With
Fourier smoothing enabled, the contrast samples are replaced once, before
iterating, by m~ . chi^n . psi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import moments, windows
from .convolver import ConvolutionPlan, GridDensity, GridField
from .kernels import build_moment_table, helmholtz_kernel, log_kernel, yukawa_kernel
from .windows import BoxWindow, IndicatorSpectrum, kappa as kappa_profile

__all__ = [
    "GmresConfig",
    "GmresResult",
    "NumericFailure",
    "ScatteringProblem",
    "ScatteringSolution",
    "Smoothing",
    "SourceProblem",
    "contrast_library",
    "gmres",
    "ls_operator",
    "solve_scattering",
    "solve_source",
]


class NumericFailure(RuntimeError):
    """A solver did not reach its tolerance (GMRES cap, moment cap)."""


# ------------------------------------------------------------------- GMRES

@dataclass(frozen=True)
class GmresConfig:
    tol: float = 1e-12
    restart: int = 50
    maxiter: int = 500

    def __post_init__(self):
        if self.tol <= 0 or self.restart < 1 or self.maxiter < 1:
            raise ValueError("bad GMRES configuration")


@dataclass
class GmresResult:
    solution: np.ndarray
    residuals: list
    iterations: int
    converged: bool
    bases: list | None = None


def _givens(h1: complex, h2: complex):
    """LAPACK-style complex Givens pair (c real, s complex)."""
    if h2 == 0:
        return 1.0, 0.0 + 0.0j
    if h1 == 0:
        return 0.0, h2.conjugate() / abs(h2)
    t = math.hypot(abs(h1), abs(h2))
    c = abs(h1) / t
    s = (h1 / abs(h1)) * h2.conjugate() / t
    return c, s


def gmres(operator, rhs, cfg: GmresConfig = GmresConfig(), x0=None,
          collect_bases: bool = False) -> GmresResult:
    """Restarted GMRES with modified Gram-Schmidt on a matrix-free operator.

    operator maps arrays shaped like rhs to arrays of the same shape; the
    residual history is per inner iteration (relative to |rhs|) and is
    nonincreasing within each restart cycle.  On hitting maxiter the best
    iterate is returned with converged=False.
    """
    shape = np.shape(rhs)
    b = np.asarray(rhs, dtype=complex).ravel()
    nn = b.size

    def op(v):
        # fresh buffer: the operator may return a view of its input
        return np.array(operator(v.reshape(shape)), dtype=complex).ravel()

    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return GmresResult(np.zeros(shape, dtype=complex), [0.0], 0, True,
                           [] if collect_bases else None)
    x = (np.zeros(nn, dtype=complex) if x0 is None
         else np.asarray(x0, dtype=complex).ravel().copy())
    residuals = []
    bases = [] if collect_bases else None
    iters = 0
    m = cfg.restart
    while True:
        r = b - op(x) if (iters > 0 or x0 is not None) else b.copy()
        rnorm = np.linalg.norm(r)
        residuals.append(rnorm / bnorm)
        if rnorm / bnorm <= cfg.tol:
            return GmresResult(x.reshape(shape), residuals, iters, True, bases)
        V = np.empty((m + 1, nn), dtype=complex)
        H = np.zeros((m + 1, m), dtype=complex)
        cs = np.zeros(m)
        sn = np.zeros(m, dtype=complex)
        g = np.zeros(m + 1, dtype=complex)
        V[0] = r / rnorm
        g[0] = rnorm
        j = -1
        while j + 1 < m and iters < cfg.maxiter:
            j += 1
            iters += 1
            w = op(V[j])
            for i in range(j + 1):  # modified Gram-Schmidt
                H[i, j] = np.vdot(V[i], w)
                w -= H[i, j] * V[i]
            H[j + 1, j] = np.linalg.norm(w)
            breakdown = H[j + 1, j].real < 1e-300
            if not breakdown:
                V[j + 1] = w / H[j + 1, j]
            for i in range(j):
                hi = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = hi
            cs[j], sn[j] = _givens(complex(H[j, j]), complex(H[j + 1, j]))
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            residuals.append(abs(g[j + 1]) / bnorm)
            if abs(g[j + 1]) / bnorm <= cfg.tol or breakdown:
                break
        y = np.linalg.solve(H[: j + 1, : j + 1], g[: j + 1])
        x = x + V[: j + 1].T @ y
        if collect_bases:
            bases.append(V[: j + 2].copy())
        if residuals[-1] <= cfg.tol:
            return GmresResult(x.reshape(shape), residuals, iters, True, bases)
        if iters >= cfg.maxiter:
            return GmresResult(x.reshape(shape), residuals, iters, False, bases)


# ----------------------------------------------------------- source solver

@dataclass(frozen=True)
class SourceProblem:
    """Lv = f with L = -Laplace (poisson) or -Laplace + kappa^2 (yukawa)."""

    operator: str
    f: object
    n: int
    b: int = 3
    a: float | None = None
    kappa: float | None = None

    def __post_init__(self):
        if self.operator not in ("poisson", "yukawa"):
            raise ValueError("operator must be poisson or yukawa")
        if self.operator == "yukawa" and not (self.kappa and self.kappa > 0):
            raise ValueError("yukawa needs kappa > 0")

    def density(self) -> GridDensity:
        if isinstance(self.f, GridDensity):
            u = self.f
        elif callable(self.f):
            u = GridDensity.from_function(self.f, self.n)
        else:
            u = GridDensity(self.n, np.asarray(self.f))
        ring = np.concatenate([np.abs(u.samples[0]), np.abs(u.samples[-1]),
                               np.abs(u.samples[:, 0]), np.abs(u.samples[:, -1])])
        scale = np.max(np.abs(u.samples))
        # loose enough that coarse grids of legitimate bump sources pass
        if scale > 0 and ring.max() > 1e-3 * scale:
            raise ValueError("source not compactly supported in D "
                             f"(boundary ring reaches {ring.max():.2e})")
        return u


def source_plan(p: SourceProblem, cache: bool = True, cache_dir=None,
                cap=moments.ADAPT_CAP) -> ConvolutionPlan:
    a = p.a if p.a is not None else p.b - 1
    if p.operator == "poisson":
        table = build_moment_table(log_kernel(), p.n, p.b, a)
    else:
        table = moments.build_moment_table_numeric(
            yukawa_kernel(p.kappa), p.n, p.b, a=a,
            sub=moments.SubstitutionParams(4), cache=cache,
            cache_dir=cache_dir, cap=cap)
    return ConvolutionPlan(table)


def solve_source(p: SourceProblem, cache: bool = True, cache_dir=None,
                 cap=moments.ADAPT_CAP) -> GridField:
    """v = g * f on the extended grid, g the operator's fundamental solution."""
    try:
        plan = source_plan(p, cache=cache, cache_dir=cache_dir, cap=cap)
    except moments.NoConvergenceError as exc:
        raise NumericFailure(str(exc)) from exc
    return plan.apply(p.density())


# ------------------------------------------------------- scattering solver

@dataclass(frozen=True)
class Smoothing:
    """Fourier-smoothing data: indicator spectrum, smooth contrast extension
    m~ (callable), and the boundary window psi."""

    chi: IndicatorSpectrum
    m_extension: object
    psi: BoxWindow = BoxWindow()


@dataclass(frozen=True)
class ScatteringProblem:
    kappa: float
    contrast: object
    n: int
    b: int = 3
    a: float | None = None
    incident: object = None
    smoothing: Smoothing | None = None

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    def contrast_samples(self) -> np.ndarray:
        if self.smoothing is not None:
            return windows.smooth_density(self.smoothing.m_extension,
                                          self.smoothing.chi,
                                          self.smoothing.psi, self.n).samples
        if isinstance(self.contrast, GridDensity):
            return self.contrast.samples
        if callable(self.contrast):
            return GridDensity.from_function(self.contrast, self.n).samples
        return np.asarray(self.contrast)

    def incident_samples(self) -> np.ndarray:
        x = np.arange(self.n) / self.n
        x1, x2 = np.meshgrid(x, x, indexing="ij")
        if self.incident is None:
            return np.exp(1j * self.kappa * x1)
        return np.asarray(self.incident(x1, x2), dtype=complex)


def scattering_plan(p: ScatteringProblem) -> ConvolutionPlan:
    a = p.a if p.a is not None else p.b - 1
    table = build_moment_table(helmholtz_kernel(p.kappa), p.n, p.b, a)
    return ConvolutionPlan(table)


def ls_operator(plan: ConvolutionPlan, m_samples: np.ndarray, kappa: float):
    """v -> v + kappa^2 A_n(m v) on G_n; one FFT pair per application."""
    m_samples = np.asarray(m_samples)
    if m_samples.shape != (plan.n, plan.n):
        raise ValueError("contrast samples must be n x n")
    k2 = kappa * kappa

    def apply_op(v):
        if np.shape(v) != (plan.n, plan.n):
            raise ValueError("field samples must be n x n")
        conv = plan.apply(GridDensity(plan.n, m_samples * v))
        return v + k2 * conv.on_density_grid

    return apply_op


@dataclass
class ScatteringSolution:
    total: np.ndarray          # u on G_n
    scattered: GridField       # u_sc on the extended grid
    iterations: int
    residuals: list
    problem: ScatteringProblem


def solve_scattering(p: ScatteringProblem,
                     cfg: GmresConfig = GmresConfig()) -> ScatteringSolution:
    plan = scattering_plan(p)
    m = p.contrast_samples()
    u_inc = p.incident_samples()
    op = ls_operator(plan, m, p.kappa)
    result = gmres(op, u_inc, cfg)
    if not result.converged:
        raise NumericFailure(
            f"GMRES did not reach tol={cfg.tol} in {cfg.maxiter} iterations "
            f"(last residual {result.residuals[-1]:.2e})")
    u = result.solution
    scattered_ext = plan.apply(GridDensity(p.n, m * u))
    scattered = GridField(p.n, p.b, -p.kappa**2 * scattered_ext.samples)
    return ScatteringSolution(u, scattered, result.iterations,
                              result.residuals, p)


# --------------------------------------------------------- contrast library

def contrast_library(name: str, **params):
    """Named contrast functions m(x) = 1 - mu(x) used by the experiments.

    windowed-disc: mu = 2 plateau blended to 1 across [t0, t1]
    filter-disc:   m = -exp(-(1/2) (2 r / a)^8)
    luneburg:      m = (2 r / a)^2 - 1 inside the lens, 0 outside
    disc, square:  constant contrast m0 on the shape
    star:          constant m0 inside r(theta) = r0 (1 + eps cos(q theta))
    square-cavity: constant m0 between two nested squares
    """
    center = params.pop("center", (0.5, 0.5))
    cx, cy = center

    def r_of(x1, x2):
        return np.hypot(x1 - cx, x2 - cy)

    if name == "windowed-disc":
        t1 = params.pop("t1", 0.45)
        t0 = params.pop("t0", 0.9 * t1)
        _reject_extra(params)

        def m(x1, x2):
            r = r_of(x1, x2)
            return -kappa_profile((r - t0) / (t1 - t0))
        return m
    if name == "filter-disc":
        a = params.pop("diameter", 0.5)
        _reject_extra(params)

        def m(x1, x2):
            return -np.exp(-0.5 * (2 * r_of(x1, x2) / a) ** 8)
        return m
    if name == "luneburg":
        a = params.pop("diameter", 0.9)
        _reject_extra(params)

        def m(x1, x2):
            r = r_of(x1, x2)
            return np.where(r <= a / 2, (2 * r / a) ** 2 - 1.0, 0.0)
        return m
    if name == "disc":
        radius = params.pop("radius", 0.25)
        m0 = params.pop("m0", -1.0)
        _reject_extra(params)

        def m(x1, x2):
            return np.where(r_of(x1, x2) <= radius, m0, 0.0)
        return m
    if name == "square":
        half = params.pop("half_side", 0.2)
        m0 = params.pop("m0", -1.0)
        _reject_extra(params)

        def m(x1, x2):
            inside = (np.abs(x1 - cx) <= half) & (np.abs(x2 - cy) <= half)
            return np.where(inside, m0, 0.0)
        return m
    if name == "square-cavity":
        outer = params.pop("outer_half", 0.2)
        inner = params.pop("inner_half", 0.1)
        m0 = params.pop("m0", -1.0)
        _reject_extra(params)

        def m(x1, x2):
            d = np.maximum(np.abs(x1 - cx), np.abs(x2 - cy))
            return np.where((d <= outer) & (d > inner), m0, 0.0)
        return m
    if name == "star":
        r0 = params.pop("r0", 0.25)
        eps = params.pop("eps", 0.3)
        q = params.pop("q", 5)
        m0 = params.pop("m0", -1.0)
        _reject_extra(params)

        def m(x1, x2):
            r = r_of(x1, x2)
            theta = np.arctan2(x2 - cy, x1 - cx)
            return np.where(r <= r0 * (1 + eps * np.cos(q * theta)), m0, 0.0)
        return m
    raise ValueError(f"unknown contrast {name!r}")


def _reject_extra(params):
    if params:
        raise ValueError(f"unknown contrast parameters {sorted(params)}")
