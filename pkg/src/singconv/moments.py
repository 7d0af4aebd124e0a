"""Numeric pre-computation of kernel moments when no closed form exists.

The radial moment 2 pi int_0^a g(rho) J0(2 pi |k| rho / b) rho drho is
regularized by the substitution rho = tau^p (integer p large enough that the
integrand is at least C^7 at zero) and integrated with the interior-node
cosine-spaced quadrature of cc_rule.  Localized moments carry the extra
window factor eta_beta and use the trapezoidal rule instead, since their
integrand vanishes to high order at both endpoints.

All moment values are converged by doubling the point count until two
successive levels agree to 1e-13 (relative past unit magnitude), starting at
64 points and capped at 2^14; the finer value is returned.  Tables are
assembled one value per distinct |k| class (exact integer-norm dedup) and
cached on disk keyed by a content hash of their header.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import specfun
from .convolver import centered_freqs
from .kernels import (KernelSpec, MomentTable, distinct_norms,
                      radial_table_from_classes, table_content_key,
                      validate_geometry)

__all__ = [
    "NoConvergenceError",
    "QuadratureRule",
    "SubstitutionParams",
    "build_moment_table_numeric",
    "cc_rule",
    "default_substitution",
    "localized_moment_numeric",
    "moment_cache_dir",
    "nonradial_moment_numeric",
    "radial_moment_numeric",
]

ADAPT_TOL = 1e-13
ADAPT_START = 64
ADAPT_CAP = 2**14


class NoConvergenceError(RuntimeError):
    """Adaptive doubling hit the point cap before two levels agreed."""

    def __init__(self, message, kmag=None):
        super().__init__(message)
        self.kmag = kmag


@dataclass(frozen=True)
class QuadratureRule:
    """Interior cosine-spaced nodes on (0, alpha) with positive-sum weights."""

    nodes: np.ndarray
    weights: np.ndarray
    alpha: float
    n_pc: int


_unit_weight_cache: dict[int, np.ndarray] = {}


def _unit_cc_weights(n_pc: int) -> np.ndarray:
    w = _unit_weight_cache.get(n_pc)
    if w is not None:
        return w
    j = np.arange(1, n_pc + 1)[:, None] - 0.5
    k = np.arange(0, n_pc + 1, 2)[None, :]
    theta = -2.0 / (k * k - 1.0)
    theta[0, 0] = 1.0  # k = 0 term of the primed sum (halved)
    w = np.zeros(n_pc)
    step = max(1, 8_000_000 // (n_pc // 2 + 1))
    for lo in range(0, n_pc, step):
        hi = min(lo + step, n_pc)
        w[lo:hi] = (np.cos(j[lo:hi] * k * (math.pi / n_pc)) * theta).sum(axis=1)
    w /= n_pc
    _unit_weight_cache[n_pc] = w
    return w


def cc_rule(alpha: float, n_pc: int) -> QuadratureRule:
    """The quadrature rule of the moment pre-computation, exact to degree n_pc - 1."""
    if alpha <= 0 or n_pc < 1:
        raise ValueError("need alpha > 0 and n_pc >= 1")
    j = np.arange(1, n_pc + 1)
    nodes = alpha / 2 * (1 + np.cos((j - 0.5) * math.pi / n_pc))
    return QuadratureRule(nodes, alpha * _unit_cc_weights(n_pc), alpha, n_pc)


@dataclass(frozen=True)
class SubstitutionParams:
    """rho = tau^p regularization; n_pc 'adaptive' or a fixed point count."""

    p: int
    n_pc: int | str = "adaptive"

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("substitution power p must be >= 2")


def default_substitution(kernel_or_gamma,
                         trapezoid: bool = False) -> SubstitutionParams:
    """Substitution power for a kernel's singularity.

    The cosine-clustered rule only needs the substituted integrand smooth,
    so for pure power-law kernels the first p in 4..12 with p (2 + gamma)
    an integer >= 2 is preferred: the integrand is then a plain monomial
    times J0 (entire), and the rule converges spectrally with far fewer
    points than larger p would need to resolve the stretched oscillations.

    The localized trapezoid path (trapezoid=True) instead requires the
    integrand to vanish to high order at tau = 0, so it keeps the C^7 rule:
    smallest p with p (2 + gamma_sing) >= 9, at least 4.
    """
    gamma = None
    if isinstance(kernel_or_gamma, KernelSpec):
        gamma_sing = kernel_or_gamma.gamma_sing
        if kernel_or_gamma.kind == "power":
            gamma = kernel_or_gamma.gamma
    else:
        gamma_sing = float(kernel_or_gamma)
    if gamma is not None:
        # integer exponent: tau^(p(2+gamma)-1) is a monomial, so the cosine
        # rule needs any exponent >= 1 while the trapezoid wants >= 4 for
        # its O(h^6) Euler-Maclaurin tail
        floor = 5.0 if trapezoid else 2.0
        for p in range(4, 25):
            prod = p * (2.0 + gamma)
            if prod >= floor - 1e-12 and abs(prod - round(prod)) < 1e-9:
                return SubstitutionParams(p)
    return SubstitutionParams(max(4, math.ceil(9.0 / (2.0 + gamma_sing))))


def moment_cache_dir() -> Path | None:
    env = os.environ.get("SINGCONV_CACHE_DIR")
    if env == "":
        return None
    if env:
        return Path(env)
    return Path.home() / ".cache" / "singconv"


# --------------------------------------------------------------- integrands

def _radial_density(kernel_or_fn, p: int, tau: np.ndarray) -> np.ndarray:
    """g(tau^p) tau^(2p-1), in a form that cannot overflow for builtin kinds."""
    if isinstance(kernel_or_fn, KernelSpec):
        ker = kernel_or_fn
        if ker.kind == "power":
            return tau ** (p * (2 + ker.gamma) - 1) / (2 * math.pi)
        if ker.kind == "log":
            return -(p * np.log(tau)) / (2 * math.pi) * tau ** (2 * p - 1)
        return ker.radial_values(tau**p) * tau ** (2 * p - 1)
    return kernel_or_fn(tau**p) * tau ** (2 * p - 1)


def _ladder(eval_level, count: int, tol: float, cap: int, kmags=None,
            is_complex=False):
    """Double the level until successive values agree; return the finer ones."""
    values = np.zeros(count, dtype=complex if is_complex else float)
    pending = np.arange(count)
    level = ADAPT_START
    prev = eval_level(pending, level)
    while True:
        level *= 2
        if level > cap:
            bad = kmags[pending[0]] if kmags is not None else pending[0]
            raise NoConvergenceError(
                f"moment quadrature did not converge below {cap} points "
                f"(first offending |k| = {bad})", kmag=bad)
        cur = eval_level(pending, level)
        ok = np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))
        values[pending[ok]] = cur[ok]
        pending = pending[~ok]
        prev = cur[~ok]
        if pending.size == 0:
            return values


def _node_sum_factory(kernel_or_fn, kmags, p, b, window):
    """Raw integrand sums over given tau nodes, one value per class."""
    w_ang = 2 * math.pi / b  # J0 argument scale per unit |k| rho

    def node_sums(idx, tau, wts=None):
        base = _radial_density(kernel_or_fn, p, tau)
        if window is not None:
            base = base * window(tau**p)
        if wts is not None:
            base = base * wts
        base = base * (2 * math.pi * p)
        rho = tau**p
        out = np.empty(idx.size, dtype=complex if np.iscomplexobj(base) else float)
        chunk = max(1, 6_000_000 // max(1, tau.size))
        for lo in range(0, idx.size, chunk):
            sel = idx[lo:lo + chunk]
            args = np.outer(kmags[sel] * w_ang, rho)
            out[lo:lo + chunk] = specfun.bessel_j(0, args) @ base
        return out

    return node_sums


def _radial_eval_factory(kernel_or_fn, kmags, a, b, p, window=None):
    """Cosine-rule batch evaluator: values for kmags[idx] at a point count."""
    alpha = a ** (1.0 / p)
    node_sums = _node_sum_factory(kernel_or_fn, kmags, p, b, window)

    def eval_level(idx, n_pc):
        rule = cc_rule(alpha, n_pc)
        return node_sums(idx, rule.nodes, rule.weights)

    return eval_level


def _trapezoid_ladder(kernel_or_fn, kmags, radius, b, p, window, tol, cap,
                      is_complex):
    """Adaptive nested trapezoid for localized moments.

    Doubling the point count only evaluates the new midpoints; the running
    interior sums are carried per pending class.
    """
    alpha = radius ** (1.0 / p)
    node_sums = _node_sum_factory(kernel_or_fn, kmags, p, b, window)
    dtype = complex if is_complex else float
    count = kmags.size
    values = np.zeros(count, dtype=dtype)
    pending = np.arange(count)
    level = ADAPT_START
    h = alpha / level
    interior = node_sums(pending, np.arange(1, level) * h)
    endpoint = node_sums(pending, np.array([alpha]))
    prev = h * (interior + endpoint / 2)
    while True:
        level *= 2
        if level > cap:
            raise NoConvergenceError(
                f"moment quadrature did not converge below {cap} points "
                f"(first offending |k| = {kmags[pending[0]]})",
                kmag=kmags[pending[0]])
        h = alpha / level
        interior = interior + node_sums(pending, np.arange(1, level, 2) * h)
        cur = h * (interior + endpoint / 2)
        ok = np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))
        values[pending[ok]] = cur[ok]
        keep = ~ok
        pending = pending[keep]
        interior = interior[keep]
        endpoint = endpoint[keep]
        prev = cur[keep]
        if pending.size == 0:
            return values


def radial_moment_numeric(g, kmag: float, a: float, b: int,
                          sub: SubstitutionParams | None = None,
                          window=None, beta: float | None = None,
                          tol: float = ADAPT_TOL, cap: int = ADAPT_CAP):
    """ghat(|k|) of a radial kernel by regularized adaptive quadrature.

    g is a KernelSpec (scale ignored here) or a bare radial callable, in
    which case sub must fix the substitution power.  With a window the
    integral runs over B_beta with the nested-trapezoid flavor.
    """
    if sub is None:
        if not isinstance(g, KernelSpec):
            raise ValueError("sub is required for bare callables")
        sub = default_substitution(g, trapezoid=window is not None)
    radius = a if beta is None else beta
    kmag_arr = np.array([float(kmag)])
    is_complex = isinstance(g, KernelSpec) and g.is_complex
    if sub.n_pc != "adaptive":
        n_pc = int(sub.n_pc)
        node_sums = _node_sum_factory(g, kmag_arr, sub.p, b, window)
        alpha = radius ** (1.0 / sub.p)
        if window is not None:
            h = alpha / n_pc
            interior = node_sums(np.array([0]), np.arange(1, n_pc) * h)
            endpoint = node_sums(np.array([0]), np.array([alpha]))
            return (h * (interior + endpoint / 2))[0]
        rule = cc_rule(alpha, n_pc)
        return node_sums(np.array([0]), rule.nodes, rule.weights)[0]
    if window is not None:
        return _trapezoid_ladder(g, kmag_arr, radius, b, sub.p, window, tol,
                                 cap, is_complex)[0]
    eval_level = _radial_eval_factory(g, kmag_arr, radius, b, sub.p)
    return _ladder(eval_level, 1, tol, cap, kmags=kmag_arr,
                   is_complex=is_complex)[0]


def localized_moment_numeric(g, window, kmag: float, beta: float, b: int,
                             sub: SubstitutionParams | None = None,
                             tol: float = ADAPT_TOL, cap: int = ADAPT_CAP):
    """ghat_eta(|k|): moment of g . eta_beta over B_beta, trapezoid flavor."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return radial_moment_numeric(g, kmag, beta, b, sub=sub, window=window,
                                 beta=beta, tol=tol, cap=cap)


def nonradial_moment_numeric(g, k, a: float, b: int,
                             sub: SubstitutionParams,
                             n_theta: int = 64, tol: float = 1e-12,
                             cap: int = ADAPT_CAP) -> complex:
    """2-D moment of a non-radial kernel: spectral trapezoid in angle times
    the substituted radial rule, doubled jointly until two levels agree."""
    validate_geometry(a, b)
    p = sub.p
    alpha = a ** (1.0 / p)
    k1, k2 = k

    def level_value(n_th, n_pc):
        theta = np.arange(n_th) * (2 * math.pi / n_th)
        rule = cc_rule(alpha, n_pc)
        tau, wts = rule.nodes, rule.weights
        rho = tau**p
        x1 = np.outer(np.cos(theta), rho)
        x2 = np.outer(np.sin(theta), rho)
        gv = g(x1, x2) if not isinstance(g, KernelSpec) else g.values(x1, x2)
        phase = np.exp(-2j * math.pi * (k1 * x1 + k2 * x2) / b)
        radial_part = (gv * phase) @ (wts * p * tau ** (2 * p - 1))
        return (2 * math.pi / n_th) * radial_part.sum()

    n_th, n_pc = n_theta, ADAPT_START
    prev = level_value(n_th, n_pc)
    while True:
        n_th *= 2
        n_pc *= 2
        if n_pc > cap or n_th > cap:
            raise NoConvergenceError(
                f"non-radial moment did not converge for k={k}", kmag=k)
        cur = level_value(n_th, n_pc)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return complex(cur)
        prev = cur


# ------------------------------------------------------------- table builds

def _radial_class_values(kernel, kmags, radius, b, p, window, trapezoid,
                         tol, cap):
    """One moment per distinct |k|, threaded over interleaved class slices.

    numpy ufuncs release the GIL, so a small thread pool keeps both cores
    busy; interleaving balances the oscillation-heavy large-|k| classes.
    """
    def run_slice(part):
        if trapezoid:
            return _trapezoid_ladder(kernel, part, radius, b, p, window,
                                     tol, cap, kernel.is_complex)
        ev = _radial_eval_factory(kernel, part, radius, b, p, window=window)
        return _ladder(ev, part.size, tol, cap, kmags=part,
                       is_complex=kernel.is_complex)

    nw = min(4, os.cpu_count() or 1)
    if kmags.size < 4096 or nw == 1:
        return run_slice(kmags)
    from concurrent.futures import ThreadPoolExecutor
    out = np.empty(kmags.size, dtype=complex if kernel.is_complex else float)
    with ThreadPoolExecutor(nw) as ex:
        parts = [kmags[i::nw] for i in range(nw)]
        for i, res in enumerate(ex.map(run_slice, parts)):
            out[i::nw] = res
    return out


def build_moment_table_numeric(kernel: KernelSpec, n: int, b: int,
                               a: float | None = None,
                               beta: float | None = None,
                               localized: bool = False,
                               window=None,
                               sub: SubstitutionParams | None = None,
                               cache: bool = True,
                               cache_dir=None,
                               tol: float = ADAPT_TOL,
                               cap: int = ADAPT_CAP) -> MomentTable:
    """Numeric moment table over F_n, one quadrature per distinct |k|.

    The localized variant integrates g . eta_beta over B_beta (window
    required) and records beta in the table's radius slot.
    """
    if localized:
        if beta is None or window is None:
            raise ValueError("localized tables need beta and a window")
        if not (0 < beta <= b - 1):
            raise ValueError("beta must lie in (0, b-1]")
        radius, provenance = float(beta), "numeric-localized"
    else:
        radius = float(b - 1 if a is None else a)
        validate_geometry(radius, b)
        provenance = "numeric"
    if sub is None:
        sub = default_substitution(kernel, trapezoid=localized)

    cache_path = None
    if cache:
        cdir = Path(cache_dir) if cache_dir is not None else moment_cache_dir()
        if cdir is not None and (kernel.kind not in ("custom-radial", "custom")
                                 or kernel.tag):
            cdir.mkdir(parents=True, exist_ok=True)
            key = table_content_key(kernel, n, b, radius, provenance)
            cache_path = cdir / f"{key}.scmt"
            if cache_path.exists():
                return MomentTable.load(cache_path)

    if kernel.is_radial:
        kmags, inverse = distinct_norms(n, b)
        class_values = _radial_class_values(
            kernel, kmags, radius, b, sub.p,
            window=window if localized else None, trapezoid=localized,
            tol=tol, cap=cap)
        table = radial_table_from_classes(kernel, n, b, radius,
                                          kernel.scale * class_values,
                                          inverse, provenance)
    else:
        if localized:
            raise ValueError("localized tables are defined for radial kernels")
        f = centered_freqs(n * b)
        m = n * b
        values = np.empty((m, m), dtype=complex)
        for i, k1 in enumerate(f):
            for j, k2 in enumerate(f):
                values[i, j] = nonradial_moment_numeric(
                    kernel, (int(k1), int(k2)), radius, b, sub, cap=cap)
        table = MomentTable(kernel, n, b, radius, kernel.scale * values,
                            provenance)

    if cache_path is not None:
        table.save(cache_path)
        return MomentTable.load(cache_path)
    return table
