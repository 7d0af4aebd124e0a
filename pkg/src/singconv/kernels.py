"""Kernel registry and closed-form moment formulas.

Each kernel kind has a fixed base normalization, chosen so the closed-form
moments are exactly the textbook expressions; KernelSpec.scale applies any
remaining constant prefactor:

    log        g(x) = -(1/2pi) ln|x|          (Laplace fundamental solution)
    power      g(x) = (1/2pi) |x|^gamma        gamma > -2
    helmholtz  g(x) = (i/4) H0^(1)(kappa|x|)
    yukawa     g(x) = (1/2pi) K0(kappa|x|)
    dipole-x1  g(x) = x1 / (2pi |x|^2)
    custom-radial / custom: user callables with declared singularity exponent

The moment of a kernel is ghat(k) = int_{B_a(0)} g(y) exp(-2 pi i k.y/b) dy.
Closed forms exist for log, helmholtz, power(-1) and dipole-x1 (plus the
k = 0 moment of any power law); everything else goes through the numeric
path in the moments module.
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import specfun
from .convolver import centered_freqs

__all__ = [
    "KernelSpec",
    "MomentTable",
    "UnsupportedKernelError",
    "build_moment_table",
    "custom_kernel",
    "custom_radial_kernel",
    "dipole_x1_kernel",
    "helmholtz_kernel",
    "log_kernel",
    "moment_dipole_x1",
    "moment_helmholtz",
    "moment_inverse_r",
    "moment_log",
    "moment_powerlaw_k0",
    "power_kernel",
    "yukawa_kernel",
]

# relative distance at which the resonant Helmholtz branch takes over;
# the generic branch cancels catastrophically closer to kappa = 2 pi |k|/b
RESONANCE_RTOL = 1e-8

_KIND_TAGS = {"log": 1, "power": 2, "helmholtz": 3, "yukawa": 4,
              "dipole-x1": 5, "custom-radial": 6, "custom": 7}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}
_PROVENANCE_TAGS = {"analytic": 0, "numeric": 1, "numeric-localized": 2}
_TAG_PROVENANCE = {v: k for k, v in _PROVENANCE_TAGS.items()}


class UnsupportedKernelError(ValueError):
    """No analytic moment formula; use the numeric pre-computation path."""


@dataclass(frozen=True)
class KernelSpec:
    """Identity of a weakly singular kernel plus singularity metadata.

    gamma_sing records the worst-case |x|^gamma_sing growth near 0 (0.0 for
    log-type singularities), which fixes the quadrature substitution power.
    """

    kind: str
    gamma: float | None = None
    kappa: float | None = None
    scale: float = 1.0
    gamma_sing: float = 0.0
    radial_fn: object = None
    nonradial_fn: object = None
    tag: str = ""

    def __post_init__(self):
        if self.kind not in _KIND_TAGS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "power" and not (self.gamma is not None and self.gamma > -2):
            raise ValueError("power-law exponent must satisfy gamma > -2")
        if self.kind in ("helmholtz", "yukawa") and not (
                self.kappa is not None and self.kappa > 0):
            raise ValueError("kappa must be positive")
        if self.gamma_sing <= -2:
            raise ValueError("gamma_sing <= -2 is not weakly singular")

    @property
    def is_radial(self) -> bool:
        return self.kind not in ("dipole-x1", "custom")

    @property
    def is_complex(self) -> bool:
        return self.kind == "helmholtz"

    def radial_values(self, rho: np.ndarray) -> np.ndarray:
        """g(rho) for radial kinds, without the scale factor."""
        if self.kind == "log":
            return -np.log(rho) / (2 * math.pi)
        if self.kind == "power":
            return rho**self.gamma / (2 * math.pi)
        if self.kind == "helmholtz":
            return 0.25j * specfun.hankel1(0, self.kappa * rho)
        if self.kind == "yukawa":
            return specfun.bessel_k0(self.kappa * rho) / (2 * math.pi)
        if self.kind == "custom-radial":
            return self.radial_fn(rho)
        raise ValueError(f"kernel kind {self.kind!r} is not radial")

    def values(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """g(x) for any kind, without the scale factor."""
        if self.kind == "dipole-x1":
            return x1 / (2 * math.pi * (x1**2 + x2**2))
        if self.kind == "custom":
            return self.nonradial_fn(x1, x2)
        return self.radial_values(np.hypot(x1, x2))

    def cache_tag(self) -> str:
        if self.kind in ("custom-radial", "custom") and not self.tag:
            raise ValueError("custom kernels need a tag to be cacheable")
        return self.tag


def log_kernel(scale: float = 1.0) -> KernelSpec:
    return KernelSpec("log", scale=scale, gamma_sing=0.0)


def power_kernel(gamma: float, scale: float = 1.0) -> KernelSpec:
    return KernelSpec("power", gamma=gamma, scale=scale, gamma_sing=gamma)


def helmholtz_kernel(kappa: float, scale: float = 1.0) -> KernelSpec:
    return KernelSpec("helmholtz", kappa=kappa, scale=scale, gamma_sing=0.0)


def yukawa_kernel(kappa: float, scale: float = 1.0) -> KernelSpec:
    return KernelSpec("yukawa", kappa=kappa, scale=scale, gamma_sing=0.0)


def dipole_x1_kernel(scale: float = 1.0) -> KernelSpec:
    return KernelSpec("dipole-x1", scale=scale, gamma_sing=-1.0)


def custom_radial_kernel(fn, gamma_sing: float, scale: float = 1.0,
                         tag: str = "") -> KernelSpec:
    return KernelSpec("custom-radial", scale=scale, gamma_sing=gamma_sing,
                      radial_fn=fn, tag=tag)


def custom_kernel(fn, gamma_sing: float, scale: float = 1.0,
                  tag: str = "") -> KernelSpec:
    return KernelSpec("custom", scale=scale, gamma_sing=gamma_sing,
                      nonradial_fn=fn, tag=tag)


def validate_geometry(a: float, b: int) -> None:
    if b < 3 or int(b) != b:
        raise ValueError("b must be an integer >= 3")
    if not (math.sqrt(2) <= a <= b - 1):
        raise ValueError("cut radius must satisfy sqrt(2) <= a <= b-1")


# ------------------------------------------------------------ closed forms
# All vectorized over |k| (or the full index grid for the dipole kernel).

def _log_moments(kmag, a, b):
    kmag = np.asarray(kmag, dtype=float)
    w = 2 * math.pi * kmag / b
    wa = np.where(kmag > 0, w * a, 1.0)
    wsafe = np.where(kmag > 0, w, 1.0)
    general = (-a * math.log(a) * specfun.bessel_j(1, wa) / wsafe
               + (1.0 - specfun.bessel_j(0, wa)) / wsafe**2)
    return np.where(kmag == 0, (a * a / 4) * (1 - 2 * math.log(a)), general)


def _helmholtz_moments(kmag, a, b, kappa):
    kmag = np.asarray(kmag, dtype=float)
    w = 2 * math.pi * kmag / b
    wa = w * a
    ka = kappa * a
    h0, h1 = specfun.hankel1(0, ka), specfun.hankel1(1, ka)
    j0ka, j1ka = specfun.bessel_j(0, ka), specfun.bessel_j(1, ka)
    # generic branch, guarded against the removable singularities
    near_res = np.abs(w - kappa) < RESONANCE_RTOL * kappa
    denom = np.where(near_res, 1.0, w**2 - kappa**2)
    generic = (0.5j * math.pi) * (
        wa * specfun.bessel_j(1, wa) * h0
        - ka * specfun.bessel_j(0, wa) * h1 - 2j / math.pi) / denom
    # resonant branch kappa = 2 pi |k|/b
    resonant = 0.25j * math.pi * a * a * (j0ka * h0 + j1ka * h1)
    # |k| = 0: the paper's printed +2/(kappa pi) fails the defining integral;
    # the sign consistent with the w -> 0 limit of the generic branch is used
    zero = (math.pi / (2 * kappa)) * (
        1j * a * j1ka - a * specfun.bessel_y(1, ka) - 2 / (kappa * math.pi))
    out = np.where(near_res, resonant, generic)
    return np.where(kmag == 0, zero, out)


def _inverse_r_moments(kmag, a, b):
    kmag = np.asarray(kmag, dtype=float)
    wa = np.where(kmag > 0, 2 * math.pi * kmag / b * a, 1.0)
    j0, j1 = specfun.bessel_j(0, wa), specfun.bessel_j(1, wa)
    h0, h1 = specfun.struve_h(0, wa), specfun.struve_h(1, wa)
    general = a * (j0 + 0.5 * math.pi * (j1 * h0 - j0 * h1))
    return np.where(kmag == 0, a, general)


def _dipole_moments(k1, k2, a, b):
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    kmag = np.hypot(k1, k2)
    safe = np.where(kmag > 0, kmag, 1.0)
    wa = 2 * math.pi * safe / b * a
    vals = -1j * (k1 / safe) * (b / (2 * math.pi * safe)) * (1 - specfun.bessel_j(0, wa))
    return np.where(kmag == 0, 0.0, vals)


def moment_log(k, a: float, b: int) -> float:
    """Moment of -(1/2pi) ln|x| over B_a, exactly the printed closed form."""
    validate_geometry(a, b)
    return float(_log_moments(math.hypot(*k), a, b))


def moment_helmholtz(k, a: float, b: int, kappa: float) -> complex:
    """Moment of (i/4) H0^(1)(kappa|x|); resonant branch within 1e-8 of w."""
    validate_geometry(a, b)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return complex(_helmholtz_moments(math.hypot(*k), a, b, kappa))


def moment_inverse_r(k, a: float, b: int) -> float:
    """Moment of 1/(2 pi |x|), the J/Struve combination."""
    validate_geometry(a, b)
    return float(_inverse_r_moments(math.hypot(*k), a, b))


def moment_powerlaw_k0(gamma: float, a: float) -> float:
    """The k = 0 moment of (1/2pi)|x|^gamma: a^(2+gamma)/(2+gamma)."""
    if gamma <= -2:
        raise ValueError("gamma must exceed -2")
    return a ** (2 + gamma) / (2 + gamma)


def moment_dipole_x1(k, a: float, b: int) -> complex:
    """Moment of x1/(2 pi |x|^2): -i (k1/|k|) (b/(2 pi |k|)) (1 - J0(2 pi |k| a/b))."""
    validate_geometry(a, b)
    return complex(_dipole_moments(k[0], k[1], a, b))


# ------------------------------------------------------------ moment table

def pack_table_header(kernel: KernelSpec, n: int, b: int, a: float,
                      provenance: str) -> bytes:
    params = [x if x is not None else math.nan
              for x in (kernel.gamma, kernel.kappa, kernel.scale,
                        kernel.gamma_sing)]
    tag = (kernel.cache_tag().encode()
           if kernel.kind in ("custom-radial", "custom") else b"")
    head = struct.pack("<4sII", b"SCMT", 1, _KIND_TAGS[kernel.kind])
    head += struct.pack("<I", len(params)) + struct.pack(f"<{len(params)}d", *params)
    head += struct.pack("<H", len(tag)) + tag
    head += struct.pack("<IIdB", b, n, a, _PROVENANCE_TAGS[provenance])
    return head


def table_content_key(kernel: KernelSpec, n: int, b: int, a: float,
                      provenance: str) -> str:
    return hashlib.sha256(pack_table_header(kernel, n, b, a, provenance)).hexdigest()


@dataclass(frozen=True)
class MomentTable:
    """ghat(k) for every k in F_n, in ascending-k (centered) layout.

    For localized tables the radius field holds beta instead of the cut
    radius a, and provenance is "numeric-localized".
    """

    kernel: KernelSpec
    n: int
    b: int
    a: float
    values: np.ndarray
    provenance: str

    @property
    def m(self) -> int:
        return self.n * self.b

    def value_at(self, k1: int, k2: int) -> complex:
        f = centered_freqs(self.m)
        return complex(self.values[int(k1) - f[0], int(k2) - f[0]])

    # -- binary cache format -------------------------------------------------
    def _header_bytes(self) -> bytes:
        return pack_table_header(self.kernel, self.n, self.b, self.a,
                                 self.provenance)

    def content_key(self) -> str:
        return table_content_key(self.kernel, self.n, self.b, self.a,
                                 self.provenance)

    def save(self, path) -> None:
        tmp = f"{path}.tmp.{os.getpid()}"
        with open(tmp, "wb") as fh:
            fh.write(self._header_bytes())
            fh.write(np.ascontiguousarray(self.values, dtype="<c16").tobytes())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "MomentTable":
        with open(path, "rb") as fh:
            magic, version, kind_tag = struct.unpack("<4sII", fh.read(12))
            if magic != b"SCMT" or version != 1:
                raise ValueError("not a moment table file")
            (nparams,) = struct.unpack("<I", fh.read(4))
            params = struct.unpack(f"<{nparams}d", fh.read(8 * nparams))
            (taglen,) = struct.unpack("<H", fh.read(2))
            tag = fh.read(taglen).decode()
            b, n, a, prov = struct.unpack("<IIdB", fh.read(17))
            m = n * b
            values = np.frombuffer(fh.read(), dtype="<c16").reshape(m, m)
        gamma, kappa, scale, gamma_sing = params
        kind = _TAG_KINDS[kind_tag]
        kernel = KernelSpec(
            kind,
            gamma=None if math.isnan(gamma) else gamma,
            kappa=None if math.isnan(kappa) else kappa,
            scale=scale,
            gamma_sing=gamma_sing if not math.isnan(gamma_sing) else 0.0,
            tag=tag)
        return cls(kernel, int(n), int(b), float(a), values,
                   _TAG_PROVENANCE[prov])


def radial_table_from_classes(kernel, n, b, a, class_values, inverse,
                              provenance) -> MomentTable:
    """Assemble an (nb)^2 table from one value per distinct |k| class."""
    m = n * b
    values = np.asarray(class_values)[inverse].reshape(m, m)
    return MomentTable(kernel, n, b, float(a), values.astype(complex), provenance)


def distinct_norms(n: int, b: int):
    """Distinct |k| over F_n via exact integer norm^2 comparison.

    Returns (kmag, inverse) with kmag the sorted distinct magnitudes and
    inverse the flat index map back onto the (nb)^2 grid.
    """
    f = centered_freqs(n * b)
    k1, k2 = np.meshgrid(f, f, indexing="ij")
    norm2 = (k1 * k1 + k2 * k2).ravel()
    uniq, inverse = np.unique(norm2, return_inverse=True)
    return np.sqrt(uniq.astype(float)), inverse


def build_moment_table(kernel: KernelSpec, n: int, b: int, a: float) -> MomentTable:
    """Analytic moment table; raises UnsupportedKernelError otherwise."""
    validate_geometry(a, b)
    if kernel.kind == "dipole-x1":
        f = centered_freqs(n * b)
        k1, k2 = np.meshgrid(f, f, indexing="ij")
        values = kernel.scale * _dipole_moments(k1, k2, a, b)
        return MomentTable(kernel, n, b, float(a), values, "analytic")
    kmag, inverse = distinct_norms(n, b)
    if kernel.kind == "log":
        vals = _log_moments(kmag, a, b)
    elif kernel.kind == "helmholtz":
        vals = _helmholtz_moments(kmag, a, b, kernel.kappa)
    elif kernel.kind == "power" and kernel.gamma == -1.0:
        vals = _inverse_r_moments(kmag, a, b)
    else:
        raise UnsupportedKernelError(
            f"no closed-form moments for kernel kind {kernel.kind!r}"
            + (f" (gamma={kernel.gamma})" if kernel.kind == "power" else ""))
    return radial_table_from_classes(kernel, n, b, a, kernel.scale * vals,
                                     inverse, "analytic")
