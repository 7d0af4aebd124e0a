"""Core O(N log N) convolution scheme on the periodically extended grid.

The density u lives on the n x n grid over D = [0,1)^2 (samples u(j/n)).
It is zero-padded into the extended period cell [0,b)^2, transformed with an
FFT carrying the 1/(nb)^2 normalization, multiplied mode-by-mode by the
kernel moments ghat(k), and transformed back.  The result is the quadrature
value of the convolution integral at every extended grid node j/n,
j in [0, nb)^2.

Conventions: the Fourier index set F_n is the centered integer square of
cardinality (nb)^2; spectra and moment tables are stored in ascending-k
(fftshifted) layout and unshifted only next to the FFT calls.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConvolutionPlan",
    "ExtendedSpectrum",
    "GridDensity",
    "GridField",
    "centered_freqs",
    "extend_and_transform",
    "index_set_F",
]


def centered_freqs(m: int) -> np.ndarray:
    """Integer frequencies of an m-point DFT in ascending order.

    [-m/2, m/2) for even m, [-(m-1)/2, (m-1)/2] for odd m.
    """
    return np.fft.fftshift(np.fft.fftfreq(m, d=1.0 / m)).astype(np.int64)


def index_set_F(n: int, b: int) -> np.ndarray:
    """The (nb)^2 x 2 array of Fourier indices k in F_n, row-major ascending."""
    if n < 1 or b < 3:
        raise ValueError("need n >= 1 and b >= 3")
    f = centered_freqs(n * b)
    k1, k2 = np.meshgrid(f, f, indexing="ij")
    return np.stack([k1.ravel(), k2.ravel()], axis=1)


@dataclass(frozen=True)
class GridDensity:
    """Samples u(j/n) on the n x n grid over D = [0,1)^2."""

    n: int
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.shape != (self.n, self.n):
            raise ValueError(f"samples must be {self.n} x {self.n}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_function(cls, fn, n: int) -> "GridDensity":
        x = np.arange(n) / n
        x1, x2 = np.meshgrid(x, x, indexing="ij")
        return cls(n, fn(x1, x2))

    def grid_points(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.n) / self.n
        return np.meshgrid(x, x, indexing="ij")


@dataclass(frozen=True)
class ExtendedSpectrum:
    """Trapezoidal Fourier coefficients of the b-periodic zero extension.

    coeffs[k] = (1/(nb)^2) sum_j u_j exp(-2 pi i k.j/(nb)), stored centered.
    """

    n: int
    b: int
    coeffs: np.ndarray


def extend_and_transform(u: GridDensity, b: int) -> ExtendedSpectrum:
    """Zero-pad u into the (nb)^2 cell and take the normalized forward FFT."""
    if b < 3:
        raise ValueError("b must be an integer >= 3 (>= 1 + sqrt(2))")
    m = u.n * b
    padded = np.zeros((m, m), dtype=complex)
    padded[: u.n, : u.n] = u.samples
    coeffs = np.fft.fftshift(np.fft.fft2(padded)) / m**2
    return ExtendedSpectrum(u.n, b, coeffs)


@dataclass(frozen=True)
class GridField:
    """Values on the extended grid {j/n : j in [0, nb)^2}."""

    n: int
    b: int
    samples: np.ndarray

    @property
    def on_density_grid(self) -> np.ndarray:
        """Restriction to G_n, the n x n block covering D."""
        return self.samples[: self.n, : self.n]

    def export_binary(self, path) -> None:
        """Flat binary export: magic, n, b, kind byte, row-major f64 payload."""
        arr = np.asarray(self.samples)
        is_complex = np.iscomplexobj(arr)
        with open(path, "wb") as fh:
            fh.write(b"SCGF")
            fh.write(struct.pack("<IIB", self.n, self.b, 1 if is_complex else 0))
            if is_complex:
                out = np.empty(arr.shape + (2,))
                out[..., 0] = arr.real
                out[..., 1] = arr.imag
                fh.write(out.astype("<f8").tobytes())
            else:
                fh.write(arr.astype("<f8").tobytes())

    def export_csv(self, path) -> None:
        m = self.samples.shape[0]
        x = np.arange(m) / self.n
        with open(path, "w") as fh:
            fh.write("x,y,re,im\n")
            for i in range(m):
                for j in range(m):
                    v = complex(self.samples[i, j])
                    fh.write(f"{x[i]:.17g},{x[j]:.17g},{v.real:.17g},{v.imag:.17g}\n")


def load_field_binary(path) -> GridField:
    with open(path, "rb") as fh:
        if fh.read(4) != b"SCGF":
            raise ValueError("not a grid field file")
        n, b, kind = struct.unpack("<IIB", fh.read(9))
        m = n * b
        if kind == 1:
            raw = np.frombuffer(fh.read(), dtype="<f8").reshape(m, m, 2)
            data = raw[..., 0] + 1j * raw[..., 1]
        else:
            data = np.frombuffer(fh.read(), dtype="<f8").reshape(m, m)
    return GridField(int(n), int(b), data)


class ConvolutionPlan:
    """A moment table bound to its grid, ready to apply A_n repeatedly.

    apply() holds no mutable shared state (fresh FFT buffers per call), so
    concurrent calls on one plan behave as if serialized.
    """

    def __init__(self, table, n: int | None = None, b: int | None = None):
        n = table.n if n is None else n
        b = table.b if b is None else b
        if table.n != n or table.b != b:
            raise ValueError("moment table does not match the requested grid")
        self.table = table
        self.n = n
        self.b = b
        self.m = n * b
        # moments in unshifted FFT layout, the only form apply() needs
        self._ghat_fft = np.fft.ifftshift(np.asarray(table.values))

    def apply(self, u: GridDensity) -> GridField:
        """A_n u on the full extended grid via one forward/inverse FFT pair."""
        if u.n != self.n:
            raise ValueError(f"density has n={u.n}, plan expects n={self.n}")
        padded = np.zeros((self.m, self.m), dtype=complex)
        padded[: self.n, : self.n] = u.samples
        out = np.fft.ifft2(np.fft.fft2(padded) * self._ghat_fft)
        return GridField(self.n, self.b, out)

    def evaluate_at(self, spectrum: ExtendedSpectrum, x) -> complex:
        """Direct Fourier-series evaluation of A_n u at an arbitrary point."""
        if spectrum.n != self.n or spectrum.b != self.b:
            raise ValueError("spectrum does not match plan")
        f = centered_freqs(self.m)
        e1 = np.exp(2j * np.pi * f * (x[0] / self.b))
        e2 = np.exp(2j * np.pi * f * (x[1] / self.b))
        w = np.asarray(self.table.values) * spectrum.coeffs
        return complex(e1 @ w @ e2)

    def quadrature_weights(self, x) -> np.ndarray:
        """Weights w_j^n(x) over G_n so that sum_j w_j u(x_j) = (A_n u)(x)."""
        f = centered_freqs(self.m)
        e1 = np.exp(2j * np.pi * f * (x[0] / self.b))
        e2 = np.exp(2j * np.pi * f * (x[1] / self.b))
        c = np.asarray(self.table.values) * np.outer(e1, e2)
        w = np.fft.fft2(np.fft.ifftshift(c)) / self.m**2
        return w[: self.n, : self.n]


def apply(plan: ConvolutionPlan, u: GridDensity) -> GridField:
    return plan.apply(u)
