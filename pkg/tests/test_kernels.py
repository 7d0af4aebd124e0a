"""Kernel registry and closed-form moment tests.

The independent oracle for every closed form is high-precision adaptive
quadrature of the defining integral (mpmath), evaluated at test time.
"""

import math

import mpmath as mp
import numpy as np
import pytest

from singconv import kernels as K

mp.mp.dps = 30
B, A = 3, 2.0


def ghat_radial_oracle(g_mp, kmag, a=A, b=B):
    """2 pi int_0^a g(rho) J0(2 pi |k| rho / b) rho drho at high precision."""
    w = 2 * mp.pi * kmag / b

    def f(r):
        return g_mp(r) * mp.besselj(0, w * r) * r
    return 2 * mp.pi * mp.quad(f, [0, a / 2, a])


# ------------------------------------------------------------- closed forms

def test_moment_log_k0_values():
    # a = 1 sits outside the exactness window the public op enforces, so the
    # formula value is checked on the internal evaluator
    assert float(K._log_moments(np.array([0.0]), 1.0, B)[0]) == pytest.approx(
        0.25, rel=1e-15)
    assert K.moment_log((0, 0), 2.0, B) == pytest.approx(1 - 2 * math.log(2),
                                                         rel=1e-14)


@pytest.mark.parametrize("k", [(1, 0), (2, 3), (-7, 5)])
def test_moment_log_oracle(k):
    ref = float(ghat_radial_oracle(lambda r: -mp.log(r) / (2 * mp.pi),
                                   math.hypot(*k)))
    assert K.moment_log(k, A, B) == pytest.approx(ref, abs=1e-12)


def test_moment_helmholtz_k0_oracle():
    kappa = 10.0
    ref = ghat_radial_oracle(lambda r: 0.25j * mp.hankel1(0, kappa * r), 0.0)
    got = K.moment_helmholtz((0, 0), A, B, kappa)
    assert abs(got - complex(ref)) <= 1e-12


@pytest.mark.parametrize("k", [(1, 1), (4, 0), (-3, 6)])
def test_moment_helmholtz_generic_oracle(k):
    kappa = 10.0
    ref = ghat_radial_oracle(lambda r: 0.25j * mp.hankel1(0, kappa * r),
                             math.hypot(*k))
    assert abs(K.moment_helmholtz(k, A, B, kappa) - complex(ref)) <= 1e-11


def test_moment_helmholtz_resonant_branch():
    kmag = 4.0
    kappa = 2 * math.pi * kmag / B
    got = K.moment_helmholtz((4, 0), A, B, kappa)
    ref = ghat_radial_oracle(lambda r: 0.25j * mp.hankel1(0, kappa * r), kmag)
    assert abs(got - complex(ref)) <= 1e-12
    assert not math.isnan(got.real) and not math.isnan(got.imag)


def test_moment_helmholtz_resonance_continuity():
    kmag = 4.0
    kappa_star = 2 * math.pi * kmag / B
    at_res = K.moment_helmholtz((4, 0), A, B, kappa_star)
    lo = K.moment_helmholtz((4, 0), A, B, kappa_star * (1 - 1e-9))
    hi = K.moment_helmholtz((4, 0), A, B, kappa_star * (1 + 1e-9))
    for v in (lo, hi):
        assert abs(v - at_res) <= 1e-6 * abs(at_res)


def test_moment_inverse_r():
    assert K.moment_inverse_r((0, 0), A, B) == A
    ref = float(ghat_radial_oracle(lambda r: 1 / (2 * mp.pi * r), 5.0))
    assert K.moment_inverse_r((5, 0), A, B) == pytest.approx(ref, abs=1e-10)
    assert K.moment_inverse_r((1, 0), A, B) == K.moment_inverse_r((0, -1), A, B)


def test_moment_powerlaw_k0():
    assert K.moment_powerlaw_k0(0.0, 1.0) == pytest.approx(0.5)
    assert K.moment_powerlaw_k0(-1.0, 2.0) == pytest.approx(2.0)
    assert K.moment_powerlaw_k0(-0.5, 1.0) == pytest.approx(2.0 / 3.0)


def test_moment_dipole():
    assert K.moment_dipole_x1((0, 0), A, B) == 0.0
    for m in (1, -4):
        assert K.moment_dipole_x1((0, m), A, B) == 0.0
    # oracle: 2-D quadrature of the defining integral for x1/(2 pi |x|^2)
    k1, k2 = 3, 1

    def fr(r):
        def fth(th):
            y1, y2 = r * mp.cos(th), r * mp.sin(th)
            return (y1 / (2 * mp.pi * r**2)) \
                * mp.e**(-2j * mp.pi * (k1 * y1 + k2 * y2) / B)
        return mp.quad(fth, [0, mp.pi, 2 * mp.pi]) * r
    ref = complex(mp.quad(fr, [0, A / 2, A]))
    assert abs(K.moment_dipole_x1((k1, k2), A, B) - ref) <= 1e-10


def test_geometry_validation():
    with pytest.raises(ValueError):
        K.moment_log((1, 0), 1.0, B)  # a < sqrt(2)
    with pytest.raises(ValueError):
        K.moment_log((1, 0), 2.5, B)  # a > b - 1
    with pytest.raises(ValueError):
        K.build_moment_table(K.log_kernel(), 4, 2, 1.5)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        K.power_kernel(-2.0)
    with pytest.raises(ValueError):
        K.helmholtz_kernel(0.0)
    with pytest.raises(ValueError):
        K.KernelSpec("no-such-kind")


# -------------------------------------------------------------- table build

def test_log_table_shape_and_symmetry():
    table = K.build_moment_table(K.log_kernel(), 4, 3, A)
    assert table.values.shape == (12, 12)
    assert table.values.size == 144
    v = table.values
    # values(-k) = conj(values(k)) wherever both indices exist
    assert np.max(np.abs(v[1:, 1:] - np.conj(v[1:, 1:][::-1, ::-1]))) == 0.0
    assert table.provenance == "analytic"


def test_helmholtz_table_resonant_no_nan():
    kmag = 4.0
    kappa = 2 * math.pi * kmag / B  # resonant with |k| = 4
    table = K.build_moment_table(K.helmholtz_kernel(kappa), 4, 3, A)
    assert np.all(np.isfinite(table.values.real))
    assert np.all(np.isfinite(table.values.imag))


def test_radial_tables_depend_on_kmag_only():
    table = K.build_moment_table(K.power_kernel(-1.0), 4, 3, A)
    assert table.value_at(3, 4) == table.value_at(5, 0) == table.value_at(-4, 3)


def test_index_membership():
    table = K.build_moment_table(K.log_kernel(), 4, 3, A)
    assert table.value_at(-6, -6) is not None
    with pytest.raises(IndexError):
        table.value_at(6, 6)


def test_unsupported_kernels_raise():
    with pytest.raises(K.UnsupportedKernelError):
        K.build_moment_table(K.power_kernel(-0.5), 4, 3, A)
    with pytest.raises(K.UnsupportedKernelError):
        K.build_moment_table(K.yukawa_kernel(2.0), 4, 3, A)


def test_scale_is_linear():
    t1 = K.build_moment_table(K.log_kernel(scale=1.0), 4, 3, A)
    t2 = K.build_moment_table(K.log_kernel(scale=-2 * math.pi), 4, 3, A)
    assert np.allclose(t2.values, -2 * math.pi * t1.values, rtol=0, atol=0)


# ------------------------------------------------------------- serialization

def test_table_roundtrip(tmp_path):
    table = K.build_moment_table(K.helmholtz_kernel(7.5), 4, 3, A)
    path = tmp_path / "t.scmt"
    table.save(path)
    loaded = K.MomentTable.load(path)
    assert np.array_equal(loaded.values, table.values)
    assert loaded.kernel.kind == "helmholtz"
    assert loaded.kernel.kappa == 7.5
    assert loaded.n == table.n and loaded.b == table.b and loaded.a == table.a
    assert loaded.provenance == "analytic"
    assert loaded.content_key() == table.content_key()


def test_content_key_distinguishes_parameters():
    t1 = K.build_moment_table(K.log_kernel(), 4, 3, A)
    t2 = K.build_moment_table(K.log_kernel(), 8, 3, A)
    t3 = K.build_moment_table(K.log_kernel(scale=2.0), 4, 3, A)
    assert len({t1.content_key(), t2.content_key(), t3.content_key()}) == 3


def test_magic_rejected(tmp_path):
    path = tmp_path / "bad.scmt"
    path.write_bytes(b"NOPE" + b"\0" * 64)
    with pytest.raises(ValueError):
        K.MomentTable.load(path)
