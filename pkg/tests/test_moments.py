"""Numeric moment machinery: quadrature rule, substitution, adaptivity, cache."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singconv import kernels as K
from singconv import moments as M
from singconv.windows import RadialWindow

B, A = 3, 2.0


# ------------------------------------------------------------ cc_rule

def test_cc_rule_nodes_formula():
    rule = M.cc_rule(2.0, 7)
    j = np.arange(1, 8)
    expected = 1.0 * (1 + np.cos((j - 0.5) * np.pi / 7))
    assert np.allclose(rule.nodes, expected, rtol=0, atol=1e-15)
    assert np.all(np.diff(rule.nodes) < 0)
    assert np.all((rule.nodes > 0) & (rule.nodes < 2.0))


@pytest.mark.parametrize("n_pc", [1, 2, 3, 5, 8, 33])
def test_cc_rule_weight_sum(n_pc):
    rule = M.cc_rule(1.7, n_pc)
    assert math.fsum(rule.weights) == pytest.approx(1.7, rel=1e-13)
    assert np.all(np.isfinite(rule.weights))


@given(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=12))
@settings(max_examples=120, deadline=None)
def test_cc_rule_polynomial_exactness(n_pc, deg):
    if deg > n_pc - 1:
        deg = n_pc - 1
    alpha = 1.25
    rule = M.cc_rule(alpha, n_pc)
    got = float(rule.weights @ rule.nodes**deg)
    exact = alpha ** (deg + 1) / (deg + 1)
    assert abs(got - exact) <= 1e-12 * alpha ** (deg + 1)


def test_cc_rule_linear_and_exp():
    rule = M.cc_rule(1.0, 2)
    assert rule.weights @ rule.nodes == pytest.approx(0.5, abs=1e-14)
    rule = M.cc_rule(1.0, 20)
    assert rule.weights @ np.exp(rule.nodes) == pytest.approx(math.e - 1,
                                                              abs=1e-13)


def test_substitution_params_validation():
    with pytest.raises(ValueError):
        M.SubstitutionParams(1)
    assert M.default_substitution(0.0).p == 5
    assert M.default_substitution(-1.5).p == 18  # generic fallback
    assert M.default_substitution(K.power_kernel(-1.5)).p == 4  # analytic pick


def test_substitution_convergence_order():
    """Measured n_pc-doubling order of the substituted integrand is >= 4."""
    ker = K.power_kernel(-0.5)
    sub = M.SubstitutionParams(6)  # spec fallback power for gamma = -1/2
    vals = {}
    for n_pc in (8, 16, 32, 64, 512):
        vals[n_pc] = M.radial_moment_numeric(
            ker, 3.0, A, B, sub=M.SubstitutionParams(6, n_pc=n_pc))
    errs = [abs(vals[n] - vals[512]) for n in (8, 16, 32)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert max(orders) >= 4.0


# ---------------------------------------------------- radial numeric moments

def test_radial_moment_log_closed_form():
    ker = K.log_kernel()
    got = M.radial_moment_numeric(ker, 0.0, 1.0, B)
    assert got == pytest.approx(0.25, abs=1e-12)


def test_radial_moment_smooth_disc_area():
    got = M.radial_moment_numeric(lambda r: np.ones_like(r), 0.0, A, B,
                                  sub=M.SubstitutionParams(4))
    assert got == pytest.approx(math.pi * A**2, rel=1e-13)


def test_radial_moment_matches_inverse_r():
    ker = K.power_kernel(-1.0)
    kmag = 5.0
    got = M.radial_moment_numeric(ker, kmag, A, B)
    assert got == pytest.approx(K.moment_inverse_r((5, 0), A, B), abs=1e-10)


def test_bare_callable_requires_sub():
    with pytest.raises(ValueError):
        M.radial_moment_numeric(lambda r: 1.0 / r, 1.0, A, B)


# ------------------------------------------------------- non-radial moments

def test_nonradial_reduces_to_radial():
    ker = K.log_kernel()
    got = M.nonradial_moment_numeric(
        lambda x1, x2: -np.log(np.hypot(x1, x2)) / (2 * math.pi),
        (3, 4), A, B, M.SubstitutionParams(5))
    want = M.radial_moment_numeric(ker, 5.0, A, B)
    assert abs(got - want) <= 1e-12 * max(1, abs(want))


def test_nonradial_matches_dipole_closed_form():
    got = M.nonradial_moment_numeric(K.dipole_x1_kernel(), (3, 1), A, B,
                                     M.SubstitutionParams(4))
    assert abs(got - K.moment_dipole_x1((3, 1), A, B)) <= 1e-10


def test_nonradial_odd_kernel_zero():
    got = M.nonradial_moment_numeric(K.dipole_x1_kernel(), (0, 2), A, B,
                                     M.SubstitutionParams(4))
    assert abs(got) <= 1e-13


# -------------------------------------------------------- localized moments

def test_localized_matches_cc_oracle():
    """Trapezoid localized moment vs an independent CC evaluation."""
    beta = 0.5
    window = RadialWindow(beta)
    ker = K.log_kernel()
    got = M.localized_moment_numeric(ker, window, 0.0, beta, B)
    p = 5
    rule = M.cc_rule(beta ** (1.0 / p), 4096)
    tau = rule.nodes
    integrand = (-np.log(tau**p) / (2 * math.pi)) * window(tau**p) \
        * tau ** (2 * p - 1)
    want = 2 * math.pi * p * float(rule.weights @ integrand)
    assert got == pytest.approx(want, abs=1e-12)


def test_localized_mass_bound():
    beta = 0.5
    window = RadialWindow(beta)
    got = M.localized_moment_numeric(lambda r: np.ones_like(r), window, 0.0,
                                     beta, B, sub=M.SubstitutionParams(4))
    assert 0 < got <= math.pi * beta**2 + 1e-12


def test_localized_degenerate_window_consistency():
    """eta forced to 1 over the full cut radius reproduces the plain moment."""
    ker = K.power_kernel(-1.0)
    got = M.localized_moment_numeric(
        ker, lambda r: np.ones_like(np.asarray(r, dtype=float)), 2.0, A, B,
        sub=M.SubstitutionParams(4), tol=1e-8, cap=2**17)
    want = M.radial_moment_numeric(ker, 2.0, A, B)
    assert got == pytest.approx(want, abs=1e-7)


# ------------------------------------------------------------- table builds

def test_numeric_table_matches_analytic_log():
    num = M.build_moment_table_numeric(K.log_kernel(), 8, B, a=A, cache=False)
    ana = K.build_moment_table(K.log_kernel(), 8, B, A)
    assert np.max(np.abs(num.values - ana.values)) <= 1e-10
    assert num.provenance == "numeric"


def test_numeric_table_matches_analytic_helmholtz_and_invr():
    for ker in (K.helmholtz_kernel(10.0), K.power_kernel(-1.0)):
        num = M.build_moment_table_numeric(ker, 16, B, a=A, cache=False)
        ana = K.build_moment_table(ker, 16, B, A)
        assert np.max(np.abs(num.values - ana.values)) <= 1e-10


def test_dedup_count_is_small():
    kmags, inverse = K.distinct_norms(16, B)
    total = (16 * B) ** 2
    assert kmags.size < total / 8 + 10 * 16 * B
    assert inverse.size == total


def test_radial_symmetry_of_numeric_table():
    table = M.build_moment_table_numeric(K.power_kernel(-0.5), 4, B, a=A,
                                         cache=False)
    assert table.value_at(3, 4) == table.value_at(0, 5)


def test_cache_roundtrip_bit_identical(tmp_path):
    ker = K.power_kernel(-0.5, scale=2 * math.pi)
    t1 = M.build_moment_table_numeric(ker, 4, B, a=A, cache=True,
                                      cache_dir=tmp_path)
    files = list(tmp_path.glob("*.scmt"))
    assert len(files) == 1
    t2 = M.build_moment_table_numeric(ker, 4, B, a=A, cache=True,
                                      cache_dir=tmp_path)
    assert np.array_equal(t1.values, t2.values)
    assert len(list(tmp_path.glob("*.scmt"))) == 1


def test_localized_table_provenance(tmp_path):
    beta = 0.5
    table = M.build_moment_table_numeric(
        K.log_kernel(), 4, B, beta=beta, localized=True,
        window=RadialWindow(beta), cache=False)
    assert table.provenance == "numeric-localized"
    assert table.a == beta


def test_no_convergence_reports_offender():
    ker = K.power_kernel(-0.5)
    with pytest.raises(M.NoConvergenceError) as err:
        M.radial_moment_numeric(ker, 400.0, A, B, cap=256)
    assert err.value.kmag == 400.0


def test_env_cache_dir(monkeypatch, tmp_path):
    monkeypatch.setenv("SINGCONV_CACHE_DIR", str(tmp_path / "env"))
    assert M.moment_cache_dir() == tmp_path / "env"
    monkeypatch.setenv("SINGCONV_CACHE_DIR", "")
    assert M.moment_cache_dir() is None
