"""Regenerate the Chebyshev coefficient tables embedded in singconv.specfun.

Maintenance tool, not needed at runtime.  Requires mpmath.  Each table is a
truncated Chebyshev expansion of a smooth companion function (entire part,
asymptotic modulus/phase part, or scaled remainder) computed at 50 significant
digits and truncated at the 1e-17 coefficient level.  The script prints the
tables as Python source and reports the max error of the assembled
double-precision evaluators on dense validation grids.

Usage: python3 scripts/gen_specfun_tables.py > /tmp/specfun_tables.py
"""

import mpmath as mp

mp.mp.dps = 50

EULER = mp.euler


def cheb_fit(f, n):
    """Chebyshev coefficients of f on t in [-1,1] via first-kind nodes."""
    nodes = [mp.cos(mp.pi * (k + mp.mpf(1) / 2) / n) for k in range(n)]
    vals = [f(t) for t in nodes]
    coeffs = []
    for j in range(n):
        s = sum(vals[k] * mp.cos(j * mp.pi * (k + mp.mpf(1) / 2) / n)
                for k in range(n))
        coeffs.append(2 * s / n)
    coeffs[0] /= 2
    return coeffs


def truncate(coeffs, tol=1e-17):
    scale = max(abs(c) for c in coeffs)
    keep = len(coeffs)
    while keep > 1 and abs(coeffs[keep - 1]) < tol * scale:
        keep -= 1
    return coeffs[:keep]


def emit(name, coeffs):
    print(f"{name} = [")
    for c in coeffs:
        print(f"    {mp.nstr(c, 19)},")
    print("]")


def cheb_eval(coeffs, t):
    b0, b1 = mp.mpf(0), mp.mpf(0)
    for c in reversed(coeffs):
        b0, b1 = 2 * t * b0 - b1 + c, b0
    return b0 - t * b1


# ----------------------------------------------------------------- regions
# Bessel J/Y: [0,8] entire parts, (8,20] and (20,inf) modulus/phase parts.

def p0q0(x):
    # Q is odd in 1/x, so the stored table is x*Q (even, smooth in 1/x^2).
    chi = x - mp.pi / 4
    amp = mp.sqrt(mp.pi * x / 2)
    j0, y0 = mp.besselj(0, x), mp.bessely(0, x)
    return (amp * (j0 * mp.cos(chi) + y0 * mp.sin(chi)),
            x * amp * (y0 * mp.cos(chi) - j0 * mp.sin(chi)))


def p1q1(x):
    chi = x - 3 * mp.pi / 4
    amp = mp.sqrt(mp.pi * x / 2)
    j1, y1 = mp.besselj(1, x), mp.bessely(1, x)
    return (amp * (j1 * mp.cos(chi) + y1 * mp.sin(chi)),
            x * amp * (y1 * mp.cos(chi) - j1 * mp.sin(chi)))


def x_of_t_mid(t):
    # u = 1/x^2 linear on [1/400, 1/64] -> x in [8, 20]
    u = (t + 1) / 2 * (mp.mpf(1) / 64 - mp.mpf(1) / 400) + mp.mpf(1) / 400
    return 1 / mp.sqrt(u)


def x_of_t_far(t):
    # t = 2 (20/x)^2 - 1 -> x in [20, inf)
    return 20 / mp.sqrt((t + 1) / 2)


tables = {}

tables["J0_SMALL"] = truncate(cheb_fit(
    lambda t: mp.besselj(0, 8 * mp.sqrt((t + 1) / 2)), 64))
tables["J1_SMALL"] = truncate(cheb_fit(          # J1(x)/x
    lambda t: mp.besselj(1, 8 * mp.sqrt((t + 1) / 2)) / (8 * mp.sqrt((t + 1) / 2))
    if t > -1 else mp.mpf(1) / 2, 64))
tables["Y0_SMALL"] = truncate(cheb_fit(          # Y0 - (2/pi) ln(x/2) J0
    lambda t: (lambda x: mp.bessely(0, x) - 2 / mp.pi * mp.log(x / 2) * mp.besselj(0, x))(
        8 * mp.sqrt((t + 1) / 2)), 64))
tables["Y1_SMALL"] = truncate(cheb_fit(          # (Y1 + 2/(pi x) - (2/pi) ln(x/2) J1)/x
    lambda t: (lambda x: (mp.bessely(1, x) + 2 / (mp.pi * x)
                          - 2 / mp.pi * mp.log(x / 2) * mp.besselj(1, x)) / x)(
        8 * mp.sqrt((t + 1) / 2)), 64))

for nm, fn in (("P0", lambda x: p0q0(x)[0]), ("Q0", lambda x: p0q0(x)[1]),
               ("P1", lambda x: p1q1(x)[0]), ("Q1", lambda x: p1q1(x)[1])):
    tables[nm + "_MID"] = truncate(cheb_fit(lambda t: fn(x_of_t_mid(t)), 48))
    tables[nm + "_FAR"] = truncate(cheb_fit(lambda t: fn(x_of_t_far(t)), 48))

# Modified Bessel: I0 on [0,2] (of x^2), K0 companion on [0,2], scaled K0 beyond.
tables["I0_SMALL"] = truncate(cheb_fit(
    lambda t: mp.besseli(0, 2 * mp.sqrt((t + 1) / 2)), 48))
tables["K0_SMALL"] = truncate(cheb_fit(          # K0 + ln(x/2) I0
    lambda t: (lambda x: mp.besselk(0, x) + mp.log(x / 2) * mp.besseli(0, x))(
        2 * mp.sqrt((t + 1) / 2)) if t > -1 else -EULER, 48))
tables["K0_MID"] = truncate(cheb_fit(            # sqrt(x) e^x K0, u = 1/x on [1/8, 1/2]
    lambda t: (lambda x: mp.sqrt(x) * mp.e**x * mp.besselk(0, x))(
        1 / ((t + 1) / 2 * (mp.mpf(1) / 2 - mp.mpf(1) / 8) + mp.mpf(1) / 8)), 48))
tables["K0_FAR"] = truncate(cheb_fit(            # same, t = 16/x - 1 on [8, inf)
    lambda t: (lambda x: mp.sqrt(x) * mp.e**x * mp.besselk(0, x))(16 / (t + 1)), 48))

# Struve H0, H1: [0,8] entire parts, [8,40] remainders vs Y, asymptotics beyond.
tables["H0_SMALL"] = truncate(cheb_fit(          # H0(x)/x
    lambda t: (lambda x: mp.struveh(0, x) / x)(8 * mp.sqrt((t + 1) / 2))
    if t > -1 else 2 / mp.pi, 64))
tables["H1_SMALL"] = truncate(cheb_fit(          # H1(x)/x^2
    lambda t: (lambda x: mp.struveh(1, x) / x**2)(8 * mp.sqrt((t + 1) / 2))
    if t > -1 else 2 / (3 * mp.pi), 64))
tables["H0_MID"] = truncate(cheb_fit(            # x (H0 - Y0), u = 1/x on [1/40, 1/8]
    lambda t: (lambda x: x * (mp.struveh(0, x) - mp.bessely(0, x)))(
        1 / ((t + 1) / 2 * (mp.mpf(1) / 8 - mp.mpf(1) / 40) + mp.mpf(1) / 40)), 56))
tables["H1_MID"] = truncate(cheb_fit(            # H1 - Y1
    lambda t: (lambda x: mp.struveh(1, x) - mp.bessely(1, x))(
        1 / ((t + 1) / 2 * (mp.mpf(1) / 8 - mp.mpf(1) / 40) + mp.mpf(1) / 40)), 56))

# Gamma on [1,2].
tables["GAMMA_12"] = truncate(cheb_fit(
    lambda t: mp.gamma((t + 1) / 2 + 1), 48))

for nm in sorted(tables):
    emit(nm, tables[nm])
    print(f"# len({nm}) = {len(tables[nm])}")

# ------------------------------------------------------------- validation
import math


def clenshaw_d(coeffs, t):
    b0 = b1 = 0.0
    for c in reversed([float(c) for c in coeffs]):
        b0, b1 = 2.0 * t * b0 - b1 + c, b0
    return b0 - t * b1


def j0_d(x):
    if x <= 8.0:
        return clenshaw_d(tables["J0_SMALL"], 2 * (x / 8) ** 2 - 1)
    if x <= 20.0:
        u = 1 / x**2
        t = (u - 1 / 400) / (1 / 64 - 1 / 400) * 2 - 1
        p, q = clenshaw_d(tables["P0_MID"], t), clenshaw_d(tables["Q0_MID"], t) / x
    else:
        t = 2 * (20 / x) ** 2 - 1
        p, q = clenshaw_d(tables["P0_FAR"], t), clenshaw_d(tables["Q0_FAR"], t) / x
    chi = x - math.pi / 4
    return math.sqrt(2 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def y0_d(x):
    if x <= 8.0:
        s = clenshaw_d(tables["Y0_SMALL"], 2 * (x / 8) ** 2 - 1)
        return 2 / math.pi * math.log(x / 2) * j0_d(x) + s
    if x <= 20.0:
        u = 1 / x**2
        t = (u - 1 / 400) / (1 / 64 - 1 / 400) * 2 - 1
        p, q = clenshaw_d(tables["P0_MID"], t), clenshaw_d(tables["Q0_MID"], t) / x
    else:
        t = 2 * (20 / x) ** 2 - 1
        p, q = clenshaw_d(tables["P0_FAR"], t), clenshaw_d(tables["Q0_FAR"], t) / x
    chi = x - math.pi / 4
    return math.sqrt(2 / (math.pi * x)) * (p * math.sin(chi) + q * math.cos(chi))


def report(name, fd, fmp, grid, rel_floor=1.0):
    worst = 0.0
    for x in grid:
        ref = float(fmp(mp.mpf(x)))
        err = abs(fd(x) - ref) / max(rel_floor, abs(ref))
        worst = max(worst, err)
    print(f"# max err {name}: {worst:.3e}")


grid1 = [0.01 * i for i in range(1, 801)]
grid2 = [8.0 + 0.05 * i for i in range(1, 641)]
grid3 = [40.0 + 7.13 * i for i in range(1, 200)] + [1e4, 3e4]
report("J0 [0,8]", j0_d, lambda x: mp.besselj(0, x), grid1)
report("J0 (8,40]", j0_d, lambda x: mp.besselj(0, x), grid2)
report("J0 big", j0_d, lambda x: mp.besselj(0, x), grid3)
report("Y0 [0,8]", y0_d, lambda x: mp.bessely(0, x), grid1)
report("Y0 (8,40]", y0_d, lambda x: mp.bessely(0, x), grid2)
report("Y0 big", y0_d, lambda x: mp.bessely(0, x), grid3)
