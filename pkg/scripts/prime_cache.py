"""Pre-compute the moment tables the experiment suite needs.

Numeric tables (power-law and Yukawa kernels) dominate the first-run cost of
the convergence experiments; everything here lands in the on-disk cache, so
reruns of the test suite and the CLI serve them instantly.

Usage: python3 scripts/prime_cache.py [--max-n 512]
"""

import argparse
import math
import time

from singconv import moments
from singconv.kernels import power_kernel, yukawa_kernel
from singconv.windows import RadialWindow


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=512)
    ap.add_argument("--beta", type=float, default=0.5)
    args = ap.parse_args()

    jobs = []
    for gamma in (-0.5, -1.5):
        ker = power_kernel(gamma, scale=2 * math.pi)
        for n in (16, 32, 64, 128, 256, 512):
            if n <= args.max_n:
                jobs.append((ker, n, dict()))
    for kappa in (1.0, 200.0):
        ker = yukawa_kernel(kappa)
        for n in (4, 8, 16, 32, 64):
            if n <= args.max_n:
                jobs.append((ker, n, dict(sub=moments.SubstitutionParams(4))))
    window = RadialWindow(args.beta)
    for gamma in (-0.5, -1.0, -1.5):
        ker = power_kernel(gamma, scale=2 * math.pi)
        for n in (16, 32, 64, 128, 256):
            if n <= args.max_n:
                jobs.append((ker, n, dict(localized=True, beta=args.beta,
                                          window=window)))
    ker = power_kernel(-1.0, scale=2 * math.pi)  # localized smoothness sweep
    from singconv.kernels import log_kernel
    lker = log_kernel(scale=-2 * math.pi)
    for n in (16, 32, 64, 128, 256):
        if n <= args.max_n:
            jobs.append((lker, n, dict(localized=True, beta=args.beta,
                                       window=window)))

    for ker, n, kw in jobs:
        cap = 2**15 if n >= 512 else moments.ADAPT_CAP
        t0 = time.time()
        moments.build_moment_table_numeric(ker, n, 3, a=2.0, cap=cap, **kw)
        print(f"{ker.kind}{ker.gamma if ker.gamma is not None else ''}"
              f"{' kappa=%g' % ker.kappa if ker.kappa else ''}"
              f" n={n}{' localized' if kw.get('localized') else ''}:"
              f" {time.time() - t0:.1f}s", flush=True)


if __name__ == "__main__":
    main()
