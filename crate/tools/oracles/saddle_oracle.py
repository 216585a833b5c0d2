#!/usr/bin/env python3
"""Independent oracle for the saddle data of the potentials

    v_n(z) = -n * Li2(-e^z) - z^2 / 2,   v_n'(z) = n * log(1 + e^z) - z.

Critical points satisfy (1 + w)^n = w with w = e^z.  This script solves the
polynomial with mpmath's arbitrary-precision root finder, maps roots back by
the principal logarithm, keeps only roots where the principal-branch critical
equation n*log(1+e^z) = z actually holds (for n >= 4 some polynomial roots map
to a different branch and are spurious), selects the survivor in the strip
|Im z| < pi that minimizes Im v_n, and prints the selected saddle plus Im v_n
there as Rust constants.  The Rust implementation uses a Durand-Kerner solve plus Newton
polish and its own Li2, so agreement is a real cross-check.

Run:  python3 tools/oracles/saddle_oracle.py
"""

import mpmath as mp

mp.mp.dps = 40


def v(n, z):
    return -n * mp.polylog(2, -mp.e**z) - z * z / 2


def saddle(n):
    # (1+w)^n - w: coefficients via binomial expansion, then subtract w.
    coeffs = [mp.binomial(n, k) for k in range(n + 1)]  # w^n .. w^0
    coeffs[n - 1] -= 1
    roots = mp.polyroots(coeffs, maxsteps=200, extraprec=200)
    best = None
    for w in roots:
        z = mp.log(w)  # principal branch
        if abs(mp.im(z)) >= mp.pi:
            continue
        if abs(n * mp.log(1 + mp.e**z) - z) > mp.mpf("1e-20"):
            continue  # root of the polynomial but not of v_n' (branch mismatch)
        imv = mp.im(v(n, z))
        if best is None or imv < best[1]:
            best = (z, imv)
    return best


def emit(name, x):
    print(f"const {name}: f64 = {mp.nstr(x, 17)}; // {mp.nstr(x, 30)}")


for n in (2, 3, 4, 5, 6):
    z, imv = saddle(n)
    resid = abs(n * mp.log(1 + mp.e**z) - z)
    print(f"// n = {n}: saddle residual {mp.nstr(resid, 3)}")
    emit(f"SADDLE_{n}_RE", mp.re(z))
    emit(f"SADDLE_{n}_IM", mp.im(z))
    emit(f"IM_V_{n}", imv)
