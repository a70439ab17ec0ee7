#!/usr/bin/env python3
"""Arbitrary-precision oracle for the power-law correlation envelope.

Evaluates the closed-form envelope G(z) with mpmath at 60 significant
digits and derives the constants that the double-precision implementation
in ``nanonmr.envelopes`` hard-codes:

* the z -> 0+ limit (confirms the envelope is normalised to 1),
* the small-z expansion coefficients (used below Z_SERIES_SWITCH, where
  the direct expression cancels catastrophically),
* the large-z tail coefficients (used above Z_TAIL_SWITCH, where the
  direct expression cancels as well),
* reference values at a handful of z points, frozen into the test suite.

Run:  python tools/envelope_series_oracle.py
"""

import mpmath as mp

mp.mp.dps = 60


def envelope_exact(z):
    """G(z) evaluated directly from the closed form, arbitrary precision."""
    z = mp.mpf(z)
    rpi = mp.sqrt(mp.pi)
    poly = (z ** mp.mpf("-1.5") - mp.mpf("1.5") * z ** mp.mpf("-0.5")
            + rpi / 4 + 3 * mp.sqrt(z) - mp.mpf("1.5") * rpi * z)
    bracket = (-z ** mp.mpf("-1.5") + z ** mp.mpf("-0.5")
               - mp.mpf("1.75") * mp.sqrt(z) + mp.mpf("1.5") * z ** mp.mpf("1.5"))
    scaled_erfc = mp.erfc(1 / mp.sqrt(z)) * mp.exp(1 / z)
    return 4 / rpi * (poly + mp.sqrt(mp.pi / z) * scaled_erfc * bracket)


def small_z_coefficients():
    """Coefficients of G(z) = 1 - 6 z + sum_k c_k z^(k+1/2), k = 1..4.

    Derived by substituting the asymptotic series of the scaled
    complementary error function, erfcx(x)*sqrt(pi)*x =
    sum_n (-1)^n (2n-1)!!/2^n * x^(-2n), into the closed form with
    x = z^(-1/2).  All half-integer coefficients are rational multiples
    of 1/sqrt(pi); the z^1 coefficient is exactly -6 and integer powers
    beyond z^1 vanish.
    """
    rpi = mp.sqrt(mp.pi)
    return {
        "z":      mp.mpf(-6),
        "z^3/2":  20 / rpi,
        "z^5/2":  -42 / rpi,
        "z^7/2":  162 / rpi,
        "z^9/2":  -825 / rpi,
    }


def large_z_coefficients():
    """Tail G(z) = K z^-3/2 + c2 z^-2 + c3 z^-5/2 + c4 z^-3 + c5 z^-7/2.

    From the Taylor expansion of erfcx about 0 (x = z^(-1/2) -> 0):
    G = (2688 x^3 - 3150 sqrt(pi) x^4 + 6912 x^5 - 3675 sqrt(pi) x^6
         + 5120 x^7) / (1260 sqrt(pi)) + O(x^8).
    """
    rpi = mp.sqrt(mp.pi)
    return {
        "z^-3/2": mp.mpf(2688) / (1260 * rpi),    # = 32/(15 sqrt(pi))
        "z^-2":   mp.mpf(-3150) / 1260,           # = -5/2
        "z^-5/2": mp.mpf(6912) / (1260 * rpi),
        "z^-3":   mp.mpf(-3675) / 1260,           # = -35/12
        "z^-7/2": mp.mpf(5120) / (1260 * rpi),
    }


def check_series():
    sm = small_z_coefficients()
    lg = large_z_coefficients()
    print("# limit z->0+")
    for z in ("1e-10", "1e-14"):
        print(f"G({z}) = {mp.nstr(envelope_exact(z), 20)}")
    print("\n# small-z coefficients")
    for k, v in sm.items():
        print(f"{k:>7}: {mp.nstr(v, 20)}")
    print("\n# small-z series residual (should be ~1e-13 at z=1e-3)")
    for z in ("1e-3", "1e-4"):
        zz = mp.mpf(z)
        approx = (1 + sm["z"] * zz + sm["z^3/2"] * zz ** mp.mpf("1.5")
                  + sm["z^5/2"] * zz ** mp.mpf("2.5")
                  + sm["z^7/2"] * zz ** mp.mpf("3.5")
                  + sm["z^9/2"] * zz ** mp.mpf("4.5"))
        print(f"z={z}: rel err {mp.nstr(abs(approx / envelope_exact(z) - 1), 5)}")
    print("\n# large-z coefficients")
    for k, v in lg.items():
        print(f"{k:>7}: {mp.nstr(v, 20)}")
    print("\n# tail residual (should be small above z=1e4)")
    for z in ("1e4", "1e5"):
        zz = mp.mpf(z)
        approx = (lg["z^-3/2"] * zz ** mp.mpf("-1.5") + lg["z^-2"] / zz ** 2
                  + lg["z^-5/2"] * zz ** mp.mpf("-2.5") + lg["z^-3"] / zz ** 3
                  + lg["z^-7/2"] * zz ** mp.mpf("-3.5"))
        print(f"z={z}: rel err {mp.nstr(abs(approx / envelope_exact(z) - 1), 5)}")
    print("\n# reference values (frozen into tests)")
    for z in ("0.01", "0.05", "0.1", "0.5", "1", "2", "5", "10",
              "50", "100", "200", "400", "800"):
        print(f"G({z}) = {mp.nstr(envelope_exact(z), 17)}")
    print("\n# tail ratio G(4z)/G(z) (the -3/2 power law gives 0.125 as z->inf)")
    for z in ("50", "100", "200", "1000", "1e4", "1e6"):
        r = envelope_exact(4 * mp.mpf(z)) / envelope_exact(z)
        print(f"z={z}: {mp.nstr(r, 12)}")


if __name__ == "__main__":
    check_series()
