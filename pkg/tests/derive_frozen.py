"""Recompute the frozen reference values in ``frozen.py`` independently.

Uses mpmath at 30 digits and exact rationals; nothing from the package is
imported.  Run ``python tests/derive_frozen.py`` and compare with
``frozen.py``.
"""

from fractions import Fraction

import mpmath as mp

mp.mp.dps = 30


def main():
    out = {}
    # Beta density at 0 for exponents 3, 3 on (-1, 1)
    out["BETA_L4_DENSITY_AT_0"] = 1 / mp.quad(lambda w: (1 - w**2) ** 3, [-1, 1])
    # power-law 9/16 (xy)^-1/4: degree at 1 and L1 norm
    out["PL_DEGREE_AT_1"] = mp.quad(lambda y: mp.mpf(9) / 16 * y ** (-0.25), [0, 1])
    out["PL_L1"] = mp.quad(lambda x: mp.quad(lambda y: mp.mpf(9) / 16 * (x * y) ** (-0.25), [0, 1]), [0, 1])
    out["PL_L2"] = mp.sqrt(mp.quad(lambda x: mp.quad(lambda y: (mp.mpf(9) / 16) ** 2 * (x * y) ** (-0.5), [0, 1]), [0, 1]))
    # truncated power law at Sigma = 4: degree at x = 1e-3
    c, a, s = mp.mpf(9) / 16, mp.mpf(1) / 4, mp.mpf(4)
    x = mp.mpf("1e-3")
    ystar = (c * x ** (-a) / s) ** (1 / a)
    out["PL4_DEGREE_AT_1E-3"] = mp.quad(lambda y: min(c * (x * y) ** (-a), s), [0, ystar, 1])
    # penalties and intervals (exact)
    g, th, s2 = Fraction(1), Fraction(1, 10), Fraction(1, 4)
    out["KAPPA_BAR"] = g * g * th / ((1 - th) * (g - s2))
    out["KAPPA_BAR_HALF"] = Fraction(1) * Fraction(1, 2) / ((1 - Fraction(1, 2)) * (1 - Fraction(1, 2)))
    out["KAPPA_D2_RHO1"] = 2 * out["KAPPA_BAR"]
    gm, nu = Fraction(1, 10), Fraction(1, 10)
    out["L_HI_SMALL"] = (gm * gm + nu) / (2 * gm * gm + nu)
    out["L_HI_KBAR"] = (1 + out["KAPPA_BAR"]) / (2 + out["KAPPA_BAR"])
    out["GAIN_05"] = -gm * Fraction(1, 2) / (nu + gm * gm)
    out["CONTROLLED_05"] = Fraction(1, 2) + gm * gm / (gm * gm + nu) * Fraction(1, 2)
    out["DECAY_EXAMPLE"] = mp.mpf("0.1") * mp.exp(-2 * mp.mpf("0.25") * mp.mpf("0.75"))
    out["KNN_DEGREE"] = Fraction(1, 4) * Fraction(1, 4) + Fraction(3, 4) * Fraction(3, 4)
    # entropy of a Beta(4, 4) law rescaled to (-1, 1)
    f = lambda w: out["BETA_L4_DENSITY_AT_0"] * (1 - w**2) ** 3
    out["BETA_L4_ENTROPY"] = -mp.quad(lambda w: f(w) * mp.log(f(w)), [-1, 0, 1])
    # variance of that law: 1/9
    out["BETA_L4_VARIANCE"] = mp.quad(lambda w: w * w * f(w), [-1, 1])
    for k, v in out.items():
        print(f"{k} = {mp.nstr(mp.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else v, 20)}")


if __name__ == "__main__":
    main()
