"""Closed-form leading principal minors of D = C*P + PC for the BGK transformation families.

Each kappa-dependent factor is stored as three polynomials in alpha, combined as
(p0 + p1 / kappa^2) / kappa^2 + p2.
"""
from dataclasses import dataclass
from typing import Dict, List

import numpy as np
from numpy.polynomial import Polynomial

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)
SQRT6 = np.sqrt(6.0)
S = SQRT2 - 1

ALPHA = Polynomial([0.0, 1.0])
ZERO = Polynomial([0.0])


@dataclass(frozen=True)
class RationalFactor:
    p0: Polynomial
    p1: Polynomial
    p2: Polynomial

    def __call__(self, kappa: float, alpha: float) -> float:
        inverse = 1.0 / kappa ** 2
        return float((self.p0(alpha) + self.p1(alpha) * inverse) * inverse + self.p2(alpha))

    def at_unit_mode(self) -> Polynomial:
        return self.p0 + self.p1 + self.p2


def _power_series(coefficients: List[float], ell: float) -> Polynomial:
    """sum_j c_j (ell * alpha)^j."""
    return Polynomial([c * ell ** j for j, c in enumerate(coefficients)])


def factors_1d(ell: float) -> Dict[str, RationalFactor]:
    # delta_3 / alpha = 72 l^3 a^2 - 48 l^2 a + 8 l - 6 a / kappa^2
    return {"q3": RationalFactor(p0=-6 * ALPHA, p1=ZERO,
                                 p2=Polynomial([8 * ell, -48 * ell ** 2, 72 * ell ** 3]))}


def factors_2d(ell: float) -> Dict[str, RationalFactor]:
    l = ell
    return {
        "q5": RationalFactor(p0=-ALPHA, p1=ZERO, p2=Polynomial([4 * l, -4 * l ** 2])),
        "p6": RationalFactor(p0=-2 * ALPHA, p1=ZERO, p2=Polynomial([2 * l, -54 / 11 * l ** 2])),
        "p7": RationalFactor(p0=Polynomial([0, -34 * l, 93 * l ** 2]),
                             p1=Polynomial([0, 0, 12]),
                             p2=Polynomial([22 * l ** 2, -120 * l ** 3, 162 * l ** 4])),
        "p8": RationalFactor(p0=-ALPHA, p1=ZERO, p2=Polynomial([4 * l, -6 * l ** 2, 2 * l ** 3])),
        "p9": RationalFactor(p0=Polynomial([0, -68 * l, 198 * l ** 2, -12 * l ** 3]),
                             p1=Polynomial([0, 0, 24]),
                             p2=Polynomial([44 * l ** 2, -262 * l ** 3, 411 * l ** 4, -81 * l ** 5])),
        "p11": RationalFactor(p0=Polynomial([0, -68 * l, 294 * l ** 2, -300 * l ** 3, -72 * l ** 4]),
                              p1=Polynomial([0, 0, 24]),
                              p2=Polynomial([44 * l ** 2, -358 * l ** 3, 963 * l ** 4, -909 * l ** 5,
                                             162 * l ** 6])),
    }


def factors_3d(ell: float) -> Dict[str, RationalFactor]:
    l = ell
    six_minus = Polynomial([0, 0, 6, -l])  # (6 - l a) a^2
    return {
        "p6": RationalFactor(p0=-ALPHA, p1=ZERO, p2=Polynomial([4 * l, -4 * l ** 2])),
        "p8": RationalFactor(p0=-5 / 6 * ALPHA, p1=ZERO,
                             p2=Polynomial([10 / 9 * S * l, (2 - 3 * SQRT2) / 3 * l ** 2])),
        "p10": RationalFactor(p0=Polynomial([0, -30, 9 * l]), p1=ZERO,
                              p2=Polynomial([40 * S * l, -6 * (8 * SQRT2 - 6) * l ** 2, 9 * S * l ** 3])),
        "p11": RationalFactor(
            p0=_power_series([0, -(216 + 144 * SQRT2), 672 - 72 * SQRT2, 54 * SQRT2 - 144], l),
            p1=18 * six_minus,
            p2=l ** 2 * _power_series([480 * S, 472 - 816 * SQRT2, 456 * SQRT2 - 24, 9 - 54 * SQRT2], l)),
        "p12": RationalFactor(p0=-2 * ALPHA, p1=ZERO, p2=Polynomial([8 * l, -12 * l ** 2, 4 * l ** 3])),
        "p14": RationalFactor(
            p0=_power_series([0,
                              -1152 * SQRT6 - 1728 * SQRT3 - 2304 * SQRT2 - 3456,
                              -576 * SQRT6 + 5952 * SQRT3 - 1152 * SQRT2 + 11760,
                              360 * SQRT6 - 1824 * SQRT3 + 720 * SQRT2 - 3396,
                              -108 * SQRT6 - 72 * SQRT3 - 180 * SQRT2 - 144], l),
            p1=144 * (SQRT3 + 2) * six_minus,
            p2=l ** 2 * _power_series([3840 * SQRT6 - 3840 * SQRT3 + 7680 * SQRT2 - 7680,
                                       4192 - 6528 * SQRT6 + 1856 * SQRT3 - 13056 * SQRT2,
                                       11056 + 3424 * SQRT6 + 6368 * SQRT3 + 6864 * SQRT2,
                                       # all four terms share one sign; checked against det(D) over kappa, alpha and ell
                                       -(9348 + 336 * SQRT6 + 5400 * SQRT3 + 624 * SQRT2),
                                       1440 - 180 * SQRT6 + 828 * SQRT3 - 324 * SQRT2], l)),
        "p16": RationalFactor(
            p0=_power_series([0, -576 * SQRT2 - 864, -288 * SQRT2 + 2976, 144 * SQRT2 - 744,
                              -36 * (SQRT2 + 2)], l),
            p1=72 * six_minus,
            p2=l ** 2 * _power_series([1920 * S, -3264 * SQRT2 + 928, 1632 * SQRT2 + 3104,
                                       -24 * SQRT2 - 2412, -144 * SQRT2 + 216, 27], l)),
        "p21": RationalFactor(
            p0=_power_series([0, -14400 * SQRT2 - 25056, -130464 * SQRT2 + 300768, 75024 * SQRT2 - 175272,
                              -468 * SQRT2 - 2664, -1152 * SQRT2 + 2928], l),
            p1=(-1728 * SQRT2 + 4392) * six_minus,
            p2=l ** 2 * _power_series([1920 * (85 * SQRT2 - 109), -417216 * SQRT2 + 464416,
                                       158880 * SQRT2 + 38048, 89448 * SQRT2 - 353228,
                                       -25248 * SQRT2 + 95000, 7707], l)),
    }


FACTORS = {1: factors_1d, 2: factors_2d, 3: factors_3d}


def minors_1d(kappa: float, alpha: float, ell: float) -> List[float]:
    """Trailing principal minors of the 5x5 block: delta_1 = 2 is the bottom-right entry."""
    delta3 = alpha * factors_1d(ell)["q3"](kappa, alpha)
    return [2.0, 4 * (1 - 3 * ell * alpha), delta3, 2 * ell * alpha * delta3, (2 * ell * alpha) ** 2 * delta3]


def minors_2d(kappa: float, alpha: float, ell: float) -> List[float]:
    f = {name: factor(kappa, alpha) for name, factor in factors_2d(ell).items()}
    l, a = ell, alpha
    delta5 = 22 * l ** 3 * a ** 4 * f["q5"]
    delta9 = 8 * l * a ** 4 * f["p8"] * f["p9"]
    return [
        2 * l * a,
        4 * l ** 2 * a ** 2,
        8 * l ** 3 * a ** 3,
        44 * l ** 4 * a ** 4,
        delta5,
        delta5 * f["p6"] / l,
        2 / (11 * l ** 2) * delta5 * f["p7"],
        8 * l * a ** 4 * f["p7"] * f["p8"],
        delta9,
        2 * delta9,
        # 32, not 64: checked against det(D)
        32 * l * a ** 4 * f["p8"] * f["p11"],
    ]


def minors_3d(kappa: float, alpha: float, ell: float) -> List[float]:
    f = {name: factor(kappa, alpha) for name, factor in factors_3d(ell).items()}
    l, a = ell, alpha
    p6, p12 = f["p6"], f["p12"]
    delta8 = 12 * l ** 2 * a ** 5 * p6 ** 2 * f["p8"]
    delta14 = l * a ** 5 * p12 ** 2 * f["p14"] / (9 * (1 + SQRT3) ** 2)
    delta16 = 8 / 9 * (2 + SQRT3) / (1 + SQRT3) ** 2 * l * a ** 5 * p12 ** 2 * f["p16"]
    delta21 = (256 * (SQRT3 + 2) * (24 * SQRT2 + 61) / (23121 * (SQRT3 + 1) ** 2)
               * l * a ** 5 * p12 ** 2 * f["p21"])
    return [
        2 * l * a,
        4 * S * l ** 2 * a ** 2,
        8 * S * l ** 3 * a ** 3,
        16 * S * l ** 4 * a ** 4,
        80 / 3 * S * l ** 5 * a ** 5,
        40 / 3 * S * l ** 4 * a ** 5 * p6,
        20 / 3 * S * l ** 3 * a ** 5 * p6 ** 2,
        delta8,
        2 * delta8,
        4 / 3 * l ** 2 * a ** 5 * p6 ** 2 * f["p10"],
        2 / 9 * l * a ** 5 * p6 ** 2 * f["p11"],
        2 / 9 * l * a ** 5 * p6 * f["p11"] * p12,
        2 / 9 * l * a ** 5 * f["p11"] * p12 ** 2,
        delta14,
        2 * delta14,
        delta16,
        2 * delta16,
        4 * delta16,
        8 * delta16,
        16 * delta16,
        delta21,
    ]


MINORS = {1: minors_1d, 2: minors_2d, 3: minors_3d}
