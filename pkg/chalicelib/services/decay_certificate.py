from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from aws_lambda_powertools import Logger
from numpy.polynomial import Polynomial
from scipy import optimize

from chalicelib.modules.errors import InvalidParameterError
from chalicelib.services import minor_tables
from chalicelib.services.hermite_basis import ENERGY, MIN_BLOCK, TENSOR
from chalicelib.services.lyapunov_ansatz import BGK_SPREAD, LyapunovAnsatz, lyapunov_matrix, min_eigenvalue
from chalicelib.services.operator_assembly import OperatorAssembly

logger = Logger()

# lambda_min(D) >= det(D) * ((n - 1) / Tr D)^(n - 1)
TRACE_FACTOR = {2: (10 / 14) ** 10, 3: (20 / 32) ** 20}

PolynomialLike = Union[Polynomial, Sequence[float]]


@dataclass(frozen=True)
class MinorTable:
    d: int
    kappa: float
    alpha: float
    ell: float
    values: List[float] = field(default_factory=list)
    factors: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "kappa": self.kappa, "alpha": self.alpha, "ell": self.ell,
                "delta": self.values, "p": self.factors}


@dataclass(frozen=True)
class DecayCertificate:
    d: int
    L: float
    ell: float
    alpha_plus: float
    alpha_star: float
    mu: float
    lam: float
    c_d: float
    C_d: float
    verification: List[Tuple[float, float]] = field(default_factory=list)
    thresholds: Dict[str, float] = field(default_factory=dict)
    offending_kappa: Optional[float] = None

    @property
    def valid(self) -> bool:
        return self.offending_kappa is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d, "L": self.L, "ell": self.ell,
            "alpha_plus": self.alpha_plus, "alpha_star": self.alpha_star,
            "mu": self.mu, "lambda": self.lam, "c_d": self.c_d, "C_d": self.C_d,
            "thresholds": self.thresholds,
            "verified": [{"kappa": kappa, "min_eig": value} for kappa, value in self.verification],
            "valid": self.valid,
            "offending_kappa": self.offending_kappa,
        }


def alpha3_1d(L: float) -> float:
    """Smaller root of delta_3(1, alpha) in 1D, (1 + 8l^2 - sqrt(1 + 16l^2)) / (24 l^3) in stable form."""
    if L <= 0:
        raise InvalidParameterError(f"Torus length must be positive, got {L}.")
    ell = 2 * np.pi / L
    return float(8 * ell / (3 * (1 + 8 * ell ** 2 + np.sqrt(1 + 16 * ell ** 2))))


def first_positive_root(function, upper: float, points: int = 2000) -> Optional[float]:
    """First alpha in (0, upper] where a function positive near zero stops being positive."""
    grid = np.linspace(0.0, upper, points + 1)
    previous = grid[0]
    for alpha in grid[1:]:
        if function(alpha) <= 0:
            if function(previous) <= 0:
                return float(previous)
            return float(optimize.brentq(function, previous, alpha, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                         maxiter=200))
        previous = alpha
    return None


def _as_polynomial(value: PolynomialLike) -> Polynomial:
    return value if isinstance(value, Polynomial) else Polynomial(list(value))


@dataclass
class DecayCertifier:
    operator_assembly: OperatorAssembly
    lyapunov_ansatz: LyapunovAnsatz
    verification_moduli: int = 50
    maximizer_tolerance: float = 1e-12
    scan_points: int = 400
    inequality_tolerance: float = 1e-9

    def minors_1d(self, kappa: float, alpha: float, ell: float) -> List[float]:
        return minor_tables.minors_1d(kappa, alpha, ell)

    def minors_2d(self, kappa: float, alpha: float, ell: float) -> List[float]:
        return minor_tables.minors_2d(kappa, alpha, ell)

    def minors_3d(self, kappa: float, alpha: float, ell: float) -> List[float]:
        return minor_tables.minors_3d(kappa, alpha, ell)

    def minor_table(self, d: int, kappa: float, alpha: float, ell: float) -> MinorTable:
        self._check(d, kappa, alpha, ell)
        factors = {name: factor(kappa, alpha) for name, factor in minor_tables.FACTORS[d](ell).items()}
        return MinorTable(d=d, kappa=kappa, alpha=alpha, ell=ell,
                          values=minor_tables.MINORS[d](kappa, alpha, ell), factors=factors)

    def assemble_D_block(self, d: int, kappa: float, alpha: float, ell: float) -> np.ndarray:
        """Leading J x J block of C*P + PC; the rest of that matrix is 2I."""
        self._check(d, kappa, alpha, ell)
        J = MIN_BLOCK[d]
        pair = self.operator_assembly.operator_pair(d, ENERGY if d > 1 else TENSOR, J, 2 * np.pi / ell)
        C = self.operator_assembly.modal_generator(pair, kappa).C
        P = self.lyapunov_ansatz.bgk_P(d, kappa, alpha, N=J)
        return lyapunov_matrix(C, P)

    @staticmethod
    def determinant_minors(D: np.ndarray, trailing: bool = False) -> List[float]:
        size = D.shape[0]
        blocks = [D[size - j:, size - j:] if trailing else D[:j, :j] for j in range(1, size + 1)]
        return [float(np.real(np.linalg.det(block))) for block in blocks]

    def alpha3_1d(self, L: float) -> float:
        return alpha3_1d(L)

    def mu_objective(self, d: int, alpha: float, ell: float) -> float:
        spread = BGK_SPREAD[d]
        if d == 1:
            delta3 = minor_tables.minors_1d(1.0, alpha, ell)[2]
            # below alpha_3 this stays under the 2 ell alpha eigenvalue of the leading block
            return delta3 / (4 * (1 - ell * alpha) ** 2) / (2 * (1 + spread * alpha))
        delta = minor_tables.MINORS[d](1.0, alpha, ell)[-1]
        return TRACE_FACTOR[d] * delta / (2 * (1 + spread * alpha))

    def alpha_plus(self, d: int, L: float) -> Tuple[float, Dict[str, float]]:
        """Positivity threshold of the minor chain, uniform in kappa, and the per-factor thresholds."""
        ell = 2 * np.pi / L
        bound = 1 / BGK_SPREAD[d]
        thresholds = {"P": float(bound)}
        if d == 1:
            thresholds["alpha3"] = alpha3_1d(L)
        else:
            for name, factor in minor_tables.FACTORS[d](ell).items():
                root = first_positive_root(factor.at_unit_mode(), bound)
                if root is not None:
                    thresholds[f"alpha_{name}"] = root
                if factor.p0.degree() > 0 or factor.p1.degree() > 0:
                    thresholds[f"alpha_tilde_{name}"] = self.lemma_threshold(factor.p0, factor.p1, bound)
        return min(thresholds.values()), thresholds

    def lemma_threshold(self, p0: PolynomialLike, p1: PolynomialLike, upper: float) -> float:
        """Largest alpha_bar <= upper with p1 >= 0 and p0 + 2 p1 <= 0 on [0, alpha_bar]."""
        p0, p1 = _as_polynomial(p0), _as_polynomial(p1)
        candidates = [upper]
        for function in (p1, -(p0 + 2 * p1)):
            root = first_positive_root(lambda alpha, f=function: f(alpha) + 1e-300, upper)
            if root is not None:
                candidates.append(root)
        return float(min(candidates))

    def rational_monotone_check(self, p0: PolynomialLike, p1: PolynomialLike, p2: PolynomialLike,
                                alpha_bar: float, tol: float = 1e-12) -> bool:
        """p(1, alpha) <= p(kappa, alpha) for kappa >= 1 on [0, alpha_bar], via the sign conditions."""
        p0, p1 = _as_polynomial(p0), _as_polynomial(p1)
        combined = p0 + 2 * p1
        points = list(np.linspace(0.0, alpha_bar, 2001))
        for polynomial in (p1, combined):
            derivative = polynomial.deriv()
            if derivative.degree() > 0:
                points += [float(np.real(root)) for root in derivative.roots()
                           if abs(np.imag(root)) < 1e-12 and 0 <= np.real(root) <= alpha_bar]
        points = np.array(points)
        scale = 1.0 + max(np.max(np.abs(p0.coef)), np.max(np.abs(p1.coef)))
        return bool(np.all(p1(points) >= -tol * scale) and np.all(combined(points) <= tol * scale))

    def certify(self, d: int, L: float) -> DecayCertificate:
        if d not in MIN_BLOCK or L <= 0:
            raise InvalidParameterError(f"Cannot certify d={d}, L={L}.")
        ell = 2 * np.pi / L
        alpha_plus, thresholds = self.alpha_plus(d, L)
        alpha_star, mu = self._maximize(d, ell, alpha_plus)
        spread = BGK_SPREAD[d]
        c_d, C_d = 1 / (1 + spread * alpha_star), 1 / (1 - spread * alpha_star)
        verification, offending = self._verify(d, L, alpha_star, mu)
        certificate = DecayCertificate(d=d, L=L, ell=ell, alpha_plus=alpha_plus, alpha_star=alpha_star, mu=mu,
                                       lam=2 * min(1.0, mu), c_d=c_d, C_d=C_d, verification=verification,
                                       thresholds=thresholds, offending_kappa=offending)
        logger.info(f"Certificate for d={d}, L={L}: alpha_plus={alpha_plus:.12g}, alpha_star={alpha_star:.12g}, "
                    f"mu={mu:.12g}.")
        if offending is not None:
            logger.warning(f"Certificate for d={d}, L={L} fails the matrix inequality at kappa={offending}.")
        return certificate

    def mu_limits_1d(self, L: float = 1e-3) -> Dict[str, float]:
        root = np.sqrt(13.0)
        certificate = self.certify(1, L)
        return {
            "mu_limit": float(3 * (4 - root) * (3 - root) ** 2 / (1 - root) ** 2),
            "alpha_ratio_limit": float((4 - root) / (6 * np.pi)),
            "L": L,
            "mu_numeric": certificate.mu,
            "alpha_ratio_numeric": certificate.alpha_star / L,
        }

    def _maximize(self, d: int, ell: float, alpha_plus: float) -> Tuple[float, float]:
        grid = alpha_plus * np.arange(1, self.scan_points + 1) / (self.scan_points + 1)
        values = np.array([self.mu_objective(d, alpha, ell) for alpha in grid])
        best = int(np.argmax(values))
        low = grid[best - 1] if best > 0 else 0.0
        high = grid[best + 1] if best + 1 < len(grid) else alpha_plus
        result = optimize.minimize_scalar(lambda alpha: -self.mu_objective(d, alpha, ell), bounds=(low, high),
                                          method="bounded", options={"xatol": self.maximizer_tolerance})
        if -result.fun >= values[best]:
            return float(result.x), float(-result.fun)
        return float(grid[best]), float(values[best])

    def _verify(self, d: int, L: float, alpha: float, mu: float) -> Tuple[List[Tuple[float, float]], Optional[float]]:
        J = MIN_BLOCK[d]
        pair = self.operator_assembly.operator_pair(d, ENERGY if d > 1 else TENSOR, J, L)
        moduli = self.operator_assembly.first_moduli(d, self.verification_moduli).moduli
        report, offending = [], None
        for kappa in moduli:
            C = self.operator_assembly.modal_generator(pair, kappa).C
            P = self.lyapunov_ansatz.bgk_P(d, kappa, alpha, N=J)
            value = min_eigenvalue(lyapunov_matrix(C, P) - 2 * mu * P)
            report.append((kappa, value))
            if offending is None and value < -self.inequality_tolerance:
                offending = kappa
        return report, offending

    @staticmethod
    def _check(d: int, kappa: float, alpha: float, ell: float):
        if d not in MIN_BLOCK or kappa < 1 or alpha < 0 or ell <= 0:
            raise InvalidParameterError(f"Invalid minor request d={d}, kappa={kappa}, alpha={alpha}, ell={ell}.")
