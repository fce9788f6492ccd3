from dataclasses import dataclass, field
from itertools import permutations
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from aws_lambda_powertools import Logger
from scipy import linalg, optimize

from chalicelib.modules.errors import (
    AnsatzConstructionError, DefectiveSpectrumError, HypocoercivityConditionError, InvalidParameterError,
    VerificationError)
from chalicelib.modules.matrix_io import matrix_to_json
from chalicelib.services.hypo_index import kernel_basis, numerical_rank

logger = Logger()

DIMKER1 = "dimker1"
CASE_2A = "case2A"
CASE_2B1 = "case2B1"
CASE_2B2 = "case2B2"
CHAIN3 = "chain3"

# (row, column, multiple of alpha) of the upper off-diagonal entries -i*theta/kappa
BGK_PATTERNS = {
    1: (((0, 1), 1.0), ((1, 2), np.sqrt(2.0)), ((2, 3), np.sqrt(3.0))),
    2: (((0, 1), 1.0), ((1, 5), 2.0), ((2, 4), 1.0), ((3, 6), np.sqrt(6.0))),
    3: (((0, 1), 1.0), ((1, 7), np.sqrt(3.0)), ((2, 5), 1.0), ((3, 6), 1.0), ((4, 10), 1.0)),
}
BGK_PARAMETER_NAMES = {
    1: ("alpha", "beta", "gamma"),
    2: ("alpha", "beta", "gamma", "omega"),
    3: ("alpha", "beta", "gamma", "omega", "eta"),
}
BGK_BLOCK = {1: 4, 2: 7, 3: 11}
# largest eigenvalue of P_kappa is at most 1 + spread * alpha
BGK_SPREAD = {1: np.sqrt(3 + np.sqrt(6.0)), 2: np.sqrt(6.0), 3: 2.0}

TARGET_NORM = 0.9


@dataclass(frozen=True)
class PAnsatz:
    pattern: str
    P: np.ndarray
    parameters: Dict[str, complex] = field(default_factory=dict)
    U: Optional[np.ndarray] = None
    scale: float = 1.0
    slopes: List[float] = field(default_factory=list)
    rate: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pattern": self.pattern,
            "parameters": {name: [float(np.real(value)), float(np.imag(value))]
                           for name, value in self.parameters.items()},
            "scale": self.scale,
            "kato_slopes": self.slopes,
            "rate": self.rate,
            "P": matrix_to_json(self.P),
            "U": matrix_to_json(self.U) if self.U is not None else None,
        }


def lyapunov_matrix(C: np.ndarray, P: np.ndarray) -> np.ndarray:
    Q = C.conj().T @ P + P @ C
    return (Q + Q.conj().T) / 2


def min_eigenvalue(matrix: np.ndarray) -> float:
    return float(linalg.eigvalsh((matrix + matrix.conj().T) / 2)[0])


def lyapunov_rate(C: np.ndarray, P: np.ndarray) -> float:
    """Largest mu with C*P + PC >= 2 mu P."""
    return float(linalg.eigh(lyapunov_matrix(C, P), (P + P.conj().T) / 2, eigvals_only=True)[0]) / 2


def chain3_minors(c12: complex, c23: complex, c34: complex,
                  lambda1: complex, lambda2: complex, lambda3: complex) -> Dict[str, float]:
    """Leading minors of R*(C*A + AC)R for the three-chain ansatz with c11 = c22 = c33."""
    first = np.imag(c12 * np.conj(lambda1))
    second = np.imag(c23 * np.conj(lambda2))
    third = np.imag(c34 * np.conj(lambda3))
    coupling = abs(c23 * lambda1 - c12 * lambda2) ** 2
    middle = 2 * (second - first)
    determinant = middle * (4 * first * (third - second) - coupling)
    return {
        "minor1": float(2 * first),
        "minor2": float(2 * first * middle),
        "det": float(determinant),
        "ordered": bool(0 < first < second < third),
    }


def _phase(entry: complex) -> complex:
    return np.exp(1j * (np.angle(entry) - np.pi / 2))


def _reordered(matrix: np.ndarray, order: Sequence[int]) -> np.ndarray:
    return matrix[np.ix_(order, order)]


@dataclass
class LyapunovAnsatz:
    rank_tolerance: float = 1e-10
    bisection_steps: int = 40
    defect_threshold: float = 1e8
    inequality_tolerance: float = 1e-9

    def optimal_P(self, C: np.ndarray, weights: Sequence[float] = None) -> np.ndarray:
        """P = sum_j b_j u_j u_j^* over the left eigenvectors u_j^* C = lambda_j u_j^*."""
        C = np.asarray(C, dtype=complex)
        n = C.shape[0]
        weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
        if weights.shape != (n,) or np.any(weights <= 0):
            raise InvalidParameterError(f"Expected {n} positive weights.")
        if np.allclose(C, C.conj().T, atol=1e-14 * max(1.0, np.max(np.abs(C)))):
            eigenvalues, left = linalg.eigh(C)
        else:
            eigenvalues, left, right = linalg.eig(C, left=True, right=True)
            condition = np.linalg.cond(right)
            if condition > self.defect_threshold:
                raise DefectiveSpectrumError(condition, self.defect_threshold)
        P = (left * weights) @ left.conj().T
        P = (P + P.conj().T) / 2
        mu = float(np.min(np.real(eigenvalues)))
        residual = min_eigenvalue(lyapunov_matrix(C, P) - 2 * mu * P)
        if residual < -self.inequality_tolerance * max(1.0, np.linalg.norm(P, 2)):
            raise VerificationError(kappa=float("nan"), min_eig=residual)
        logger.info(f"Eigenvector-based P for a {n}x{n} generator with mu={mu:.6g}.")
        return P

    def kato_slopes(self, C1: np.ndarray, C2: np.ndarray, A: np.ndarray) -> List[float]:
        R = kernel_basis(C2, self.rank_tolerance)
        C = 1j * np.asarray(C1) + np.asarray(C2)
        first_order = R.conj().T @ (C.conj().T @ A + A @ C) @ R
        return [float(value) for value in linalg.eigvalsh((first_order + first_order.conj().T) / 2)]

    def ansatz_dimker1(self, C1: np.ndarray, C2: np.ndarray) -> PAnsatz:
        basis, C1c, dissipation = self._canonical(C1, C2, expected_kernel=1)
        scale = max(np.max(np.abs(C1c)), 1.0)
        j0 = 1 + int(np.argmax(np.abs(C1c[1:, 0])))
        if abs(C1c[j0, 0]) <= self.rank_tolerance * scale:
            raise AnsatzConstructionError("The kernel of C2 is not coupled to any decaying mode.", condition="B3")
        order = [0, j0] + [j for j in range(1, len(dissipation)) if j != j0]
        C1q = _reordered(C1c, order)
        lam = _phase(C1q[0, 1])
        local = np.zeros_like(C1q)
        local[0, 1], local[1, 0] = lam, np.conj(lam)
        Q = basis[:, order]
        ansatz = self._certify(DIMKER1, C1, C2, Q @ local @ Q.conj().T, {"lambda": lam})
        logger.info(f"dimker1 ansatz certified with scale r={ansatz.scale:.6g}.")
        return ansatz

    def ansatz_dimker2(self, C1: np.ndarray, C2: np.ndarray) -> PAnsatz:
        basis, C1c, dissipation = self._canonical(C1, C2, expected_kernel=2)
        n = len(dissipation)
        upper_right = C1c[:2, 2:]
        rank = numerical_rank(upper_right, self.rank_tolerance) if n > 2 else 0
        if rank == 0:
            raise AnsatzConstructionError("ker C2 is invariant under C1; the pair is not hypocoercive.",
                                          condition="B3")
        if rank == 2:
            return self._case_2a(C1, C2, basis, C1c)
        return self._case_2b(C1, C2, basis, C1c)

    def case_2b_rotation(self, C1: np.ndarray) -> np.ndarray:
        """Unitary U = diag(U_ul, I) that maps a rank-one case-2B C1 (kernel first) to the 2B1 form."""
        C1 = np.asarray(C1, dtype=complex)
        c13, c23 = C1[0, 2], C1[1, 2]
        norm = np.sqrt(abs(c13) ** 2 + abs(c23) ** 2)
        if norm == 0:
            raise AnsatzConstructionError("c13 and c23 both vanish.", condition="2B")
        U = np.eye(C1.shape[0], dtype=complex)
        U[:2, :2] = np.array([[np.conj(c23), c13], [-np.conj(c13), c23]]) / norm
        return U

    def ansatz_chain3(self, C1: np.ndarray, C2: np.ndarray) -> PAnsatz:
        C1 = np.asarray(C1, dtype=complex)
        C2 = np.asarray(C2, dtype=complex)
        scale = max(np.max(np.abs(C1)), np.max(np.abs(C2)), 1.0)
        tol = self.rank_tolerance * scale
        if np.max(np.abs(C2 - np.diag(np.diag(C2)))) > tol:
            raise AnsatzConstructionError("The three-chain ansatz needs a diagonal C2.", condition="chain3")
        diagonal = np.real(np.diag(C2))
        zeros = [j for j, value in enumerate(diagonal) if value <= tol]
        if len(zeros) != 3:
            raise AnsatzConstructionError(f"dim ker C2 = {len(zeros)}, expected 3.", condition="chain3")
        rest = [j for j in range(len(diagonal)) if j not in zeros]
        if not rest:
            raise AnsatzConstructionError("No decaying mode to end the chain.", condition="chain3")
        C1z = _reordered(C1, zeros + rest)
        j4 = 3 + int(np.argmax(np.abs(C1z[2, 3:])))
        order = zeros + [rest[j4 - 3]] + [j for j in rest if j != rest[j4 - 3]]
        C1q = _reordered(C1, order)
        c12, c23, c34 = C1q[0, 1], C1q[1, 2], C1q[2, 3]
        chain = (abs(C1q[0, 2]) <= tol and np.all(np.abs(C1q[:2, 3:]) <= tol)
                 and min(abs(c12), abs(c23), abs(c34)) > tol
                 and abs(C1q[0, 0] - C1q[1, 1]) <= tol and abs(C1q[1, 1] - C1q[2, 2]) <= tol)
        if not chain:
            raise AnsatzConstructionError("C1 does not have the three-chain structure.", condition="chain3")

        first, second = 1.0, 2.0
        lambda1 = first / abs(c12) * _phase(c12)
        lambda2 = second / abs(c23) * _phase(c23)
        coupling = abs(c23 * lambda1 - c12 * lambda2) ** 2
        third = second + coupling / (4 * first) + (second - first)
        lambda3 = third / abs(c34) * _phase(c34)
        minors = chain3_minors(c12, c23, c34, lambda1, lambda2, lambda3)
        if not (minors["ordered"] and minors["det"] > 0):
            raise AnsatzConstructionError(f"Chain parameters fail the minor test: {minors}.", condition="chain3")

        local = np.zeros_like(C1q)
        for (row, column), value in zip(((0, 1), (1, 2), (2, 3)), (lambda1, lambda2, lambda3)):
            local[row, column], local[column, row] = value, np.conj(value)
        Q = np.eye(len(order))[:, order]
        ansatz = self._certify(CHAIN3, C1, C2, Q @ local @ Q.conj().T,
                               {"lambda1": lambda1, "lambda2": lambda2, "lambda3": lambda3})
        logger.info(f"Three-chain ansatz certified with scale r={ansatz.scale:.6g}.")
        return ansatz

    def bgk_P(self, d: int, kappa: float, alpha: float, N: int = None,
              parameters: Dict[str, float] = None) -> np.ndarray:
        """P_kappa of the BGK families: identity plus -i*theta/kappa couplings in the leading block."""
        if d not in BGK_PATTERNS:
            raise InvalidParameterError(f"Dimension must be 1, 2 or 3, got {d}.")
        if kappa < 1 or alpha < 0:
            raise InvalidParameterError(f"Need kappa >= 1 and alpha >= 0, got kappa={kappa}, alpha={alpha}.")
        N = N or BGK_BLOCK[d]
        if N < BGK_BLOCK[d]:
            raise InvalidParameterError(f"P_kappa needs N >= {BGK_BLOCK[d]} for d={d}.")
        values = dict(zip(BGK_PARAMETER_NAMES[d], (multiple * alpha for _, multiple in BGK_PATTERNS[d])))
        values.update(parameters or {})
        P = np.eye(N, dtype=complex)
        for ((row, column), _), name in zip(BGK_PATTERNS[d], BGK_PARAMETER_NAMES[d]):
            P[row, column] = -1j * values[name] / kappa
            P[column, row] = 1j * values[name] / kappa
        if parameters is None and BGK_SPREAD[d] * alpha / kappa >= 1:
            logger.warning(f"alpha={alpha} leaves P_kappa indefinite for d={d}, kappa={kappa}.")
        return P

    def bgk_alpha_bound(self, d: int) -> float:
        return float(1 / BGK_SPREAD[d])

    def _case_2a(self, C1, C2, basis, C1c) -> PAnsatz:
        n = C1c.shape[0]
        best = max(permutations(range(2, n), 2),
                   key=lambda pair: abs(C1c[0, pair[1]] * C1c[1, pair[0]] - C1c[0, pair[0]] * C1c[1, pair[1]]))
        j3, j4 = best
        if abs(C1c[0, j4] * C1c[1, j3]) < abs(C1c[0, j3] * C1c[1, j4]):
            j3, j4 = j4, j3
        order = [0, 1, j3, j4] + [j for j in range(2, n) if j not in (j3, j4)]
        C1q = _reordered(C1c, order)
        c13, c14, c23, c24 = C1q[0, 2], C1q[0, 3], C1q[1, 2], C1q[1, 3]
        Q = basis[:, order]

        for ell1, ell2 in self._case_2a_weights(c13, c14, c23, c24):
            lambda1, lambda2 = -1j * ell1 * c14, -1j * ell2 * c23
            local = np.zeros_like(C1q)
            local[0, 3], local[3, 0] = lambda1, np.conj(lambda1)
            local[1, 2], local[2, 1] = lambda2, np.conj(lambda2)
            A = Q @ local @ Q.conj().T
            if min(self.kato_slopes(C1, C2, A)) > 0:
                ansatz = self._certify(CASE_2A, C1, C2, A, {"lambda1": lambda1, "lambda2": lambda2,
                                                            "ell1": ell1, "ell2": ell2})
                logger.info(f"Case 2A ansatz certified with scale r={ansatz.scale:.6g}.")
                return ansatz
        raise AnsatzConstructionError("No case 2A parameters make the Kato matrix positive.", condition="2A")

    @staticmethod
    def _case_2a_weights(c13, c14, c23, c24) -> List[Tuple[float, float]]:
        candidates = []
        if abs(c13 * c23) > 0 and abs(c14 * c24) > 0:
            candidates.append((float(abs(c13 * c23)), float(abs(c14 * c24))))
        # maximizer of the Kato determinant in ell2 / ell1
        a = abs(c14 * c23) ** 2
        p, q = c14 * np.conj(c24), c13 * np.conj(c23)
        if abs(q) > 0:
            ratio = (2 * a - np.real(p * np.conj(q))) / abs(q) ** 2
        else:
            ratio = (abs(p) ** 2 + a) / (2 * a)
        if ratio > 0:
            candidates.append((1.0, float(ratio)))
        return candidates

    def _case_2b(self, C1, C2, basis, C1c) -> PAnsatz:
        n = C1c.shape[0]
        scale = max(np.max(np.abs(C1c)), 1.0)
        j = 2 + int(np.argmax(np.linalg.norm(C1c[:2, 2:], axis=0)))
        rows = [0, 1] if abs(C1c[1, j]) >= abs(C1c[0, j]) else [1, 0]
        order = rows + [j] + [k for k in range(2, n) if k != j]
        C1q = _reordered(C1c, order)
        c11, c12, c13 = C1q[0, 0], C1q[0, 1], C1q[0, 2]
        c21, c22, c23 = C1q[1, 0], C1q[1, 1], C1q[1, 2]
        condition = c13 * c23 * (c11 - c22) - c13 ** 2 * c21 + c23 ** 2 * c12
        if abs(condition) <= self.rank_tolerance * scale ** 3:
            raise HypocoercivityConditionError(
                "c13*c23*(c11-c22) - c13^2*c21 + c23^2*c12 vanishes; the pair is not hypocoercive.",
                condition="2B")

        if abs(c13) <= self.rank_tolerance * scale:
            pattern, U = CASE_2B1, np.eye(n, dtype=complex)
        else:
            pattern, U = CASE_2B2, self.case_2b_rotation(C1q)
        C1t = U.conj().T @ C1q @ U
        c12t, c23t = C1t[0, 1], C1t[1, 2]
        if abs(c12t) <= self.rank_tolerance * scale:
            raise HypocoercivityConditionError("The rotated coupling c12 vanishes.", condition="2B")
        Q = basis[:, order] @ U
        lambda2 = _phase(c23t)
        base1 = abs(c23t) / (2 * abs(c12t)) * _phase(c12t)

        def skew_part(s: float) -> np.ndarray:
            local = np.zeros_like(C1t)
            local[0, 1], local[1, 0] = s * base1, np.conj(s * base1)
            local[1, 2], local[2, 1] = lambda2, np.conj(lambda2)
            return Q @ local @ Q.conj().T

        s = self._largest_admissible(lambda t: min(self.kato_slopes(C1, C2, skew_part(t))) > 0)
        if s == 0.0:
            raise AnsatzConstructionError("Kato minors stay nonpositive for every lambda1.", condition="2B")
        if s < 1.0:
            best = optimize.minimize_scalar(lambda t: -min(self.kato_slopes(C1, C2, skew_part(t))),
                                            bounds=(s / 1000, s), method="bounded")
            if min(self.kato_slopes(C1, C2, skew_part(float(best.x)))) > 0:
                s = float(best.x)
        ansatz = self._certify(pattern, C1, C2, skew_part(s), {"lambda1": s * base1, "lambda2": lambda2}, U=U)
        logger.info(f"{pattern} ansatz certified with scale r={ansatz.scale:.6g}.")
        return ansatz

    def _canonical(self, C1, C2, expected_kernel: int):
        """Unitary eigenbasis of C2 with the kernel first, and C1 expressed in it."""
        C1 = np.asarray(C1, dtype=complex)
        C2 = np.asarray(C2, dtype=complex)
        eigenvalues, basis = linalg.eigh(C2)
        # fix the phase of each eigenvector: its largest component is real positive
        pivots = basis[np.argmax(np.abs(basis), axis=0), np.arange(basis.shape[1])]
        basis = basis * (np.conj(pivots) / np.abs(pivots))
        tol = self.rank_tolerance * max(np.max(np.abs(eigenvalues)), 1.0)
        kernel = int(np.sum(eigenvalues <= tol))
        if kernel != expected_kernel:
            raise InvalidParameterError(f"dim ker C2 = {kernel}, expected {expected_kernel}.")
        return basis, basis.conj().T @ C1 @ basis, np.where(eigenvalues <= tol, 0.0, eigenvalues)

    def _largest_admissible(self, admissible: Callable[[float], bool]) -> float:
        if admissible(1.0):
            return 1.0
        low, high = 0.0, 1.0
        for _ in range(self.bisection_steps):
            middle = (low + high) / 2
            if admissible(middle):
                low = middle
            else:
                high = middle
        return low

    def _certify(self, pattern: str, C1, C2, A: np.ndarray, parameters: Dict[str, complex],
                 U: np.ndarray = None) -> PAnsatz:
        A = (A + A.conj().T) / 2
        normalization = TARGET_NORM / np.linalg.norm(A, 2)
        A = A * normalization
        C = 1j * np.asarray(C1, dtype=complex) + np.asarray(C2, dtype=complex)
        identity = np.eye(C.shape[0])

        def admissible(r: float) -> bool:
            P = identity + r * A
            return min_eigenvalue(P) > 0 and min_eigenvalue(lyapunov_matrix(C, P)) > 0

        r = self._largest_admissible(admissible)
        if r == 0.0:
            raise AnsatzConstructionError(f"No positive scale certifies the {pattern} ansatz.", condition=pattern)
        if r < 1.0:
            # C*P + PC is singular at the admissible edge; take the best rate inside
            best = optimize.minimize_scalar(lambda s: -lyapunov_rate(C, identity + s * A), bounds=(r / 1000, r),
                                            method="bounded")
            if admissible(float(best.x)):
                r = float(best.x)
            logger.warning(f"{pattern} ansatz shrunk to r={r:.6g} for positivity.")
        P = identity + r * A
        factor = r * normalization
        return PAnsatz(pattern=pattern, P=P,
                       parameters={name: value * factor if name.startswith("lambda") else value
                                   for name, value in parameters.items()},
                       U=U, scale=r, slopes=self.kato_slopes(C1, C2, r * A), rate=lyapunov_rate(C, P))
