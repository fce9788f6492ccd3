from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from aws_lambda_powertools import Logger
from scipy import linalg

from chalicelib.modules.errors import EigensolverError, InvalidParameterError

logger = Logger()


@dataclass(frozen=True)
class IndexReport:
    index: Optional[int]
    rank_profile: List[int] = field(default_factory=list)
    kernel_dimension: int = 0
    tolerance: float = 1e-10
    coercivity: Optional[float] = None
    size: int = 0

    @property
    def hypocoercive(self) -> bool:
        return self.index is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau": self.index if self.hypocoercive else "not hypocoercive",
            "rank_profile": self.rank_profile,
            "kernel_dimension": self.kernel_dimension,
            "coercivity": self.coercivity,
            "n": self.size,
            "tol_rank": self.tolerance,
        }


def numerical_rank(matrix: np.ndarray, tol: float) -> int:
    singular_values = linalg.svdvals(matrix)
    if singular_values.size == 0 or singular_values[0] == 0:
        return 0
    return int(np.sum(singular_values > tol * singular_values[0]))


def psd_sqrt(matrix: np.ndarray, tol: float) -> np.ndarray:
    """Square root of a Hermitian PSD matrix; eigenvalues below tol * max are clipped to zero."""
    eigenvalues, vectors = linalg.eigh(matrix)
    scale = max(np.max(np.abs(eigenvalues)), 1.0) if eigenvalues.size else 1.0
    if np.min(eigenvalues, initial=0.0) < -tol * scale:
        raise InvalidParameterError(f"C2 is not positive semi-definite (min eigenvalue {np.min(eigenvalues):.3e}).")
    roots = np.sqrt(np.where(eigenvalues > tol * scale, eigenvalues, 0.0))
    return (vectors * roots) @ vectors.conj().T


def kernel_basis(matrix: np.ndarray, tol: float, scale: float = None) -> np.ndarray:
    """Orthonormal basis of the numerical null space; singular values below tol * scale count as zero.

    scale defaults to the largest singular value of the matrix itself.
    """
    matrix = np.atleast_2d(matrix)
    if matrix.shape[1] == 0:
        return np.zeros((0, 0), dtype=matrix.dtype)
    _, singular_values, vh = linalg.svd(matrix, full_matrices=True)
    reference = scale if scale is not None else (singular_values[0] if singular_values.size else 0.0)
    rank = int(np.sum(singular_values > tol * reference))
    return vh[rank:].conj().T


@dataclass
class HypoIndex:
    rank_tolerance: float = 1e-10

    def hypocoercivity_index(self, C1: np.ndarray, C2: np.ndarray, tol: float = None) -> IndexReport:
        tol = tol or self.rank_tolerance
        C1, C2 = self._validated(C1, C2)
        n = C1.shape[0]
        root = psd_sqrt(C2, tol)
        kernel_dimension = n - numerical_rank(root, tol)

        profile = []
        columns = root
        block = root
        index = None
        for j in range(n):
            if j > 0:
                block = C1 @ block
                columns = np.hstack([columns, block])
            profile.append(numerical_rank(columns, tol))
            if profile[-1] == n:
                index = j
                break
            if j > 0 and profile[-1] == profile[-2]:
                break

        if index is not None and not self._kernel_intersection_trivial(C1, root, index, tol):
            raise EigensolverError(
                f"Kalman rank and kernel-intersection tests disagree at tau={index}; tighten tol_rank={tol}.")

        coercivity = None
        if index is not None:
            coercivity = float(linalg.eigvalsh(self._coercivity_sum(C1, C2, index))[0])
        logger.info(f"Hypocoercivity index of a {n}x{n} pair: tau={index}, rank profile {profile}.")
        return IndexReport(index=index, rank_profile=profile, kernel_dimension=kernel_dimension,
                           tolerance=tol, coercivity=coercivity, size=n)

    def is_hypocoercive_spectral(self, C1: np.ndarray, C2: np.ndarray, tol: float = None) -> bool:
        tol = tol or self.rank_tolerance
        C1, C2 = self._validated(C1, C2)
        try:
            eigenvalues = linalg.eigvals(1j * C1 + C2)
        except linalg.LinAlgError as error:
            raise EigensolverError(f"Eigenvalues of iC1 + C2 did not converge: {error}") from error
        return bool(np.min(eigenvalues.real) > tol)

    def check_invariance_conditions(self, C1: np.ndarray, C2: np.ndarray, tol: float = None) -> Dict[str, bool]:
        """B3: no nontrivial C1-invariant subspace inside ker C2. B4: no eigenvector of C1 in ker C2."""
        tol = tol or self.rank_tolerance
        C1, C2 = self._validated(C1, C2)
        return {"B3": self._invariant_subspace_dimension(C1, C2, tol) == 0,
                "B4": not self._eigenvector_in_kernel(C1, C2, tol)}

    def skew_commutator_condition(self, C1: np.ndarray, C2: np.ndarray, K: np.ndarray) -> bool:
        """Forward check of a caller-supplied skew-Hermitian K: C2 + [K, C1] positive definite."""
        C1, C2 = self._validated(C1, C2)
        if not np.allclose(K, -K.conj().T, atol=self.rank_tolerance):
            raise InvalidParameterError("K must be skew-Hermitian.")
        candidate = C2 + K @ C1 - C1 @ K
        return bool(linalg.eigvalsh((candidate + candidate.conj().T) / 2)[0] > self.rank_tolerance)

    def _kernel_intersection_trivial(self, C1: np.ndarray, root: np.ndarray, index: int, tol: float) -> bool:
        rows = [root]
        for _ in range(index):
            rows.append(rows[-1] @ C1)
        stacked = np.vstack(rows)
        return kernel_basis(stacked, tol).shape[1] == 0

    @staticmethod
    def _coercivity_sum(C1: np.ndarray, C2: np.ndarray, index: int) -> np.ndarray:
        total = np.zeros_like(C2, dtype=complex)
        power = np.eye(C1.shape[0], dtype=complex)
        for _ in range(index + 1):
            total += power @ C2 @ power.conj().T
            power = C1 @ power
        return (total + total.conj().T) / 2

    @staticmethod
    def _invariant_subspace_dimension(C1: np.ndarray, C2: np.ndarray, tol: float) -> int:
        Q = kernel_basis(C2, tol)
        scale = max(np.linalg.norm(C1, 2), 1.0)
        while Q.shape[1] > 0:
            leaving = C1 @ Q - Q @ (Q.conj().T @ C1 @ Q)
            keep = kernel_basis(leaving, tol, scale)
            if keep.shape[1] == Q.shape[1]:
                break
            Q = linalg.orth(Q @ keep) if keep.shape[1] else Q[:, :0]
        return Q.shape[1]

    @staticmethod
    def _eigenvector_in_kernel(C1: np.ndarray, C2: np.ndarray, tol: float) -> bool:
        eigenvalues, vectors = linalg.eigh(C1)
        scale = max(np.max(np.abs(eigenvalues)), 1.0)
        c2_scale = max(np.linalg.norm(C2, 2), 1.0)
        start = 0
        while start < len(eigenvalues):
            stop = start + 1
            while stop < len(eigenvalues) and eigenvalues[stop] - eigenvalues[start] <= 1e3 * tol * scale:
                stop += 1
            image = C2 @ vectors[:, start:stop]
            if kernel_basis(image, tol, c2_scale).shape[1] > 0:
                return True
            start = stop
        return False

    @staticmethod
    def _validated(C1: np.ndarray, C2: np.ndarray):
        C1 = np.asarray(C1, dtype=complex)
        C2 = np.asarray(C2, dtype=complex)
        if C1.ndim != 2 or C1.shape[0] != C1.shape[1] or C1.shape != C2.shape:
            raise InvalidParameterError(f"C1 and C2 must be square of equal size, got {C1.shape} and {C2.shape}.")
        for name, matrix in (("C1", C1), ("C2", C2)):
            if not np.allclose(matrix, matrix.conj().T, atol=1e-12 * max(1.0, np.max(np.abs(matrix)))):
                raise InvalidParameterError(f"{name} must be Hermitian.")
        return C1, C2
