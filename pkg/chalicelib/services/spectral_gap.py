from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np
from aws_lambda_powertools import Logger
from scipy import linalg

from chalicelib.modules.errors import EigensolverError, InvalidParameterError
from chalicelib.modules.matrix_io import to_csv
from chalicelib.services.hermite_basis import MIN_BLOCK, TENSOR
from chalicelib.services.operator_assembly import BGK, MAX_TRUNCATION, OperatorAssembly

logger = Logger()

SAMPLED_PAIRS = 10
TRUNCATION_SIZES = (25, 50, 100, 200, 400, 500)


@dataclass(frozen=True)
class GapEntry:
    kappa: float
    N: int
    gap: float


@dataclass(frozen=True)
class GapReport:
    d: int
    L: float
    entries: List[GapEntry] = field(default_factory=list)

    @property
    def gap(self) -> float:
        return min(entry.gap for entry in self.entries)

    @property
    def argmin_kappa(self) -> float:
        return min(self.entries, key=lambda entry: entry.gap).kappa

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d, "L": self.L, "gap": self.gap, "argmin_kappa": self.argmin_kappa,
            "entries": [{"kappa": entry.kappa, "N": entry.N, "gap": entry.gap} for entry in self.entries],
        }

    def to_csv(self) -> str:
        return to_csv(("kappa", "N", "gap"), ((entry.kappa, entry.N, entry.gap) for entry in self.entries))


@dataclass(frozen=True)
class TruncationStudy:
    kappa: float
    sizes: List[int]
    gaps: List[float]

    @property
    def differences(self) -> List[float]:
        return [float(abs(b - a)) for a, b in zip(self.gaps, self.gaps[1:])]

    @property
    def monotone(self) -> bool:
        return all(b >= a - 1e-12 for a, b in zip(self.gaps, self.gaps[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {"kappa": self.kappa, "N": self.sizes, "gap": self.gaps,
                "cauchy_differences": self.differences, "monotone": self.monotone}


@dataclass(frozen=True)
class UniformBoundProfile:
    kappas: List[float]
    gaps: List[float]

    @property
    def scaled(self) -> List[float]:
        return [gap * (1 + kappa ** 2) / kappa ** 2 for kappa, gap in zip(self.kappas, self.gaps)]

    @property
    def lower_bound(self) -> float:
        return min(self.scaled)

    def to_dict(self) -> Dict[str, Any]:
        return {"kappa": self.kappas, "gap": self.gaps, "scaled_gap": self.scaled, "lower_bound": self.lower_bound}


@dataclass
class SpectralGap:
    operator_assembly: OperatorAssembly
    residual_tolerance: float = 1e-8

    def complex_eigenvalues(self, M: np.ndarray, tol: float = None) -> np.ndarray:
        """All eigenvalues of a dense complex matrix (LAPACK balancing, Hessenberg and shifted QR).

        Backward errors ||Mv - lambda v|| / ||M|| are recomputed for a spread sample of eigenpairs.
        """
        tol = tol or self.residual_tolerance
        M = np.asarray(M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] > MAX_TRUNCATION:
            raise InvalidParameterError(f"Expected a square matrix of size at most {MAX_TRUNCATION}, got {M.shape}.")
        if not np.all(np.isfinite(M)):
            raise InvalidParameterError("Matrix has non-finite entries.")
        try:
            eigenvalues, vectors = linalg.eig(M)
        except linalg.LinAlgError as error:
            raise EigensolverError(f"QR iteration did not converge for a {M.shape[0]}x{M.shape[0]} matrix: {error}")

        scale = np.linalg.norm(M, 2) if M.size else 0.0
        samples = np.unique(np.linspace(0, len(eigenvalues) - 1, min(SAMPLED_PAIRS, len(eigenvalues))).astype(int))
        for j in samples:
            vector = vectors[:, j]
            residual = np.linalg.norm(M @ vector - eigenvalues[j] * vector) / np.linalg.norm(vector)
            if scale > 0 and residual / scale > tol:
                raise EigensolverError(f"Eigenpair {j} has backward error {residual / scale:.3e} > {tol:.1e}.",
                                       partial=eigenvalues)
        return eigenvalues

    def spectral_gap(self, d: int, L: float, kappas: Sequence[float], N: int,
                     variant: str = TENSOR, relaxation: str = BGK) -> GapReport:
        if N < MIN_BLOCK.get(d, 1):
            raise InvalidParameterError(f"Truncation N={N} is below the minimum block {MIN_BLOCK.get(d)} for d={d}.")
        if not kappas:
            raise InvalidParameterError("At least one mode modulus is needed.")
        pair = self.operator_assembly.operator_pair(d, variant, N, L, relaxation)
        entries = []
        for kappa in kappas:
            if kappa == 0:
                # the spatial mean decays like exp(-t) once the conserved moments vanish
                entries.append(GapEntry(kappa=0.0, N=N, gap=1.0))
                continue
            C = self.operator_assembly.modal_generator(pair, kappa).C
            gap = float(np.min(self.complex_eigenvalues(C).real))
            if gap < -1e-9:
                logger.warning(f"Generator for kappa={kappa} has an eigenvalue with real part {gap:.3e}.")
            entries.append(GapEntry(kappa=float(kappa), N=N, gap=gap))
        report = GapReport(d=d, L=L, entries=entries)
        logger.info(f"Spectral gap for d={d}, L={L}, N={N}: {report.gap:.9g} at kappa={report.argmin_kappa}.")
        return report

    def truncation_study(self, d: int, L: float, kappa: float,
                         sizes: Sequence[int] = TRUNCATION_SIZES) -> TruncationStudy:
        gaps = [self.spectral_gap(d, L, [kappa], N).gap for N in sizes]
        study = TruncationStudy(kappa=float(kappa), sizes=list(sizes), gaps=gaps)
        if not study.monotone:
            logger.warning(f"Gap for d={d}, kappa={kappa} is not monotone in N: {gaps}.")
        return study

    def uniform_bound_profile(self, d: int, L: float, kappas: Sequence[float], N: int) -> UniformBoundProfile:
        """Gaps rescaled by (1 + kappa^2) / kappa^2, whose minimum bounds the gap uniformly in kappa."""
        if any(kappa <= 0 for kappa in kappas):
            raise InvalidParameterError("The uniform bound profile needs positive mode moduli.")
        report = self.spectral_gap(d, L, kappas, N)
        return UniformBoundProfile(kappas=[entry.kappa for entry in report.entries],
                                   gaps=[entry.gap for entry in report.entries])
