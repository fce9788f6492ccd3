from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from aws_lambda_powertools import Logger

from chalicelib.modules.errors import InvalidParameterError
from chalicelib.services.hermite_basis import (
    ENERGY, SECOND_DEGREE_BLOCK, TENSOR, VARIANTS, BasisSpec, HermiteBasis, index_table, multi_indices)

logger = Logger()

MAX_TRUNCATION = 2000

BGK = "bgk"
MASS = "mass"
ALTERNATING = "alternating"
RELAXATIONS = (BGK, MASS, ALTERNATING)


@dataclass(frozen=True)
class OperatorPair:
    L1: np.ndarray
    L2: np.ndarray
    d: int
    variant: str
    N: int
    L: float = 2 * np.pi
    relaxation: str = BGK

    @property
    def ell(self) -> float:
        return 2 * np.pi / self.L

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "basis": self.variant, "N": self.N, "L": self.L, "ell": self.ell,
                "relaxation": self.relaxation}


@dataclass(frozen=True)
class ModalGenerator:
    kappa: float
    C: np.ndarray
    ell: float = 1.0

    @property
    def hermitian_part(self) -> np.ndarray:
        return (self.C + self.C.conj().T) / 2

    @property
    def skew_part(self) -> np.ndarray:
        return (self.C - self.C.conj().T) / 2


@dataclass(frozen=True)
class ModeModuli:
    moduli: List[float] = field(default_factory=list)
    multiplicities: List[int] = field(default_factory=list)

    def __len__(self):
        return len(self.moduli)

    def to_dict(self) -> Dict[str, Any]:
        return {"moduli": self.moduli, "multiplicities": self.multiplicities}


@dataclass
class OperatorAssembly:
    hermite_basis: HermiteBasis

    def build_L1(self, d: int, variant: str, N: int) -> np.ndarray:
        """Coefficient of g_m in v1 * g_m' at entry (m, m'), optionally rotated into the energy basis."""
        self._check(d, variant, N)
        size = self._assembly_size(d, variant, N)
        table = index_table(d, size)
        L1 = np.zeros((size, size))
        for column, m in enumerate(multi_indices(d, size)):
            raised = (m[0] + 1,) + m[1:]
            row = table.get(raised)
            if row is not None:
                L1[row, column] = L1[column, row] = np.sqrt(m[0] + 1)
        if variant == ENERGY and d > 1:
            S = self.hermite_basis.basis_change_matrix(d, size)
            L1 = S @ L1 @ S
        return L1[:N, :N]

    def build_L2(self, d: int, variant: str, N: int, relaxation: str = BGK) -> np.ndarray:
        """Relaxation matrix: the identity minus the projection onto the conserved quantities."""
        self._check(d, variant, N)
        if relaxation != BGK:
            return self._one_dimensional_relaxation(d, relaxation, N)
        size = self._assembly_size(d, variant, N)
        table = index_table(d, size)
        conserved = np.zeros((d + 2, size))
        conserved[0, 0] = 1.0
        for j in range(d):
            conserved[1 + j, table[tuple(1 if i == j else 0 for i in range(d))]] = 1.0
            conserved[d + 1, table[tuple(2 if i == j else 0 for i in range(d))]] = 1 / np.sqrt(d)
        L2 = np.eye(size) - conserved.T @ conserved
        if variant == ENERGY and d > 1:
            S = self.hermite_basis.basis_change_matrix(d, size)
            L2 = S @ L2 @ S
        return L2[:N, :N]

    def operator_pair(self, d: int, variant: str = TENSOR, N: int = 20, L: float = 2 * np.pi,
                      relaxation: str = BGK) -> OperatorPair:
        if L <= 0:
            raise InvalidParameterError(f"Torus length must be positive, got {L}.")
        logger.info(f"Assembling L1, L2 for d={d}, basis={variant}, N={N}, relaxation={relaxation}.")
        return OperatorPair(L1=self.build_L1(d, variant, N),
                            L2=self.build_L2(d, variant, N, relaxation),
                            d=d, variant=variant, N=N, L=L, relaxation=relaxation)

    def modal_generator(self, pair: OperatorPair, kappa: float) -> ModalGenerator:
        if kappa < 0:
            raise InvalidParameterError(f"Mode modulus must be nonnegative, got {kappa}.")
        C = 1j * pair.ell * kappa * pair.L1 + pair.L2
        return ModalGenerator(kappa=kappa, C=C, ell=pair.ell)

    def mode_moduli(self, d: int, kmax: int) -> ModeModuli:
        """Distinct |k| over nonzero k in Z^d with |k|_inf <= kmax, with lattice-point counts."""
        if kmax < 1:
            raise InvalidParameterError(f"kmax must be at least 1, got {kmax}.")
        axis = np.arange(-kmax, kmax + 1)
        grids = np.meshgrid(*([axis] * d), indexing="ij")
        squared = sum(grid ** 2 for grid in grids).ravel()
        counts = Counter(int(value) for value in squared if value > 0)
        keys = sorted(counts)
        return ModeModuli(moduli=[float(np.sqrt(key)) for key in keys],
                          multiplicities=[counts[key] for key in keys])

    def first_moduli(self, d: int, count: int) -> ModeModuli:
        """The ``count`` smallest moduli; grows kmax until every modulus below the cut is complete."""
        kmax = 1
        while True:
            moduli = self.mode_moduli(d, kmax)
            complete = [i for i, kappa in enumerate(moduli.moduli) if kappa <= kmax]
            if len(complete) >= count:
                return ModeModuli(moduli=moduli.moduli[:count], multiplicities=moduli.multiplicities[:count])
            kmax *= 2

    @staticmethod
    def _check(d: int, variant: str, N: int):
        if d not in (1, 2, 3) or variant not in VARIANTS:
            raise InvalidParameterError(f"Unsupported operator request d={d}, variant={variant!r}.")
        if not 1 <= N <= MAX_TRUNCATION:
            raise InvalidParameterError(f"Truncation N={N} outside 1..{MAX_TRUNCATION}.")
        BasisSpec(d=d, variant=variant, N=N)

    @staticmethod
    def _assembly_size(d: int, variant: str, N: int) -> int:
        # the conserved energy vector and S reach the end of the second-degree block
        floor = SECOND_DEGREE_BLOCK.get(d, (0, 3))[1]
        return max(N, floor)

    @staticmethod
    def _one_dimensional_relaxation(d: int, relaxation: str, N: int) -> np.ndarray:
        if d != 1 or relaxation not in RELAXATIONS:
            raise InvalidParameterError(f"Relaxation {relaxation!r} is only available in one dimension.")
        if relaxation == MASS:
            diagonal = np.ones(N)
            diagonal[0] = 0.0
        else:
            diagonal = np.arange(N) % 2.0
        return np.diag(diagonal)
