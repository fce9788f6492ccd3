from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Sequence, Tuple

import numpy as np
from aws_lambda_powertools import Logger
from numpy.polynomial import hermite_e

from chalicelib.modules.errors import InvalidParameterError

logger = Logger()

TENSOR = "tensor"
ENERGY = "energy"
VARIANTS = (TENSOR, ENERGY)

# Size of the leading block of D = C*P + PC that carries the certificate.
MIN_BLOCK = {1: 5, 2: 11, 3: 21}
# Linear indices spanned by the second-degree block that S rearranges.
SECOND_DEGREE_BLOCK = {2: (3, 6), 3: (4, 10)}
# Number of conserved quantities (mass, momentum, energy).
KERNEL_DIMENSION = {1: 3, 2: 4, 3: 5}

MultiIndex = Tuple[int, ...]


@dataclass(frozen=True)
class BasisSpec:
    d: int
    variant: str = TENSOR
    N: int = 20

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise InvalidParameterError(f"Dimension must be 1, 2 or 3, got {self.d}.")
        if self.variant not in VARIANTS:
            raise InvalidParameterError(f"Unknown basis variant {self.variant!r}.")
        if self.N < 1:
            raise InvalidParameterError(f"Truncation must be positive, got {self.N}.")

    @property
    def min_block(self) -> int:
        return MIN_BLOCK[self.d]

    def supports_certificate(self) -> bool:
        return self.N >= self.min_block


def degree_block(d: int, degree: int) -> Tuple[MultiIndex, ...]:
    """Multi-indices of one total degree, ordered by decreasing m1, then decreasing m2."""
    if d == 1:
        return ((degree,),)
    if d == 2:
        return tuple((degree - m2, m2) for m2 in range(degree + 1))
    return tuple((m1, m2, degree - m1 - m2)
                 for m1 in range(degree, -1, -1)
                 for m2 in range(degree - m1, -1, -1))


@lru_cache(maxsize=None)
def multi_indices(d: int, N: int) -> Tuple[MultiIndex, ...]:
    ordered = []
    degree = 0
    while len(ordered) < N:
        ordered.extend(degree_block(d, degree))
        degree += 1
    return tuple(ordered[:N])


@lru_cache(maxsize=None)
def index_table(d: int, N: int) -> Dict[MultiIndex, int]:
    return {m: i for i, m in enumerate(multi_indices(d, N))}


def lex_index(m: Sequence[int], d: int) -> int:
    m = tuple(int(component) for component in m)
    if len(m) != d or min(m) < 0:
        raise InvalidParameterError(f"{m} is not a multi-index in dimension {d}.")
    n = sum(m)
    if d == 1:
        return n
    if d == 2:
        return n * (n + 1) // 2 + m[1]
    rest = n - m[0]
    return n * (n + 1) * (n + 2) // 6 + rest * (rest + 1) // 2 + (rest - m[1])


def hermite_polynomials(degree: int, v: np.ndarray) -> np.ndarray:
    """Normalized probabilists' Hermite polynomials He_m/sqrt(m!) for m = 0..degree.

    Keyword Arguments:
    degree -- highest degree to evaluate
    v -- evaluation points (any shape)

    Returns an array of shape (degree + 1,) + v.shape.
    """
    v = np.asarray(v, dtype=float)
    values = np.empty((degree + 1,) + v.shape)
    values[0] = 1.0
    if degree >= 1:
        values[1] = v
    for m in range(1, degree):
        values[m + 1] = (v * values[m] - np.sqrt(m) * values[m - 1]) / np.sqrt(m + 1)
    return values


def maxwellian(v: np.ndarray) -> np.ndarray:
    """Centered unit-temperature Maxwellian, the last axis being the velocity components."""
    v = np.asarray(v, dtype=float)
    d = v.shape[-1]
    return np.exp(-0.5 * np.sum(v * v, axis=-1)) / (2 * np.pi) ** (d / 2)


def hermite_functions(degree: int, v: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions g_m(v) for m = 0..degree, by the three-term recurrence on g_m."""
    v = np.asarray(v, dtype=float)
    values = np.empty((degree + 1,) + v.shape)
    values[0] = np.exp(-0.5 * v * v) / np.sqrt(2 * np.pi)
    if degree >= 1:
        values[1] = v * values[0]
    for m in range(1, degree):
        values[m + 1] = (v * values[m] - np.sqrt(m) * values[m - 1]) / np.sqrt(m + 1)
    return values


@lru_cache(maxsize=None)
def _second_degree_change(d: int) -> np.ndarray:
    if d == 2:
        return np.array([[1.0, 0.0, 1.0],
                         [0.0, np.sqrt(2.0), 0.0],
                         [1.0, 0.0, -1.0]]) / np.sqrt(2.0)
    r = 1 / np.sqrt(3.0)
    diagonal = -(1 + r) / 2
    off = (1 - r) / 2
    block = np.zeros((6, 6))
    # order within the block: 200, 110, 101, 020, 011, 002
    block[0, [0, 3, 5]] = r
    block[[3, 5], 0] = r
    block[1, 1] = block[2, 2] = block[4, 4] = 1.0
    block[3, 3] = block[5, 5] = diagonal
    block[3, 5] = block[5, 3] = off
    return block


@dataclass
class HermiteBasis:
    quadrature_nodes: int = 64
    symmetry_tolerance: float = 1e-13

    def recurrence_coeffs(self, m: int) -> Tuple[float, float]:
        if m < 0:
            raise InvalidParameterError(f"Hermite degree must be nonnegative, got {m}.")
        return float(np.sqrt(m + 1)), float(np.sqrt(m))

    def lex_index(self, m: Sequence[int], d: int) -> int:
        return lex_index(m, d)

    def multi_index(self, index: int, d: int) -> MultiIndex:
        return multi_indices(d, index + 1)[index]

    def multi_indices(self, spec: BasisSpec) -> Tuple[MultiIndex, ...]:
        return multi_indices(spec.d, spec.N)

    def basis_change_matrix(self, d: int, N: int) -> np.ndarray:
        if d not in SECOND_DEGREE_BLOCK:
            raise InvalidParameterError(f"The energy basis differs from the tensor basis only for d = 2, 3, got {d}.")
        start, stop = SECOND_DEGREE_BLOCK[d]
        if N < stop:
            raise InvalidParameterError(f"N = {N} does not contain the second-degree block (needs N >= {stop}).")
        S = np.eye(N)
        S[start:stop, start:stop] = _second_degree_change(d)
        return S

    def eval_basis(self, m: Sequence[int], v: np.ndarray, variant: str = TENSOR) -> np.ndarray:
        """Value of g_m (tensor) or of the energy-basis function with the same multi-index at v.

        v is a single velocity of length d or an array of shape (points, d).
        """
        m = tuple(m)
        d = len(m)
        points = np.atleast_2d(np.asarray(v, dtype=float))
        if points.shape[-1] != d:
            raise InvalidParameterError(f"Velocity has {points.shape[-1]} components, expected {d}.")
        index = lex_index(m, d)
        if variant == ENERGY and d in SECOND_DEGREE_BLOCK:
            start, stop = SECOND_DEGREE_BLOCK[d]
            if start <= index < stop:
                S = self.basis_change_matrix(d, stop)
                values = sum(S[j, index] * self._tensor_value(multi_indices(d, stop)[j], points)
                             for j in range(start, stop))
                return values if np.ndim(v) > 1 else values[0]
        elif variant not in VARIANTS:
            raise InvalidParameterError(f"Unknown basis variant {variant!r}.")
        values = self._tensor_value(m, points)
        return values if np.ndim(v) > 1 else values[0]

    def gauss_hermite(self, n: int = None) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights for the standard normal measure (weights sum to one)."""
        n = n or self.quadrature_nodes
        knots, weights = hermite_e.hermegauss(n)
        if np.max(np.abs(knots + knots[::-1])) > self.symmetry_tolerance * max(1.0, np.max(np.abs(knots))):
            raise InvalidParameterError(f"Gauss-Hermite nodes for n = {n} lost their symmetry.")
        return knots, weights / np.sqrt(2 * np.pi)

    def gram_matrix(self, degree: int, nodes: int = None) -> np.ndarray:
        """Gram matrix of g_0..g_degree in L2(M1^{-1}) by Gauss-Hermite quadrature."""
        knots, weights = self.gauss_hermite(nodes)
        polynomials = hermite_polynomials(degree, knots)
        logger.info(f"Computing Hermite Gram matrix up to degree {degree} with {len(knots)} nodes.")
        return (polynomials * weights) @ polynomials.T

    @staticmethod
    def _tensor_value(m: MultiIndex, points: np.ndarray) -> np.ndarray:
        values = np.ones(points.shape[0])
        for component, degree in enumerate(m):
            values = values * hermite_functions(degree, points[:, component])[degree]
        return values
