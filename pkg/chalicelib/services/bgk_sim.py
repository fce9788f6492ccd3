from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from aws_lambda_powertools import Logger
from scipy import linalg

from chalicelib.modules.errors import EigensolverError, InvalidParameterError
from chalicelib.modules.matrix_io import to_csv
from chalicelib.services.hermite_basis import (
    ENERGY, SECOND_DEGREE_BLOCK, TENSOR, HermiteBasis, hermite_polynomials, index_table)
from chalicelib.services.lyapunov_ansatz import BGK_BLOCK, LyapunovAnsatz
from chalicelib.services.operator_assembly import OperatorAssembly

logger = Logger()

ModeKey = Union[int, float]


@dataclass(frozen=True)
class ModalState:
    """Fourier-Hermite coefficients of h = f - M1 on the normalized torus.

    In 1D the keys are signed wave numbers k, in 2D and 3D they are the moduli |k| of a
    representative mode, weighted by the number of lattice points on that sphere.
    """
    d: int
    L: float
    variant: str
    N: int
    modes: Dict[ModeKey, np.ndarray] = field(default_factory=dict)
    weights: Dict[ModeKey, int] = field(default_factory=dict)
    t: float = 0.0
    tail_bound: float = 0.0

    def weight(self, key: ModeKey) -> int:
        return self.weights.get(key, 1)

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "L": self.L, "basis": self.variant, "N": self.N, "t": self.t,
                "modes": len(self.modes), "tail_bound": self.tail_bound}


@dataclass(frozen=True)
class Moments:
    sigma: complex
    momentum: Tuple[complex, ...]
    tau: complex


@dataclass(frozen=True)
class Trajectory:
    times: List[float]
    entropy: List[float]
    h_norm: List[float]
    envelope: List[float]
    l1: Optional[List[float]] = None
    parameters: Dict[str, Any] = field(default_factory=dict)

    def to_csv(self) -> str:
        if self.l1 is None:
            return to_csv(("t", "entropy", "h_norm", "envelope"),
                          zip(self.times, self.entropy, self.h_norm, self.envelope))
        return to_csv(("t", "entropy", "h_norm", "l1", "envelope"),
                      zip(self.times, self.entropy, self.h_norm, self.l1, self.envelope))

    def to_dict(self) -> Dict[str, Any]:
        return {"parameters": self.parameters, "t": self.times, "entropy": self.entropy,
                "h_norm": self.h_norm, "l1": self.l1, "envelope": self.envelope}


def decay_envelope(t: float, C_d: float, E0: float, lam: float) -> float:
    """min{2, sqrt(C_d E0) exp(-lam t / 2)}, the L1 bound along a trajectory."""
    _check_envelope(E0, lam)
    return float(min(2.0, np.sqrt(C_d * E0) * np.exp(-lam * t / 2)))


def t_init(C_d: float, E0: float, lam: float) -> float:
    """Time at which the exponential branch of the envelope drops below 2."""
    _check_envelope(E0, lam)
    return float((np.log(C_d) + np.log(E0) - 2 * np.log(2.0)) / lam)


def _check_envelope(E0: float, lam: float):
    if E0 <= 0 or lam <= 0:
        raise InvalidParameterError(f"Envelope needs E0 > 0 and lambda > 0, got E0={E0}, lambda={lam}.")


def _hann_transform(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    near = np.isclose(np.abs(x), 1.0)
    safe = np.where(near, 0.0, x)
    return np.where(near, 0.5, np.sinc(safe) / (1 - safe ** 2))


@dataclass
class BgkSimulator:
    operator_assembly: OperatorAssembly
    lyapunov_ansatz: LyapunovAnsatz
    hermite_basis: HermiteBasis
    defect_threshold: float = 1e8
    propagators: Dict[Tuple[str, int, float, ModeKey, float], np.ndarray] = field(
        default_factory=dict, init=False, repr=False)

    def moments(self, state: ModalState) -> Dict[ModeKey, Moments]:
        """Density, momentum and temperature perturbation of every mode, read from the tensor coefficients."""
        d = state.d
        table = index_table(d, state.N)
        unit = [table.get(tuple(1 if i == j else 0 for i in range(d))) for j in range(d)]
        double = [table.get(tuple(2 if i == j else 0 for i in range(d))) for j in range(d)]
        result = {}
        for key, coefficients in state.modes.items():
            tensor = self._tensor_coefficients(state, coefficients)

            def coefficient(index):
                return tensor[index] if index is not None else 0.0

            sigma = tensor[0]
            result[key] = Moments(sigma=sigma, momentum=tuple(coefficient(index) for index in unit),
                                  tau=np.sqrt(2.0) * sum(coefficient(index) for index in double) + d * sigma)
        return result

    def evolve(self, state: ModalState, dt: float) -> ModalState:
        if dt < 0:
            raise InvalidParameterError(f"Time step must be nonnegative, got {dt}.")
        if dt == 0:
            return state
        pair = self.operator_assembly.operator_pair(state.d, state.variant, state.N, state.L)
        modes = {}
        for key, coefficients in state.modes.items():
            if key == 0:
                modes[key] = coefficients * np.exp(-dt)
            else:
                modes[key] = self._propagator(pair, key, dt) @ coefficients
        return replace(state, modes=modes, t=state.t + dt)

    def entropy(self, state: ModalState, alpha: float, gamma: float = 0.0) -> float:
        """sum_k w_k (1 + |k|^2)^gamma <h_k, P_|k| h_k>, with P_0 = I."""
        if state.N < BGK_BLOCK[state.d]:
            raise InvalidParameterError(f"Entropy needs N >= {BGK_BLOCK[state.d]} for d={state.d}.")
        total = 0.0
        for key, coefficients in state.modes.items():
            kappa = abs(key)
            if kappa == 0:
                value = np.vdot(coefficients, coefficients)
            else:
                P = self.lyapunov_ansatz.bgk_P(state.d, kappa, alpha, N=state.N)
                value = np.vdot(coefficients, P @ coefficients)
            total += state.weight(key) * (1 + kappa ** 2) ** gamma * float(np.real(value))
        return total

    def h_norm(self, state: ModalState) -> float:
        return float(np.sqrt(sum(state.weight(key) * np.vdot(h, h).real for key, h in state.modes.items())))

    def l1_distance_1d(self, state: ModalState, nx: int = 512, nv: int = 64) -> float:
        """Normalized L1 distance of f to M1, on a uniform x grid and Gauss-Hermite v nodes."""
        if state.d != 1:
            raise InvalidParameterError("The L1 reconstruction is only available in one dimension.")
        if not state.modes:
            return 0.0
        keys = sorted(state.modes)
        if nx <= 2 * max(abs(key) for key in keys):
            logger.warning(f"nx={nx} under-resolves wave numbers up to {max(abs(key) for key in keys)}.")
        nodes, weights = self.hermite_basis.gauss_hermite(nv)
        polynomials = hermite_polynomials(state.N - 1, nodes)
        coefficients = np.array([state.modes[key] for key in keys])
        x = np.arange(nx) / nx
        phases = np.exp(2j * np.pi * np.outer(x, keys))
        values = np.real(phases @ (coefficients @ polynomials))
        return float(np.mean(np.abs(values) @ weights))

    def concentrated_initial_data(self, epsilon: float, kmax: int = 128, N: int = 20,
                                  L: float = 2 * np.pi) -> ModalState:
        """Gas released from a container occupying a fraction epsilon of the 1D torus.

        The profile is a plateau smoothed by a raised-cosine taper, total support epsilon, mean one.
        """
        if not 0 < epsilon <= 1:
            raise InvalidParameterError(f"Container fraction must lie in (0, 1], got {epsilon}.")
        taper = (1 - epsilon) / 2
        plateau, width = epsilon * (1 - taper), epsilon * taper
        ks = np.arange(-kmax, kmax + 1)
        transform = (-1.0) ** np.abs(ks) * np.sinc(ks * plateau) * _hann_transform(ks * width)
        modes = {}
        for k, value in zip(ks, transform):
            coefficients = np.zeros(N, dtype=complex)
            if k != 0:
                coefficients[0] = value
            modes[int(k)] = coefficients
        far = 64 * kmax
        tail = np.arange(kmax + 1, far + 1)
        tail_values = np.sinc(tail * plateau) * _hann_transform(tail * width)
        tail_bound = 2 * float(np.sum(tail_values ** 2)) + 2 / (np.pi ** 2 * plateau ** 2 * far)
        logger.info(f"Concentrated initial data with epsilon={epsilon}, kmax={kmax}, tail bound {tail_bound:.3e}.")
        return ModalState(d=1, L=L, variant=TENSOR, N=N, modes=modes, tail_bound=tail_bound)

    def random_initial_data(self, d: int, L: float = 2 * np.pi, kmax: int = 4, N: int = 30,
                            seed: int = 0) -> ModalState:
        rng = np.random.default_rng(seed)
        variant = ENERGY if d > 1 else TENSOR
        relaxation = self.operator_assembly.build_L2(d, variant, N)
        if d == 1:
            modes = {}
            for k in range(1, kmax + 1):
                coefficients = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) / (1 + k ** 2)
                modes[k], modes[-k] = coefficients, np.conj(coefficients)
            modes[0] = relaxation @ rng.standard_normal(N).astype(complex)
            return ModalState(d=1, L=L, variant=variant, N=N, modes=dict(sorted(modes.items())))
        moduli = self.operator_assembly.mode_moduli(d, kmax)
        modes = {0.0: relaxation @ rng.standard_normal(N).astype(complex)}
        weights = {0.0: 1}
        for kappa, count in zip(moduli.moduli, moduli.multiplicities):
            modes[kappa] = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) / (1 + kappa ** 2)
            weights[kappa] = count
        return ModalState(d=d, L=L, variant=variant, N=N, modes=modes, weights=weights)

    def decay_envelope(self, t: float, C_d: float, E0: float, lam: float) -> float:
        return decay_envelope(t, C_d, E0, lam)

    def t_init(self, C_d: float, E0: float, lam: float) -> float:
        return t_init(C_d, E0, lam)

    def trajectory(self, state: ModalState, tmax: float, dt: float, alpha: float, C_d: float, lam: float,
                   gamma: float = 0.0, nx: int = 512, nv: int = 64) -> Trajectory:
        if dt <= 0 or tmax < 0:
            raise InvalidParameterError(f"Need dt > 0 and tmax >= 0, got dt={dt}, tmax={tmax}.")
        steps = int(round(tmax / dt))
        E0 = self.entropy(state, alpha, gamma)
        times, entropy, h_norm, envelope = [], [], [], []
        l1 = [] if state.d == 1 else None
        for step in range(steps + 1):
            if step:
                state = self.evolve(state, dt)
            times.append(step * dt)
            entropy.append(self.entropy(state, alpha, gamma))
            h_norm.append(self.h_norm(state))
            envelope.append(decay_envelope(step * dt, C_d, E0, lam) if E0 > 0 else 0.0)
            if l1 is not None:
                l1.append(self.l1_distance_1d(state, nx, nv))
        logger.info(f"Simulated d={state.d}, L={state.L} up to t={tmax} in {steps} steps.")
        return Trajectory(times=times, entropy=entropy, h_norm=h_norm, envelope=envelope, l1=l1,
                          parameters={"d": state.d, "L": state.L, "N": state.N, "basis": state.variant,
                                      "alpha": alpha, "gamma": gamma, "dt": dt, "tmax": tmax,
                                      "C_d": C_d, "lambda": lam, "E0": E0})

    def _propagator(self, pair, key: ModeKey, dt: float) -> np.ndarray:
        cache_key = (pair.variant, pair.N, pair.L, key, dt)
        if cache_key in self.propagators:
            return self.propagators[cache_key]
        C = self.operator_assembly.modal_generator(pair, abs(key)).C
        if key < 0:
            C = np.conj(C)
        eigenvalues, vectors = linalg.eig(C)
        condition = np.linalg.cond(vectors)
        if condition <= self.defect_threshold:
            propagator = (vectors * np.exp(-eigenvalues * dt)) @ linalg.inv(vectors)
        else:
            logger.warning(f"Eigenvectors of C for mode {key} have condition {condition:.3e}; using expm.")
            propagator = linalg.expm(-C * dt)
        if not np.all(np.isfinite(propagator)):
            raise EigensolverError(f"exp(-C dt) for mode {key} is not finite (eigenvector condition {condition:.3e}).")
        self.propagators[cache_key] = propagator
        return propagator

    def _tensor_coefficients(self, state: ModalState, coefficients: np.ndarray) -> np.ndarray:
        if state.variant == ENERGY and state.d in SECOND_DEGREE_BLOCK:
            size = max(state.N, SECOND_DEGREE_BLOCK[state.d][1])
            padded = np.zeros(size, dtype=complex)
            padded[:state.N] = coefficients
            return (self.hermite_basis.basis_change_matrix(state.d, size) @ padded)[:state.N]
        return np.asarray(coefficients)
