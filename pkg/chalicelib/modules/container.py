from dependency_injector import containers
from dependency_injector import providers

from chalicelib.services.bgk_sim import BgkSimulator
from chalicelib.services.decay_certificate import DecayCertifier
from chalicelib.services.hermite_basis import HermiteBasis
from chalicelib.services.hypo_index import HypoIndex
from chalicelib.services.lyapunov_ansatz import LyapunovAnsatz
from chalicelib.services.operator_assembly import OperatorAssembly
from chalicelib.services.spectral_gap import SpectralGap


class Container(containers.DeclarativeContainer):

    config = providers.Configuration()

    hermite_basis: providers.Singleton[HermiteBasis] = providers.Singleton(HermiteBasis)

    operator_assembly: providers.Singleton[OperatorAssembly] = providers.Singleton(
        OperatorAssembly,
        hermite_basis=hermite_basis,
    )

    hypo_index: providers.Singleton[HypoIndex] = providers.Singleton(
        HypoIndex,
        rank_tolerance=config.rank_tolerance,
    )

    lyapunov_ansatz: providers.Singleton[LyapunovAnsatz] = providers.Singleton(
        LyapunovAnsatz,
        rank_tolerance=config.rank_tolerance,
        bisection_steps=config.bisection_steps,
        defect_threshold=config.defect_threshold,
    )

    decay_certifier: providers.Singleton[DecayCertifier] = providers.Singleton(
        DecayCertifier,
        operator_assembly=operator_assembly,
        lyapunov_ansatz=lyapunov_ansatz,
        verification_moduli=config.verification_moduli,
        maximizer_tolerance=config.maximizer_tolerance,
    )

    spectral_gap: providers.Singleton[SpectralGap] = providers.Singleton(
        SpectralGap,
        operator_assembly=operator_assembly,
        residual_tolerance=config.residual_tolerance,
    )

    bgk_simulator: providers.Singleton[BgkSimulator] = providers.Singleton(
        BgkSimulator,
        operator_assembly=operator_assembly,
        lyapunov_ansatz=lyapunov_ansatz,
        hermite_basis=hermite_basis,
        defect_threshold=config.defect_threshold,
    )


def load_config(target: Container) -> Container:
    target.config.rank_tolerance.from_env("HYPO_RANK_TOLERANCE", default=1e-10, as_=float)
    target.config.residual_tolerance.from_env("HYPO_RESIDUAL_TOLERANCE", default=1e-8, as_=float)
    target.config.defect_threshold.from_env("HYPO_DEFECT_THRESHOLD", default=1e8, as_=float)
    target.config.bisection_steps.from_env("HYPO_BISECTION_STEPS", default=40, as_=int)
    target.config.verification_moduli.from_env("HYPO_VERIFICATION_MODULI", default=50, as_=int)
    target.config.maximizer_tolerance.from_env("HYPO_MAXIMIZER_TOLERANCE", default=1e-12, as_=float)
    return target


container = load_config(Container())
