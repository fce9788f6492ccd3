from typing import Optional, Sequence


class HypocoercivityError(Exception):
    """Base class for every failure raised by the certificate toolkit."""


class InvalidParameterError(HypocoercivityError, ValueError):
    pass


class EigensolverError(HypocoercivityError):

    def __init__(self, message: str, partial: Optional[Sequence[complex]] = None):
        super().__init__(message)
        self.partial = list(partial) if partial is not None else []


class DefectiveSpectrumError(HypocoercivityError):

    def __init__(self, condition_number: float, threshold: float):
        super().__init__(
            f"Eigenvector matrix condition number {condition_number:.3e} exceeds {threshold:.1e}; "
            f"the spectrum is treated as defective and no eigenvector-based P is built.")
        self.condition_number = condition_number
        self.threshold = threshold


class AnsatzConstructionError(HypocoercivityError):

    def __init__(self, message: str, condition: str):
        super().__init__(message)
        self.condition = condition


class HypocoercivityConditionError(AnsatzConstructionError):
    pass


class VerificationError(HypocoercivityError):

    def __init__(self, kappa: float, min_eig: float):
        super().__init__(f"Matrix inequality fails at kappa={kappa:.12g} (min eigenvalue {min_eig:.3e}).")
        self.kappa = kappa
        self.min_eig = min_eig
