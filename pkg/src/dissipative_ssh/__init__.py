"""Third-quantization toolkit for the SSH chain with boundary dissipation."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    BathMatrix,
    DissipatorSpec,
    Kind,
    MajoranaHamiltonian,
    ModelError,
    OpenChainModel,
    Side,
    build_bath_matrix,
    build_majorana_hamiltonian,
    validate_model,
)
from .thirdq import (  # noqa: E402
    LiouvillianSpectrum,
    RapiditySpectrum,
    build_reduced_matrix,
    build_shape_matrix,
    classify_bound_states,
    liouvillian_gap,
    liouvillian_spectrum,
    rapidity_spectrum,
    stripe_decompose,
)

__all__ = [
    "BathMatrix",
    "DissipatorSpec",
    "Kind",
    "LiouvillianSpectrum",
    "MajoranaHamiltonian",
    "ModelError",
    "OpenChainModel",
    "RapiditySpectrum",
    "Side",
    "build_bath_matrix",
    "build_majorana_hamiltonian",
    "build_reduced_matrix",
    "build_shape_matrix",
    "classify_bound_states",
    "liouvillian_gap",
    "liouvillian_spectrum",
    "rapidity_spectrum",
    "stripe_decompose",
    "validate_model",
]
