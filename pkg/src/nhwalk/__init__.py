"""Photonic quantum walks in Floquet non-Hermitian waveguide lattices."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    DomainError,
    NHWalkError,
    NumericalError,
)
from .lattice import Boundary, LatticeSpec, instantaneous_hamiltonian, reference_lattice  # noqa: E402
from .floquet import (  # noqa: E402
    EffectiveHamiltonian,
    TransmissionMatrix,
    effective_hamiltonian,
    evolve_n_periods,
    intensity_distribution,
    lyapunov_exponent,
    packet_center,
    propagate_period,
    transmission_matrix,
    truncate_aux,
)
from .nonbloch import (  # noqa: E402
    BulkHoppings,
    GBZCurve,
    SpectrumResult,
    bulk_hoppings,
    gbz,
    hermitianize,
    obc_spectrum,
    pbc_spectrum,
    similarity_transform,
    skin_depth,
)
from .pairs import (  # noqa: E402
    CorrelationMatrix,
    ExtendedBasis,
    ExtendedDensityMatrix,
    correlation_matrix,
    evolve_pair,
    lift_annihilation,
    lift_hamiltonian,
    pair_correlation_via_u,
    propagate_density_period,
)
from .entanglement import (  # noqa: E402
    EntropyResult,
    normalized_entropy,
    renyi2_diagonal,
    renyi2_exact,
    similarity_pair,
    similarity_single,
)
