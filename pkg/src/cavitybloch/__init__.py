"""Two-level atom in a standing-wave cavity mode: bands, crossings, dynamics."""

from .core import (
    GaussianSpec,
    GridError,
    InternalState,
    InvalidParameterError,
    PhysicalParams,
    ScaledParams,
    SpatialGrid,
    SpinorWavefunction,
    bare_internal_state,
    gaussian_profile,
    scale_parameters,
)
from .observables import (
    MomentumWindow,
    center_of_mass,
    densities,
    inversion,
    momentum_densities,
    momentum_window_probability,
    position_densities,
)
from .propagator import Schedule, StepSizeError, Trajectory, evolve, force_gauge, step
from .spectrum import (
    BandSolution,
    Crossing,
    DispersionTable,
    TruncationError,
    band_populations,
    bare_gaussian,
    build_bloch_matrix,
    classify_crossings,
    dispersion,
    dressed_gaussian,
    effective_parameters,
    project_band,
    quasimomentum_distribution,
    solve_bands,
)

__version__ = "0.1.0"
