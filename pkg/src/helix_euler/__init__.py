"""Helical vortex computations: periodic kernels, filament velocity recovery,
particle transport, and weak-formulation residual audits."""

from .geometry import (
    HelixParams,
    helicality_residual,
    project_to_slice,
    reduce_angle,
    rotate,
    rotation_matrix,
    screw,
    swirl,
    xi,
)
from .bessel import BesselAccuracy, k0, k0e, k1, k1e
from .kernel import (
    EULER_GAMMA_EXP,
    KernelConfig,
    KernelValue,
    SingularInputError,
    biot_savart_kernel,
    green_images,
    green_series,
    kernel_bound_ratio,
    reduce_period,
    velocity_kernel,
)
from .biotsavart import (
    FilamentSingularityError,
    NormalizationError,
    QuadratureNonconvergenceError,
    RadialProfile,
    SteadyBackground,
    UnbalancedVorticityError,
    VelocityEvalConfig,
    VorticityParticles,
    background_velocity,
    decay_exponent,
    profile_ring_particles,
    velocity_filament,
    velocity_oracle_3d,
    xi_operator,
)
from .transport import (
    DiagnosticsReport,
    MollifierSpec,
    SimulationConfig,
    SliceField,
    TrajectoryState,
    area_distortion,
    conservation_report,
    mollify_initial,
    run,
    slice_velocity,
    step,
    support_radius,
)
from .weakform import (
    CutoffPair,
    TestFunction,
    cutoff_phi,
    cutoff_zeta,
    h_psi,
    h_psi_reduced,
    make_test_function,
    splitting_report,
    velocity_l2_truncated,
    weak_residual,
    weak_residual_velocity_form,
)

__version__ = "0.1.0"
