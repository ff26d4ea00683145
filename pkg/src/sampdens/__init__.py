"""Density functionals, singular weights, and frame experiments for point
configurations in the plane and the unit disk."""

from .errors import (
    AccuracyError,
    ConfigError,
    DegenerateInputError,
    DegenerateKernelError,
    DomainError,
    GeometryError,
    HypothesisViolationError,
    RadiusRangeError,
    SampdensError,
    SingularEvaluationError,
    UnsupportedSurfaceError,
)
from .quadrature import QuadratureSpec
from .geometry import (
    EuclideanDisk,
    SurfaceModel,
    area_gamma,
    disk_realize,
    evans_green,
    metric_weights,
    rho,
    weighted_mean,
)
from .pointsets import (
    PointSet,
    Window,
    generate_hyperbolic_net,
    generate_square_lattice,
    load_points,
    pair_separation,
    save_points,
    separation_constant,
    sparseness_count,
)
from .densities import (
    DensityKernel,
    DensityReport,
    MetricModel,
    WeightModel,
    classify,
    density_profile,
    density_sum,
    disk_grid,
    kernel_moment,
    plane_grid,
    xi_r,
)
from .potentials import (
    SingularWeight,
    bump_weight,
    e_mean_bound,
    i_smoothed,
    local_corrector,
    pole_weight,
    v_r,
    v_r_eps,
)
from .verification import (
    InterpolationResult,
    SamplingExperiment,
    TruncatedSpace,
    build_sampling_experiment,
    frame_bounds,
    kernel_eval,
    min_norm_interpolate,
    riesz_lower_bound,
)

__version__ = "0.1.0"
