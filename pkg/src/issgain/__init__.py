"""ISS gains for 1-D parabolic equations with boundary disturbances.

Compute the gain constant of the boundary-to-state map by independent routes
(eigenvalue series, steady-state integral, closed forms for the transport
family), simulate the disturbed equation by finite differences and spectral
expansion, and verify exponential-plus-gain envelopes on trajectories.
"""

from .backstepping import (
    ClosedLoopConfig,
    ClosedLoopResult,
    Kernel,
    apply_transform,
    bessel_kernel,
    closed_loop_bound,
    feedback_control,
    reciprocity_residual,
    simulate_closed_loop,
    solve_inverse_kernel,
    solve_kernel,
)
from .coefficients import Coefficient
from .config import (
    backstepping_target,
    dirichlet_laplacian,
    load_config,
    parse_config_text,
    problem_from_config,
    transport_problem,
)
from .disturbances import DisturbanceSignal
from .errors import (
    CompatibilityWarning,
    ConfigError,
    ConvergenceFailure,
    DegenerateBoundary,
    FixedPointDivergence,
    GridMismatch,
    InadmissibleCase,
    IncompatibleInitialCondition,
    IssgainError,
    MissingEnvelopeParameters,
    NonPositiveCoefficient,
    NumericalFailure,
    SingularBVP,
    SmoothnessWarning,
    StabilityWarning,
    TruncationWarning,
    UncertifiedHypothesis,
)
from .gains import (
    GainReport,
    SweepTable,
    TransportCase,
    advection_gain,
    analytic_transport_spectrum,
    backstepping_gain,
    gain_bvp,
    gain_series,
    mu_root,
    mu_roots,
    steady_state_coefficients,
    sweep_figure1,
    transport_gain,
    transport_gain_closed,
)
from .grids import GridFunction, uniform_grid
from .pde_sim import (
    GenericForcing,
    ISSCheckReport,
    IssEnvelope,
    LiftedForcing,
    LiftingRecord,
    Trajectory,
    advection_exact,
    lift_disturbance,
    simulate_fd,
    simulate_forced_spectral,
    simulate_spectral,
    simulate_via_lifting,
    verify_iss,
)
from .sturm_liouville import (
    HypothesisReport,
    SLProblem,
    Spectrum,
    build_problem,
    check_hypothesis_H,
    fourier_coefficients,
    parseval_residual,
    solve_spectrum,
    solve_steady_bvp,
    steady_bvp_residual,
    weighted_inner,
    weighted_norm,
)

__version__ = "0.1.0"
