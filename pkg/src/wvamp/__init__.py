"""Uncertainty budgeting for amplified weak quantum measurement.

Closed-form full-coupling-order results for finite-spectrum observables
with Gaussian meters, validated against two independent numerical oracles
(a grid transition-map engine and a Monte Carlo experiment sampler), plus
a batch CLI for significance scans.
"""

from .core import (
    ORTHO_EPS,
    FiniteObservable,
    OverlapCoefficients,
    SystemState,
    TwoPointParameters,
    amplified_postselection,
    expectation_and_variance,
    overlap_coefficients,
    two_point_parameters,
    weak_value,
)
from .engine import (
    GridSpec,
    MeterStatistics,
    MeterWaveFunction,
    apply_transition,
    basis_average_check,
    build_gaussian,
    meter_statistics,
)
from .errors import (
    AllRejected,
    ConfigError,
    CoverageBoundViolated,
    EigenstatePreselection,
    EtaOutOfDomain,
    GridTooNarrow,
    NonOrthonormalBasis,
    NonPositiveVariance,
    OrthogonalSelections,
    ParseError,
    ShiftOutOfGrid,
    ValidationError,
    VanishingState,
    WvampError,
    ZeroCoupling,
)
from .gaussian import (
    GaussianMeter,
    GaussianModelPoint,
    build_model_point,
    coefficients_from_parameters,
    conventional_stats,
    shift_p,
    shift_q,
    survival_rate,
    variance_p,
    variance_q,
)
from .montecarlo import (
    CoverageReport,
    ExperimentDraw,
    coverage_test,
    run_experiment,
)
from .uncertainty import (
    DOMAIN_EPS,
    MeasurementConfig,
    SignificanceVerdict,
    UncertaintyBreakdown,
    chebyshev_bound,
    conventional_uncertainty,
    kappa_inverse,
    nonlinear_term_p,
    nonlinear_term_q,
    pi_average,
    significance,
    success_ceiling,
    weak_uncertainty_p,
    weak_uncertainty_q,
)

__version__ = "0.1.0"
