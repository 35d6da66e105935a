"""Gini and generalized poverty index estimation with plug-in asymptotic inference."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .sample import (
    EmpiricalCopula,
    EmpiricalDistribution,
    Grid,
    IndependenceCopula,
    PairedSample,
    ecdf,
    empirical_copula,
    kernel_rect_integral,
    make_distribution,
    make_paired,
    quantile,
)
from .indices import (
    GiniEstimate,
    GpiConfig,
    GpiEstimate,
    a_statistic,
    fgt_direct,
    gini_point,
    gpi_point,
    kakwani_direct,
    pairwise_gini,
    sen_direct,
)
from .field import (
    BlockFunctional,
    Interval,
    PluginContext,
    VarianceReport,
    build_plugin_context,
    gamma1_blocksum,
    gamma1_exact,
    gini_ci,
    lorenz_points,
    sigma2_A,
    sigma2_GI,
)
from .twophase import (
    JointCovariance,
    PairFunctional,
    RatioReport,
    TwoPhaseContext,
    build_two_phase,
    cov_deltas,
    delta_gini,
    delta_gpi,
    gamma2_exact,
    gamma2_grid,
    gamma_star,
    gamma_star_rows,
    ratio_inference,
    sigma2_delta_gini,
    sigma2_delta_gpi,
)
from .montecarlo import (
    CopulaSpec,
    DistributionSpec,
    SimulationPlan,
    ValidationReport,
    bahadur_remainder,
    coverage_study,
    sample_paired,
    sample_univariate,
    true_gini,
    true_gpi,
    true_sigma2_gini,
    variance_agreement,
)
from .io import ReportEnvelope, parse_income_csv
