"""Anisotropic fractional Brownian sheets: exact simulation, Hermite variations,
and deterministic/Monte Carlo verification of their central and non-central
limit behavior.
"""

__version__ = "0.1.0"

from .kernels import (
    ChaosOrder,
    Hurst,
    Interval,
    fbm_covariance,
    fbs_covariance,
    fgn_autocovariance,
    hermite,
    hermite_sheet_covariance,
    interval_inner_product,
)
from .normalization import (
    LimitConstant,
    Regime,
    berry_esseen_rate,
    classify_regime,
    iota,
    kappa,
    phi,
    regime_threshold,
    s_gamma,
)
from .exact_moments import (
    GridPair,
    MomentValue,
    expected_square,
    grid_covariance_sum,
    kernel_inner_product,
    quadruple_sum,
    t1_second_moment,
    t2_exact,
)
from .simulator import (
    EmbeddingError,
    IncrementField,
    SeedSpec,
    SheetGrid,
    circulant_factor,
    coarse_grain,
    load_field,
    reconstruct_sheet,
    sample_fgn,
    sample_increment_field,
    save_field,
)
from .variations import (
    VariationReport,
    hermite_variation,
    normalized_variation,
    partial_sum_process,
)
from .harness import (
    ExperimentConfig,
    ReportRow,
    covariance_check,
    estimate_hurst,
    fit_rate_exponent,
    ks_distance,
    run_clt_experiment,
    run_noncentral_study,
    run_rate_study,
)
