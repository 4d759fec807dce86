//! Versioned pass/fail thresholds for the verification harness. Reports
//! record [`DEFAULTS_VERSION`] so that archived results stay interpretable
//! if the thresholds ever change.

pub const DEFAULTS_VERSION: &str = "1";

/// Binned density comparisons pass when the chi-square tail probability
/// exceeds this value.
pub const CHI_SQUARE_MIN_P: f64 = 1e-3;

/// Bins enter the chi-square statistic only when their expectation reaches
/// this count.
pub const MIN_EXPECTED_PER_BIN: f64 = 25.0;

/// Largest tolerated per-bin deviation in Poisson sigmas, over tested bins.
pub const MAX_BIN_SIGMA: f64 = 5.0;

/// Kolmogorov-Smirnov comparisons pass when the tail probability exceeds
/// this value.
pub const KS_MIN_P: f64 = 0.01;

/// Required significance (in fitted-parameter sigmas) for the edge-profile
/// amplitude decision between the full-bulk and half-bulk readings.
pub const EDGE_DECISION_MIN_SIGMA: f64 = 5.0;

/// Tolerated relative error of the fitted erfc slope against the predicted
/// edge slope.
pub const EDGE_SLOPE_MAX_REL_ERROR: f64 = 0.10;
