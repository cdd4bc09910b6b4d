//! Simulation designs, metrics and experiment drivers.

pub mod design;
pub mod experiments;
pub mod metrics;

pub use design::{
    generate_design, generate_response, Correlation, DesignSpec, SignPattern, SignalSpec, Support,
};
pub use experiments::{
    equicorr_limit_experiment, fdr_experiment, gumbel_covariance_experiment, qq_experiment,
    screening_experiment, EquicorrConfig, EquicorrResult, FdrConfig, FdrRecord, FdrResult,
    GumbelCovConfig, GumbelCovRecord, QqConfig, QqRecord, ScreeningConfig, ScreeningRecord,
    ScreeningResult, ScreeningRow,
};
pub use metrics::{
    classic_metrics, uvr_metric, ClassicMetrics, Estimate, MetricsRow, SelectionRecord, UvrOutcome,
    UVR_ZERO_TOL,
};
