//! Identification of joint dynamic stiffness under viscous, hysteretic
//! (complex-stiffness) and combined damping models, nested-model F-tests,
//! and synthesis of a fractional-order strength-amplification controller.
//!
//! The pipeline runs `sim` (or measured data) → [`signal`] (segment and
//! estimate the FRF) → [`identify`] (compensate exoskeleton inertia and fit
//! M1/M2/M3) → [`stats`] (F-tests, regressions) → [`control`] (plant,
//! controller, margins).

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod control;
pub mod error;
pub mod fixtures;
pub mod identify;
pub mod io;
pub mod signal;
pub mod sim;
pub mod stats;

pub use num_complex::Complex64;

pub use control::{
    augmentation_error_ratio, choose_fractional_order, design, eval_plant, lag_cascade, margins, robustness_sweep,
    tune_gain, Design, DesignOptions, DesignSpec, LagCascade, MarginReport, OneParamModel, PlantConfig, RationalTF,
};
pub use error::{Error, Result};
pub use identify::{
    compensate_inertia, damping_ratio, fit_m1, fit_m2, fit_m3, fit_real_part, natural_frequency, ExperimentConfig,
    ModelKind, ModelParams, ModelParamsM1, ModelParamsM2, ModelParamsM3, ParamRecord,
};
pub use signal::{
    estimate_frf, estimate_frf_point, gen_exp_chirp, segment_frequencies, segment_record, ChirpSpec, FrequencyResponse,
    FrequencySample, FrfMeta, SegmentationSpec, TimeSeries,
};
pub use sim::{simulate_protocol, steady_state_segment, ProtocolSpec, SubjectTruth};
pub use stats::{f_critical, f_statistic, regress_ch_kh, rss, FTestReport, RegressionReport};
