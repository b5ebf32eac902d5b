//! Nested-model F-tests on complex residuals and the stiffness/hysteresis regressions.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identify::ModelParams;
use crate::signal::{FrequencyResponse, FrequencySample};

/// Relative bisection tolerance for F quantiles.
pub const F_QUANTILE_TOL: f64 = 1e-10;

/// `Σ_k |S_k − model(jω_k)|²`.
pub fn rss(frf: &FrequencyResponse, params: &ModelParams) -> f64 {
    rss_samples(frf.samples(), params)
}

pub fn rss_samples(samples: &[FrequencySample], params: &ModelParams) -> f64 {
    samples
        .iter()
        .map(|s| (s.value - params.eval(s.omega)).norm_sqr())
        .sum()
}

/// RSS between measured samples and model samples that must share the same grid.
pub fn residual_sum_of_squares(data: &[FrequencySample], model: &[FrequencySample]) -> Result<f64> {
    if data.len() != model.len() {
        return Err(Error::invalid(
            "model",
            format!("{} model samples for {} data samples", model.len(), data.len()),
        ));
    }
    let mut acc = 0.0;
    for (i, (d, m)) in data.iter().zip(model).enumerate() {
        if d.omega != m.omega {
            return Err(Error::GridMismatch {
                index: i,
                expected: d.omega,
                found: m.omega,
            });
        }
        acc += (d.value - m.value).norm_sqr();
    }
    Ok(acc)
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::invalid("n", format!("need at least 3 complex samples, got {n}")));
    }
    Ok(())
}

/// `((rss_reduced − rss_full)/rss_full)·(2n − 4)`: one extra parameter,
/// `2n` real observations, four parameters in the full model.
pub fn f_statistic(rss_reduced: f64, rss_full: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if rss_full == 0.0 {
        return Err(Error::PerfectFit);
    }
    if !(rss_full > 0.0 && rss_reduced >= 0.0) {
        return Err(Error::invalid("rss", "residual sums must be non-negative"));
    }
    Ok((rss_reduced - rss_full) / rss_full * (2 * n - 4) as f64)
}

/// Upper `p` quantile of F(1, 2n − 4).
pub fn f_critical(n: usize, p_false_reject: f64) -> Result<f64> {
    check_n(n)?;
    if !(p_false_reject > 0.0 && p_false_reject < 1.0) {
        return Err(Error::invalid(
            "p_false_reject",
            format!("must lie in (0, 1), got {p_false_reject}"),
        ));
    }
    Ok(special::f_upper_quantile(
        p_false_reject,
        1.0,
        (2 * n - 4) as f64,
        F_QUANTILE_TOL,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTestReport {
    pub rss_reduced: f64,
    pub rss_full: f64,
    pub n: usize,
    pub f_stat: f64,
    pub f_critical: f64,
    pub significant: bool,
}

pub fn f_test(rss_reduced: f64, rss_full: f64, n: usize, p_false_reject: f64) -> Result<FTestReport> {
    let f_stat = f_statistic(rss_reduced, rss_full, n)?;
    let f_critical = f_critical(n, p_false_reject)?;
    Ok(FTestReport {
        rss_reduced,
        rss_full,
        n,
        f_stat,
        f_critical,
        significant: f_stat > f_critical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "M1-M3")]
    M1M3,
    #[serde(rename = "M2-M3")]
    M2M3,
}

/// Serialized F-test outcome for one experiment and comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FTestRecord {
    pub exp: String,
    pub comparison: Comparison,
    pub f_stat: f64,
    pub f_critical: f64,
    pub significant: bool,
}

impl FTestRecord {
    pub fn new(exp: impl Into<String>, comparison: Comparison, report: &FTestReport) -> Self {
        FTestRecord {
            exp: exp.into(),
            comparison,
            f_stat: report.f_stat,
            f_critical: report.f_critical,
            significant: report.significant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub c_h: f64,
    pub d_h: f64,
    pub r_squared: f64,
}

/// OLS of `C_h = c_h·K_h + d_h` over `(K_h, C_h)` pairs.
pub fn regress_ch_kh(pairs: &[(f64, f64)]) -> Result<RegressionReport> {
    if pairs.len() < 2 {
        return Err(Error::invalid("pairs", "need at least 2 pairs"));
    }
    let n = pairs.len() as f64;
    let km = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let cm = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let skk: f64 = pairs.iter().map(|p| (p.0 - km).powi(2)).sum();
    let skc: f64 = pairs.iter().map(|p| (p.0 - km) * (p.1 - cm)).sum();
    let scc: f64 = pairs.iter().map(|p| (p.1 - cm).powi(2)).sum();
    if skk == 0.0 {
        return Err(Error::RankDeficient("all K_h values are equal".into()));
    }
    let c_h = skc / skk;
    let d_h = cm - c_h * km;
    let sse: f64 = pairs.iter().map(|p| (p.1 - c_h * p.0 - d_h).powi(2)).sum();
    let r_squared = if scc == 0.0 {
        1.0
    } else {
        (1.0 - sse / scc).clamp(0.0, 1.0)
    };
    Ok(RegressionReport { c_h, d_h, r_squared })
}

/// Least squares `y ≈ a·x` without intercept. Returns `(a, rss)`.
pub fn regress_through_origin(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return Err(Error::RankDeficient("regressor is identically zero".into()));
    }
    let a = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx;
    let rss = x.iter().zip(y).map(|(a_, b)| (b - a * a_).powi(2)).sum();
    Ok((a, rss))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscousCheck {
    /// Fitted `a_h` of `ζ = (a_h/2)·ω`.
    pub a_h: f64,
    pub proportional_rss: f64,
    pub constant_zeta: f64,
    pub constant_rss: f64,
    pub proportional_rejected: bool,
}

/// Compares `ζ ∝ ω_n` (viscous damping proportional to stiffness) against a constant `ζ`.
pub fn viscous_hypothesis_check(rows: &[(f64, f64)]) -> Result<ViscousCheck> {
    if rows.len() < 3 {
        return Err(Error::invalid(
            "rows",
            format!("need at least 3 rows, got {}", rows.len()),
        ));
    }
    let omega: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let zeta: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (slope, proportional_rss) = regress_through_origin(&omega, &zeta)?;
    let constant_zeta = zeta.iter().sum::<f64>() / zeta.len() as f64;
    let constant_rss = zeta.iter().map(|z| (z - constant_zeta).powi(2)).sum();
    Ok(ViscousCheck {
        a_h: 2.0 * slope,
        proportional_rss,
        constant_zeta,
        constant_rss,
        proportional_rejected: constant_rss < proportional_rss,
    })
}

/// Low-frequency phase lead of the stiffness, `atan((C_h + B_h·ω)/K_h)` in degrees.
pub fn phase_shift_low_freq(params: &ModelParams, omega: f64) -> Result<f64> {
    let k = params.k_h();
    if !(k > 0.0) {
        return Err(Error::invalid("K_h", "must be positive"));
    }
    let im = params.c_h().unwrap_or(0.0) + params.b_h().unwrap_or(0.0) * omega;
    Ok((im / k).atan().to_degrees())
}
