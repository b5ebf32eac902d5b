//! Dynamic-stiffness models and their frequency-domain least-squares fits.
//!
//! All three models share the real part `K_h − M·ω²` and differ only in the
//! imaginary part:
//!
//! | model | imaginary part |
//! |-------|----------------|
//! | M1 (viscous)    | `B_h·ω` |
//! | M2 (hysteretic) | `C_h` |
//! | M3 (combined)   | `C_h + B_h·ω` |
//!
//! Because no parameter appears in both parts, the complex least-squares
//! problem `min Σ|S_k − model(jω_k)|²` splits into two independent real
//! problems, `min Σ(Re S_k − Re model)²` and `min Σ(Im S_k − Im model)²`.
//! The real-part problem is identical for every model, so `K_h` and `M` come
//! out bit-identical across M1, M2 and M3.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{FrequencyResponse, FrequencySample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    #[serde(rename = "M_e")]
    pub m_e: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grip_label: Option<String>,
    /// N·m; metadata only.
    #[serde(default)]
    pub bias: f64,
}

impl ExperimentConfig {
    pub fn new(alpha: f64, m_e: f64) -> Self {
        ExperimentConfig {
            alpha,
            m_e,
            load_label: None,
            grip_label: None,
            bias: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be >= 1, got {}", self.alpha)));
        }
        if !(self.m_e >= 0.0 && self.m_e.is_finite()) {
            return Err(Error::invalid("M_e", format!("must be >= 0, got {}", self.m_e)));
        }
        Ok(())
    }

    /// Exoskeleton inertia felt through the amplification loop, `M_e/α`.
    pub fn attenuated_inertia(&self) -> f64 {
        self.m_e / self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    M1,
    M2,
    M3,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::M1, ModelKind::M2, ModelKind::M3];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::M1 => "M1",
            ModelKind::M2 => "M2",
            ModelKind::M3 => "M3",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M1" | "m1" => Ok(ModelKind::M1),
            "M2" | "m2" => Ok(ModelKind::M2),
            "M3" | "m3" => Ok(ModelKind::M3),
            other => Err(Error::invalid("model", format!("unknown model {other:?}"))),
        }
    }
}

/// Viscous model: `M s² + B_h s + K_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParamsM1 {
    pub k_h: f64,
    pub b_h: f64,
    pub m: f64,
}

/// Hysteretic model: `M s² + C_h j + K_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParamsM2 {
    pub k_h: f64,
    pub c_h: f64,
    pub m: f64,
}

/// Combined model: `M s² + B_h s + C_h j + K_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParamsM3 {
    pub k_h: f64,
    pub c_h: f64,
    pub b_h: f64,
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    M1(ModelParamsM1),
    M2(ModelParamsM2),
    M3(ModelParamsM3),
}

impl From<ModelParamsM1> for ModelParams {
    fn from(p: ModelParamsM1) -> Self {
        ModelParams::M1(p)
    }
}

impl From<ModelParamsM2> for ModelParams {
    fn from(p: ModelParamsM2) -> Self {
        ModelParams::M2(p)
    }
}

impl From<ModelParamsM3> for ModelParams {
    fn from(p: ModelParamsM3) -> Self {
        ModelParams::M3(p)
    }
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::M1(_) => ModelKind::M1,
            ModelParams::M2(_) => ModelKind::M2,
            ModelParams::M3(_) => ModelKind::M3,
        }
    }

    pub fn k_h(&self) -> f64 {
        match *self {
            ModelParams::M1(p) => p.k_h,
            ModelParams::M2(p) => p.k_h,
            ModelParams::M3(p) => p.k_h,
        }
    }

    pub fn m(&self) -> f64 {
        match *self {
            ModelParams::M1(p) => p.m,
            ModelParams::M2(p) => p.m,
            ModelParams::M3(p) => p.m,
        }
    }

    pub fn c_h(&self) -> Option<f64> {
        match *self {
            ModelParams::M1(_) => None,
            ModelParams::M2(p) => Some(p.c_h),
            ModelParams::M3(p) => Some(p.c_h),
        }
    }

    pub fn b_h(&self) -> Option<f64> {
        match *self {
            ModelParams::M1(p) => Some(p.b_h),
            ModelParams::M2(_) => None,
            ModelParams::M3(p) => Some(p.b_h),
        }
    }

    /// Same model with a different inertia term.
    pub fn with_inertia(&self, m: f64) -> ModelParams {
        let mut out = *self;
        match &mut out {
            ModelParams::M1(p) => p.m = m,
            ModelParams::M2(p) => p.m = m,
            ModelParams::M3(p) => p.m = m,
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_h() > 0.0 && self.k_h().is_finite()) {
            return Err(Error::invalid("K_h", format!("must be positive, got {}", self.k_h())));
        }
        if !(self.m() > 0.0 && self.m().is_finite()) {
            return Err(Error::invalid("M", format!("must be positive, got {}", self.m())));
        }
        let finite = self.c_h().is_none_or(f64::is_finite) && self.b_h().is_none_or(f64::is_finite);
        if !finite {
            return Err(Error::invalid("params", "damping terms must be finite"));
        }
        Ok(())
    }

    /// Dynamic stiffness at `s = jω`.
    pub fn eval(&self, omega: f64) -> Complex64 {
        let re = self.k_h() - self.m() * omega * omega;
        let im = self.c_h().unwrap_or(0.0) + self.b_h().unwrap_or(0.0) * omega;
        Complex64::new(re, im)
    }

    pub fn natural_frequency(&self) -> Result<f64> {
        natural_frequency(self.k_h(), self.m())
    }

    pub fn damping_ratio(&self) -> f64 {
        damping_ratio(self)
    }

    pub fn derived(&self) -> Result<DerivedQuantities> {
        Ok(DerivedQuantities {
            omega_n: self.natural_frequency()?,
            zeta: self.damping_ratio(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub omega_n: f64,
    pub zeta: f64,
}

/// Adds the attenuated exoskeleton inertia `(M_e/α)(jω)²` to every sample.
pub fn compensate_inertia(frf: &FrequencyResponse, cfg: &ExperimentConfig) -> FrequencyResponse {
    let m = cfg.attenuated_inertia();
    let mut out = frf.map_values(|w, v| v - Complex64::new(m * w * w, 0.0));
    out.meta.alpha = cfg.alpha;
    out.meta.m_e = cfg.m_e;
    out
}

/// Simple linear regression `y ≈ a + b·x` on centered sums. Returns `(a, b)`.
fn line_fit(x: &[f64], y: &[f64], what: &str) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let scale: f64 = x.iter().map(|v| v * v).sum();
    if !(sxx > 1e-24 * scale) || sxx == 0.0 {
        return Err(Error::RankDeficient(format!("{what}: regressor has no spread")));
    }
    let slope = sxy / sxx;
    Ok((ym - slope * xm, slope))
}

fn require_samples(samples: &[FrequencySample], min: usize) -> Result<()> {
    if samples.len() < min {
        return Err(Error::invalid(
            "frf",
            format!("need at least {min} samples, got {}", samples.len()),
        ));
    }
    Ok(())
}

/// OLS of `Re S_k` against `[1, −ω_k²]`, giving `(K_h, M)`.
pub fn fit_real_part(samples: &[FrequencySample]) -> Result<(f64, f64)> {
    require_samples(samples, 2)?;
    let x: Vec<f64> = samples.iter().map(|s| -s.omega * s.omega).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.value.re).collect();
    line_fit(&x, &y, "real part")
}

fn positive_real_part(samples: &[FrequencySample]) -> Result<(f64, f64)> {
    let (k_h, m) = fit_real_part(samples)?;
    if !(k_h > 0.0) {
        return Err(Error::NonPhysicalFit(format!("K_h = {k_h} is not positive")));
    }
    if !(m > 0.0) {
        return Err(Error::NonPhysicalFit(format!("M = {m} is not positive")));
    }
    Ok((k_h, m))
}

pub fn fit_m1(samples: &[FrequencySample]) -> Result<ModelParamsM1> {
    let (k_h, m) = positive_real_part(samples)?;
    let num: f64 = samples.iter().map(|s| s.value.im * s.omega).sum();
    let den: f64 = samples.iter().map(|s| s.omega * s.omega).sum();
    Ok(ModelParamsM1 { k_h, b_h: num / den, m })
}

pub fn fit_m2(samples: &[FrequencySample]) -> Result<ModelParamsM2> {
    let (k_h, m) = positive_real_part(samples)?;
    let c_h = samples.iter().map(|s| s.value.im).sum::<f64>() / samples.len() as f64;
    Ok(ModelParamsM2 { k_h, c_h, m })
}

pub fn fit_m3(samples: &[FrequencySample]) -> Result<ModelParamsM3> {
    let (k_h, m) = positive_real_part(samples)?;
    let x: Vec<f64> = samples.iter().map(|s| s.omega).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.value.im).collect();
    let (c_h, b_h) = line_fit(&x, &y, "imaginary part")?;
    Ok(ModelParamsM3 { k_h, c_h, b_h, m })
}

pub fn fit(kind: ModelKind, samples: &[FrequencySample]) -> Result<ModelParams> {
    Ok(match kind {
        ModelKind::M1 => fit_m1(samples)?.into(),
        ModelKind::M2 => fit_m2(samples)?.into(),
        ModelKind::M3 => fit_m3(samples)?.into(),
    })
}

/// `sqrt(K_h/M)`.
pub fn natural_frequency(k_h: f64, m: f64) -> Result<f64> {
    if !(k_h > 0.0) {
        return Err(Error::invalid("K_h", format!("must be positive, got {k_h}")));
    }
    if !(m > 0.0) {
        return Err(Error::invalid("M", format!("must be positive, got {m}")));
    }
    Ok((k_h / m).sqrt())
}

/// Damping ratio from the imaginary part at resonance:
/// M1 `B_h/(2√(K_h M))`, M2 `C_h/(2K_h)`, M3 the sum of both.
pub fn damping_ratio(params: &ModelParams) -> f64 {
    let viscous = |k: f64, b: f64, m: f64| b / (2.0 * (k * m).sqrt());
    let hysteretic = |k: f64, c: f64| c / (2.0 * k);
    match *params {
        ModelParams::M1(p) => viscous(p.k_h, p.b_h, p.m),
        ModelParams::M2(p) => hysteretic(p.k_h, p.c_h),
        ModelParams::M3(p) => viscous(p.k_h, p.b_h, p.m) + hysteretic(p.k_h, p.c_h),
    }
}

/// One row of the parameter report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub exp: String,
    pub model: ModelKind,
    #[serde(rename = "K_h")]
    pub k_h: f64,
    #[serde(rename = "C_h", default, skip_serializing_if = "Option::is_none")]
    pub c_h: Option<f64>,
    #[serde(rename = "B_h", default, skip_serializing_if = "Option::is_none")]
    pub b_h: Option<f64>,
    #[serde(rename = "M")]
    pub m: f64,
    pub omega_n: f64,
    pub zeta: f64,
    pub rss: f64,
}

impl ParamRecord {
    pub fn new(exp: impl Into<String>, params: &ModelParams, rss: f64) -> Result<Self> {
        Ok(ParamRecord {
            exp: exp.into(),
            model: params.kind(),
            k_h: params.k_h(),
            c_h: params.c_h(),
            b_h: params.b_h(),
            m: params.m(),
            omega_n: params.natural_frequency()?,
            zeta: params.damping_ratio(),
            rss,
        })
    }

    pub fn params(&self) -> Result<ModelParams> {
        let missing = |name: &'static str| Error::invalid(name, format!("missing for model {}", self.model));
        let p = match self.model {
            ModelKind::M1 => ModelParams::M1(ModelParamsM1 {
                k_h: self.k_h,
                b_h: self.b_h.ok_or_else(|| missing("B_h"))?,
                m: self.m,
            }),
            ModelKind::M2 => ModelParams::M2(ModelParamsM2 {
                k_h: self.k_h,
                c_h: self.c_h.ok_or_else(|| missing("C_h"))?,
                m: self.m,
            }),
            ModelKind::M3 => ModelParams::M3(ModelParamsM3 {
                k_h: self.k_h,
                c_h: self.c_h.ok_or_else(|| missing("C_h"))?,
                b_h: self.b_h.ok_or_else(|| missing("B_h"))?,
                m: self.m,
            }),
        };
        Ok(p)
    }
}

/// Fits all three models and reports parameters, derived quantities and RSS.
pub fn identify_all(exp: &str, samples: &[FrequencySample]) -> Result<Vec<ParamRecord>> {
    ModelKind::ALL
        .iter()
        .map(|&kind| {
            let params = fit(kind, samples)?;
            let rss = crate::stats::rss_samples(samples, &params);
            ParamRecord::new(exp, &params, rss)
        })
        .collect()
}
