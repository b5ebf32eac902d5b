//! Augmentation plant built on the one-parameter complex-stiffness model,
//! fractional-order controller synthesis and loop-margin analysis.
//!
//! With the human modelled as `S_h = M_h s² + K_h(1 + c_h j)` and the coupled
//! human/exoskeleton as `S_he = (M_h + M_e) s² + K_h(1 + c_h j)`, the loop
//! from desired actuator torque to amplified torque is
//!
//! ```text
//! P_α(jω) = α · S_{h-e/α}(jω) / S_he(jω) · G_SEA(jω)
//! ```
//!
//! where `S_{h-e/α}` uses the perceived inertia `M_h + M_e/α` and `G_SEA` is a
//! second-order low-pass.

mod design;
mod fractional;
mod margins;
mod tf;

pub use design::{bode_table, design, BodePoint, Design, DesignOptions, DesignSpec};
pub use fractional::{
    cascade_phase_error, choose_fractional_order, lag_cascade, lag_cascade_with_tolerance, tune_gain, CascadeGeometry,
    Controller, FractionalController, FractionalOrderChoice, LagCascade, DEFAULT_RIPPLE_TOLERANCE_DEG,
};
pub use margins::{
    log_grid, margin_grid, margins, robustness_sweep, robustness_sweep_with, Crossover, MarginReport, SweepPoint,
    SweepReport, GRID_POINTS_PER_DECADE,
};
pub use tf::RationalTF;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default SEA force-control bandwidth, 10 Hz.
pub const DEFAULT_OMEGA_SEA: f64 = 2.0 * std::f64::consts::PI * 10.0;
pub const DEFAULT_ZETA_SEA: f64 = 0.7;

/// `S_h = M_h s² + K_h(1 + c_h j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneParamModel {
    #[serde(rename = "K_h")]
    pub k_h: f64,
    pub c_h: f64,
    #[serde(rename = "M_h")]
    pub m_h: f64,
}

impl OneParamModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_h > 0.0 && self.k_h.is_finite()) {
            return Err(Error::invalid("K_h", format!("must be positive, got {}", self.k_h)));
        }
        if !(self.c_h >= 0.0 && self.c_h.is_finite()) {
            return Err(Error::invalid("c_h", format!("must be >= 0, got {}", self.c_h)));
        }
        if !(self.m_h > 0.0 && self.m_h.is_finite()) {
            return Err(Error::invalid("M_h", format!("must be positive, got {}", self.m_h)));
        }
        Ok(())
    }

    /// Dynamic stiffness with inertia `inertia` at `s = jω`.
    pub fn stiffness(&self, inertia: f64, omega: f64) -> Complex64 {
        Complex64::new(self.k_h - inertia * omega * omega, self.k_h * self.c_h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub model: OneParamModel,
    #[serde(rename = "M_e")]
    pub m_e: f64,
    pub alpha: f64,
    #[serde(default = "default_omega_sea")]
    pub omega_sea: f64,
    #[serde(default = "default_zeta_sea")]
    pub zeta_sea: f64,
}

fn default_omega_sea() -> f64 {
    DEFAULT_OMEGA_SEA
}

fn default_zeta_sea() -> f64 {
    DEFAULT_ZETA_SEA
}

impl PlantConfig {
    pub fn new(model: OneParamModel, m_e: f64, alpha: f64) -> Self {
        PlantConfig {
            model,
            m_e,
            alpha,
            omega_sea: DEFAULT_OMEGA_SEA,
            zeta_sea: DEFAULT_ZETA_SEA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be >= 1, got {}", self.alpha)));
        }
        if !(self.m_e >= 0.0 && self.m_e.is_finite()) {
            return Err(Error::invalid("M_e", format!("must be >= 0, got {}", self.m_e)));
        }
        if !(self.zeta_sea > 0.0 && self.zeta_sea.is_finite()) {
            return Err(Error::invalid(
                "zeta_sea",
                format!("must be positive, got {}", self.zeta_sea),
            ));
        }
        if !(self.omega_sea > self.omega_perceived()) {
            return Err(Error::invalid(
                "omega_sea",
                format!(
                    "{} rad/s must exceed the perceived resonance {} rad/s",
                    self.omega_sea,
                    self.omega_perceived()
                ),
            ));
        }
        Ok(())
    }

    pub fn with_k_h(&self, k_h: f64) -> PlantConfig {
        let mut out = *self;
        out.model.k_h = k_h;
        out
    }

    /// `M_h + M_e/α`
    pub fn perceived_inertia(&self) -> f64 {
        self.model.m_h + self.m_e / self.alpha
    }

    /// `M_h + M_e`
    pub fn coupled_inertia(&self) -> f64 {
        self.model.m_h + self.m_e
    }

    /// ω_{h-e}: resonance of the coupled human/exoskeleton.
    pub fn omega_coupled(&self) -> f64 {
        (self.model.k_h / self.coupled_inertia()).sqrt()
    }

    /// ω_{h-e/α}: resonance with the attenuated exoskeleton inertia.
    pub fn omega_perceived(&self) -> f64 {
        (self.model.k_h / self.perceived_inertia()).sqrt()
    }

    /// High-frequency gain of the augmentation ratio, `(α M_h + M_e)/(M_h + M_e)`.
    pub fn inertia_ratio_gain(&self) -> f64 {
        (self.alpha * self.model.m_h + self.m_e) / self.coupled_inertia()
    }

    pub fn sea(&self, omega: f64) -> Complex64 {
        let w2 = self.omega_sea * self.omega_sea;
        let s = Complex64::new(0.0, omega);
        Complex64::new(w2, 0.0) / (s * s + 2.0 * self.zeta_sea * self.omega_sea * s + w2)
    }
}

/// `τ_α/τ_s = α·S_{h-e/α}/S_he`.
pub fn augmentation_error_ratio(cfg: &PlantConfig, omega: f64) -> Complex64 {
    let perceived = cfg.model.stiffness(cfg.perceived_inertia(), omega);
    let coupled = cfg.model.stiffness(cfg.coupled_inertia(), omega);
    cfg.alpha * perceived / coupled
}

/// `P_α(jω) = α·S_{h-e/α}/S_he·G_SEA`.
pub fn eval_plant(cfg: &PlantConfig, omega: f64) -> Complex64 {
    augmentation_error_ratio(cfg, omega) * cfg.sea(omega)
}
