use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{eval_plant, PlantConfig, RationalTF};
use crate::error::{Error, Result};

/// Allowed deviation of the cascade phase from `−90f` degrees over the
/// log-central half of its band.
pub const DEFAULT_RIPPLE_TOLERANCE_DEG: f64 = 3.0;

const MAX_SECTIONS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalOrderChoice {
    pub lower: f64,
    pub upper: f64,
    pub f: f64,
}

/// Admissible orders `0 < f < atan(c_h)/90 − φ/90`; picks the midpoint.
pub fn choose_fractional_order(c_h: f64, phi_deg: f64) -> Result<FractionalOrderChoice> {
    if !(c_h >= 0.0 && c_h.is_finite()) {
        return Err(Error::invalid("c_h", format!("must be >= 0, got {c_h}")));
    }
    if !(phi_deg > 0.0 && phi_deg.is_finite()) {
        return Err(Error::invalid("phi", format!("must be positive, got {phi_deg}")));
    }
    let limit_deg = c_h.atan().to_degrees();
    if phi_deg >= limit_deg {
        return Err(Error::InfeasibleMargin { phi_deg, limit_deg });
    }
    let upper = (limit_deg - phi_deg) / 90.0;
    Ok(FractionalOrderChoice {
        lower: 0.0,
        upper,
        f: 0.5 * upper,
    })
}

/// Ideal element `k_f / s^f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalController {
    pub k_f: f64,
    pub f: f64,
}

impl FractionalController {
    /// `k_f·ω^{−f}·e^{−jπf/2}`
    pub fn response(&self, omega: f64) -> Complex64 {
        Complex64::from_polar(self.k_f * omega.powf(-self.f), -PI * self.f / 2.0)
    }
}

/// `k_f = ω_c^f/|P_α(jω_c)|`, placing the ideal loop's unity gain at `ω_c`.
///
/// `ω_c` must lie strictly between ω_{h-e} and ω_{h-e/α}. At `α = 1` the two
/// coincide and `ω_c` must equal that frequency.
pub fn tune_gain(cfg: &PlantConfig, f: f64, omega_c: f64) -> Result<f64> {
    cfg.validate()?;
    if !(0.0..1.0).contains(&f) {
        return Err(Error::invalid("f", format!("must lie in [0, 1), got {f}")));
    }
    let lo = cfg.omega_coupled();
    let hi = cfg.omega_perceived();
    let degenerate = (hi - lo) <= 1e-12 * hi;
    let inside = if degenerate {
        (omega_c - lo).abs() <= 1e-9 * lo
    } else {
        omega_c > lo && omega_c < hi
    };
    if !inside {
        return Err(Error::CrossoverOutOfBand { omega_c, lo, hi });
    }
    Ok(omega_c.powf(f) / eval_plant(cfg, omega_c).norm())
}

/// Pole/zero spacing of a lag cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeGeometry {
    pub n: usize,
    pub p1: f64,
    pub r_pp: f64,
    pub r_zp: f64,
}

impl CascadeGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "need at least one section"));
        }
        if !(self.p1 > 0.0 && self.p1.is_finite()) {
            return Err(Error::invalid("p1", "must be positive"));
        }
        if !(self.r_zp > 1.0) {
            return Err(Error::invalid("r_zp", format!("must exceed 1, got {}", self.r_zp)));
        }
        if !(self.r_pp > self.r_zp) {
            return Err(Error::invalid("r_pp", format!("must exceed r_zp, got {}", self.r_pp)));
        }
        Ok(())
    }
}

/// Product of first-order lags `p1^{−f}·Π (1 + s/z_i)/(1 + s/p_i)` with
/// `p_i = p1·r_pp^{i−1}` and `z_i = r_zp·p_i`, approximating `s^{−f}` on `[p1, z_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCascade {
    pub f: f64,
    #[serde(flatten)]
    pub geometry: CascadeGeometry,
}

impl LagCascade {
    pub fn poles(&self) -> Vec<f64> {
        let g = &self.geometry;
        (0..g.n).map(|i| g.p1 * g.r_pp.powi(i as i32)).collect()
    }

    pub fn zeros(&self) -> Vec<f64> {
        self.poles().into_iter().map(|p| p * self.geometry.r_zp).collect()
    }

    /// `log(r_zp)/log(r_pp)`
    pub fn recovered_order(&self) -> f64 {
        self.geometry.r_zp.ln() / self.geometry.r_pp.ln()
    }

    pub fn band(&self) -> (f64, f64) {
        let g = &self.geometry;
        (g.p1, g.p1 * g.r_pp.powi(g.n as i32 - 1) * g.r_zp)
    }

    pub fn transfer_function(&self) -> RationalTF {
        let poles = self.poles();
        let zeros = self.zeros();
        // (1 + s/z)/(1 + s/p) = (p/z)·(s + z)/(s + p)
        let gain = self.geometry.p1.powf(-self.f) * poles.iter().zip(&zeros).map(|(p, z)| p / z).product::<f64>();
        RationalTF {
            gain,
            zeros: zeros.iter().map(|&z| Complex64::new(-z, 0.0)).collect(),
            poles: poles.iter().map(|&p| Complex64::new(-p, 0.0)).collect(),
        }
    }

    pub fn response(&self, omega: f64) -> Complex64 {
        let s = Complex64::new(0.0, omega);
        let sections: Complex64 = self
            .poles()
            .iter()
            .map(|&p| (1.0 + s / (p * self.geometry.r_zp)) / (1.0 + s / p))
            .product();
        self.geometry.p1.powf(-self.f) * sections
    }

    /// Unwrapped phase in degrees, summed section by section.
    pub fn phase_deg(&self, omega: f64) -> f64 {
        self.poles()
            .iter()
            .map(|&p| (omega / (p * self.geometry.r_zp)).atan() - (omega / p).atan())
            .sum::<f64>()
            .to_degrees()
    }
}

fn build_cascade(f: f64, lo: f64, hi: f64, n: usize) -> LagCascade {
    let r_pp = (hi / lo).powf(1.0 / (n as f64 - 1.0 + f));
    LagCascade {
        f,
        geometry: CascadeGeometry {
            n,
            p1: lo,
            r_pp,
            r_zp: r_pp.powf(f),
        },
    }
}

/// Largest `|phase + 90f|` in degrees over the log-central half of the cascade band.
pub fn cascade_phase_error(cascade: &LagCascade) -> f64 {
    let (lo, hi) = cascade.band();
    let (llo, lhi) = (lo.log10(), hi.log10());
    let span = lhi - llo;
    let (a, b) = (llo + 0.25 * span, lhi - 0.25 * span);
    let points = ((b - a) * 50.0).ceil().max(8.0) as usize;
    let target = -90.0 * cascade.f;
    (0..=points)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / points as f64))
        .map(|w| (cascade.phase_deg(w) - target).abs())
        .fold(0.0, f64::max)
}

/// Lag cascade over `band` with the default phase tolerance.
pub fn lag_cascade(f: f64, band: (f64, f64), n: usize) -> Result<LagCascade> {
    lag_cascade_with_tolerance(f, band, n, DEFAULT_RIPPLE_TOLERANCE_DEG)
}

/// Builds `n` sections spanning `band = (p1, z_n)` with `r_zp = r_pp^f`.
///
/// Fails with the smallest sufficient section count when `n` leaves more
/// than `tolerance_deg` of phase error in the middle of the band.
pub fn lag_cascade_with_tolerance(f: f64, band: (f64, f64), n: usize, tolerance_deg: f64) -> Result<LagCascade> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::invalid("f", format!("must lie in (0, 1), got {f}")));
    }
    let (lo, hi) = band;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(
            "band",
            format!("need 0 < w_lo < w_hi, got [{lo}, {hi}]"),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n", "need at least one section"));
    }
    let cascade = build_cascade(f, lo, hi, n);
    if cascade_phase_error(&cascade) <= tolerance_deg {
        return Ok(cascade);
    }
    match (n + 1..=MAX_SECTIONS).find(|&m| cascade_phase_error(&build_cascade(f, lo, hi, m)) <= tolerance_deg) {
        Some(required) => Err(Error::InsufficientSections { n, required }),
        None => Err(Error::BandTooNarrow { lo, hi, tolerance_deg }),
    }
}

/// Controller realisations that can close the loop.
#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    Ideal(FractionalController),
    Cascade { k_f: f64, cascade: LagCascade },
}

impl Controller {
    pub fn response(&self, omega: f64) -> Complex64 {
        match self {
            Controller::Ideal(c) => c.response(omega),
            Controller::Cascade { k_f, cascade } => *k_f * cascade.response(omega),
        }
    }
}
