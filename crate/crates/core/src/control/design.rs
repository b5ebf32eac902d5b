use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    choose_fractional_order, eval_plant, lag_cascade_with_tolerance, margin_grid, margins, tune_gain, CascadeGeometry,
    Controller, FractionalController, FractionalOrderChoice, LagCascade, MarginReport, PlantConfig,
    DEFAULT_RIPPLE_TOLERANCE_DEG,
};
use crate::error::{Error, Result};

/// Sections per decade of cascade band used when no count is given.
const DEFAULT_SECTIONS_PER_DECADE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    /// Target phase margin (deg).
    pub phi: f64,
    pub f: f64,
    pub k_f: f64,
    pub omega_c: f64,
    pub cascade: CascadeGeometry,
}

impl DesignSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.f > 0.0 && self.f < 1.0) {
            return Err(Error::invalid("f", format!("must lie in (0, 1), got {}", self.f)));
        }
        if !(self.k_f > 0.0 && self.k_f.is_finite()) {
            return Err(Error::invalid("k_f", "must be positive"));
        }
        self.cascade.validate()
    }
}

/// Overrides for [`design`]; `None` selects the default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    /// Default: midpoint of the admissible interval.
    pub f: Option<f64>,
    /// Default: geometric mean of ω_{h-e} and ω_{h-e/α}.
    pub omega_c: Option<f64>,
    /// Default: four sections per decade, raised to the ripple requirement.
    pub n_sections: Option<usize>,
    /// Default: `[ω_{h-e}/10, 10·ω_{h-e/α}]`.
    pub band: Option<(f64, f64)>,
    pub ripple_tolerance_deg: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            f: None,
            omega_c: None,
            n_sections: None,
            band: None,
            ripple_tolerance_deg: DEFAULT_RIPPLE_TOLERANCE_DEG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub spec: DesignSpec,
    pub plant: PlantConfig,
    pub admissible_f: FractionalOrderChoice,
    /// Margins with the ideal `k_f/s^f` element.
    pub ideal_margins: MarginReport,
    /// Margins with the lag-cascade realisation.
    pub cascade_margins: MarginReport,
}

impl Design {
    pub fn ideal_controller(&self) -> Controller {
        Controller::Ideal(FractionalController {
            k_f: self.spec.k_f,
            f: self.spec.f,
        })
    }

    pub fn cascade(&self) -> LagCascade {
        LagCascade {
            f: self.spec.f,
            geometry: self.spec.cascade,
        }
    }

    pub fn cascade_controller(&self) -> Controller {
        Controller::Cascade {
            k_f: self.spec.k_f,
            cascade: self.cascade(),
        }
    }

    pub fn plant_response(&self, omega: f64) -> Complex64 {
        eval_plant(&self.plant, omega)
    }
}

/// Synthesises `C_α = k_f/s^f` for `plant` with target margin `phi_deg`, realises
/// it as a lag cascade and reports both loops' margins.
pub fn design(plant: &PlantConfig, phi_deg: f64, options: &DesignOptions) -> Result<Design> {
    plant.validate()?;
    let admissible = choose_fractional_order(plant.model.c_h, phi_deg)?;
    let f = match options.f {
        Some(f) if f > admissible.lower && f < admissible.upper => f,
        Some(f) => {
            return Err(Error::invalid(
                "f",
                format!("{f} outside the admissible interval (0, {})", admissible.upper),
            ))
        }
        None => admissible.f,
    };
    let omega_c = options
        .omega_c
        .unwrap_or_else(|| (plant.omega_coupled() * plant.omega_perceived()).sqrt());
    let k_f = tune_gain(plant, f, omega_c)?;

    let band = options
        .band
        .unwrap_or((plant.omega_coupled() / 10.0, plant.omega_perceived() * 10.0));
    let n = match options.n_sections {
        Some(n) => n,
        None => {
            let decades = (band.1 / band.0).log10();
            let base = (DEFAULT_SECTIONS_PER_DECADE * decades).ceil().max(1.0) as usize;
            match lag_cascade_with_tolerance(f, band, base, options.ripple_tolerance_deg) {
                Err(Error::InsufficientSections { required, .. }) => required,
                _ => base,
            }
        }
    };
    let cascade = lag_cascade_with_tolerance(f, band, n, options.ripple_tolerance_deg)?;

    let spec = DesignSpec {
        phi: phi_deg,
        f,
        k_f,
        omega_c,
        cascade: cascade.geometry,
    };
    spec.validate()?;

    let grid = margin_grid(plant);
    let ideal = FractionalController { k_f, f };
    let ideal_margins = margins(|w| ideal.response(w) * eval_plant(plant, w), &grid);
    let cascade_margins = margins(|w| k_f * cascade.response(w) * eval_plant(plant, w), &grid);

    Ok(Design {
        spec,
        plant: *plant,
        admissible_f: admissible,
        ideal_margins,
        cascade_margins,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodePoint {
    pub omega: f64,
    pub mag_db: f64,
    pub phase_deg: f64,
}

/// Magnitude (dB) and unwrapped phase (deg) of `response` over `grid`.
pub fn bode_table(response: impl Fn(f64) -> Complex64, grid: &[f64]) -> Vec<BodePoint> {
    let mut out: Vec<BodePoint> = Vec::with_capacity(grid.len());
    let mut prev_arg = 0.0;
    let mut acc = 0.0;
    for (i, &w) in grid.iter().enumerate() {
        let h = response(w);
        let arg = h.arg();
        if i == 0 {
            acc = arg;
        } else {
            let mut d = arg - prev_arg;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            acc += d;
        }
        prev_arg = arg;
        out.push(BodePoint {
            omega: w,
            mag_db: 20.0 * h.norm().log10(),
            phase_deg: acc.to_degrees(),
        });
    }
    out
}
