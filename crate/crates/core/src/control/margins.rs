use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{eval_plant, Controller, PlantConfig};

pub const GRID_POINTS_PER_DECADE: usize = 400;

/// Relative width at which crossover bisection stops.
const CROSSOVER_REL_TOL: f64 = 1e-10;

/// Log-spaced grid from `lo` to `hi` inclusive with `per_decade` points per decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let n = ((b - a) * per_decade as f64).ceil().max(1.0) as usize;
    (0..=n).map(|i| 10f64.powf(a + (b - a) * i as f64 / n as f64)).collect()
}

/// Grid from two decades below ω_{h-e} to two decades above ω_SEA.
pub fn margin_grid(cfg: &PlantConfig) -> Vec<f64> {
    log_grid(
        cfg.omega_coupled() / 100.0,
        cfg.omega_sea * 100.0,
        GRID_POINTS_PER_DECADE,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub omega: f64,
    /// `180° + arg L` with the phase unwrapped from the low end of the grid.
    pub phase_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    /// Lowest unity-gain crossing; `None` when the grid contains none.
    pub omega_crossover: Option<f64>,
    pub phase_margin: Option<f64>,
    pub all_crossovers: Vec<Crossover>,
}

impl MarginReport {
    pub fn has_crossover(&self) -> bool {
        self.omega_crossover.is_some()
    }
}

fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Locates every unity-gain crossing of `open_loop` on `grid` and refines it by bisection in log ω.
pub fn margins(open_loop: impl Fn(f64) -> Complex64, grid: &[f64]) -> MarginReport {
    let values: Vec<Complex64> = grid.iter().map(|&w| open_loop(w)).collect();
    let log_mag: Vec<f64> = values.iter().map(|v| v.norm().ln()).collect();

    let mut unwrapped = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let phase = if i == 0 {
            v.arg()
        } else {
            unwrapped[i - 1] + wrap_pi(v.arg() - values[i - 1].arg())
        };
        unwrapped.push(phase);
    }

    let mut crossings = Vec::new();
    for i in 0..grid.len().saturating_sub(1) {
        let (g0, g1) = (log_mag[i], log_mag[i + 1]);
        let omega = if g0 == 0.0 {
            grid[i]
        } else if g0.signum() != g1.signum() && g1 != 0.0 {
            let (mut a, mut b) = (grid[i].ln(), grid[i + 1].ln());
            let ga = g0;
            while (b - a) > CROSSOVER_REL_TOL {
                let mid = 0.5 * (a + b);
                let gm = open_loop(mid.exp()).norm().ln();
                if gm.signum() == ga.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            (0.5 * (a + b)).exp()
        } else {
            continue;
        };
        let phase = unwrapped[i] + wrap_pi(open_loop(omega).arg() - values[i].arg());
        crossings.push(Crossover {
            omega,
            phase_margin: 180.0 + phase.to_degrees(),
        });
    }
    if let (Some(&last_g), Some(&last_w)) = (log_mag.last(), grid.last()) {
        if last_g == 0.0 && grid.len() > 1 {
            crossings.push(Crossover {
                omega: last_w,
                phase_margin: 180.0 + unwrapped[unwrapped.len() - 1].to_degrees(),
            });
        }
    }

    MarginReport {
        omega_crossover: crossings.first().map(|c| c.omega),
        phase_margin: crossings.first().map(|c| c.phase_margin),
        all_crossovers: crossings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "K_h")]
    pub k_h: f64,
    pub report: MarginReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Smallest lowest-crossover margin over points that have a crossover.
    pub min_phase_margin: Option<f64>,
    pub worst_k_h: Option<f64>,
    /// Stiffness values whose margin falls below the target or that have no crossover.
    pub violating_k_h: Vec<f64>,
}

impl SweepReport {
    pub fn worst(&self) -> Option<&MarginReport> {
        let k = self.worst_k_h?;
        self.points.iter().find(|p| p.k_h == k).map(|p| &p.report)
    }
}

/// Margins of `controller` against `base` with `K_h` replaced by every value in `k_grid`.
pub fn robustness_sweep_with(
    controller: &Controller,
    base: &PlantConfig,
    k_grid: &[f64],
    target_phi: f64,
) -> SweepReport {
    let points: Vec<SweepPoint> = k_grid
        .iter()
        .map(|&k_h| {
            let plant = base.with_k_h(k_h);
            let report = margins(|w| controller.response(w) * eval_plant(&plant, w), &margin_grid(&plant));
            SweepPoint { k_h, report }
        })
        .collect();

    let mut min_phase_margin: Option<f64> = None;
    let mut worst_k_h = None;
    let mut violating_k_h = Vec::new();
    for p in &points {
        match p.report.phase_margin {
            Some(pm) => {
                if min_phase_margin.is_none_or(|m| pm < m) {
                    min_phase_margin = Some(pm);
                    worst_k_h = Some(p.k_h);
                }
                if pm < target_phi {
                    violating_k_h.push(p.k_h);
                }
            }
            None => violating_k_h.push(p.k_h),
        }
    }
    SweepReport {
        points,
        min_phase_margin,
        worst_k_h,
        violating_k_h,
    }
}

/// Sweeps the ideal fractional controller of `design` over `k_grid`.
pub fn robustness_sweep(design: &super::Design, k_grid: &[f64]) -> SweepReport {
    robustness_sweep_with(&design.ideal_controller(), &design.plant, k_grid, design.spec.phi)
}
