//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
//! when a criterion fails that is not listed in `EXPECTED_RED`.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;

use common::*;
use dynstiff::control::{design, eval_plant, lag_cascade, robustness_sweep, DesignOptions, OneParamModel, PlantConfig};
use dynstiff::identify::{damping_ratio, fit, natural_frequency, ModelKind};
use dynstiff::sim::{cycle_work, steady_state_segment, SubjectTruth};
use dynstiff::stats::{f_critical, f_statistic, regress_ch_kh};

/// Criteria known to fail, with the measured shortfall recorded in the project notes.
const EXPECTED_RED: &[u32] = &[7];

type Check = fn() -> (bool, String);

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn nominal_plant() -> PlantConfig {
    PlantConfig::new(
        OneParamModel {
            k_h: 20.0,
            c_h: 0.5,
            m_h: 0.3,
        },
        0.6,
        4.0,
    )
}

fn damping_ratio_consistency() -> (bool, String) {
    let mut worst = (0.0, String::new());
    for row in &table().experiments {
        for kind in ModelKind::ALL {
            let err = (damping_ratio(&row.params(kind)) - row.zeta(kind)).abs();
            if err > worst.0 {
                worst = (err, format!("{} {}", kind, row.exp));
            }
        }
    }
    (
        worst.0 <= 0.01,
        format!("45 rows, max |Δζ| = {:.4} ({})", worst.0, worst.1),
    )
}

fn natural_frequency_consistency() -> (bool, String) {
    let mut worst = (0.0, String::new());
    for row in &table().experiments {
        let err = rel(natural_frequency(row.k_h, row.m).unwrap(), row.omega_n);
        if err > worst.0 {
            worst = (err, row.exp.clone());
        }
    }
    (
        worst.0 <= 0.02,
        format!("15 rows, max rel err = {:.4} ({})", worst.0, worst.1),
    )
}

fn critical_value() -> (bool, String) {
    let f = f_critical(10, 0.05).unwrap();
    ((f - 4.49).abs() <= 0.01, format!("F_crit(1, 16; 0.05) = {f:.4}"))
}

/// R² from raw sums, `r² = (nΣxy − ΣxΣy)² / ((nΣx² − (Σx)²)(nΣy² − (Σy)²))`.
fn r_squared_oracle(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (sx, sy) = pairs.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let syy: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy).powi(2) / ((n * sxx - sx * sx) * (n * syy - sy * sy))
}

fn regression_ordering() -> (bool, String) {
    let t = table();
    let m2 = t.stiffness_hysteresis_pairs(ModelKind::M2);
    let m3 = t.stiffness_hysteresis_pairs(ModelKind::M3);
    let r2 = regress_ch_kh(&m2).unwrap().r_squared;
    let r3 = regress_ch_kh(&m3).unwrap().r_squared;
    let (o2, o3) = (r_squared_oracle(&m2), r_squared_oracle(&m3));
    let agree = (r2 - o2).abs() <= 1e-9 && (r3 - o3).abs() <= 1e-9;
    (
        agree && r2 > r3,
        format!(
            "R²(M2) = {r2:.4}, R²(M3) = {r3:.4}, oracle Δ = {:.1e}",
            (r2 - o2).abs().max((r3 - o3).abs())
        ),
    )
}

fn round_trip() -> (bool, String) {
    let mut worst = (0.0, String::new());
    for exp in ["I.1", "II.3", "III.1"] {
        let r = row(exp);
        for kind in ModelKind::ALL {
            let frf = measure(&r, &truth_for(&r, kind));
            let fitted = fit(kind, frf.samples()).unwrap();
            let err = max_param_error(&fitted, &r.params(kind));
            if err >= worst.0 {
                worst = (err, format!("{kind} {exp}"));
            }
        }
    }
    (
        worst.0 <= 1e-6,
        format!("9 fits, max rel err = {:.2e} ({})", worst.0, worst.1),
    )
}

fn statistical_power() -> (bool, String) {
    let r = row("II.3");
    let base = truth_for(&r, ModelKind::M2);
    let trials = 200;
    let mut f13 = Vec::with_capacity(trials);
    let mut f23 = Vec::with_capacity(trials);
    for seed in 0..trials as u64 {
        let frf = measure(&r, &base.with_noise(0.05, 0.0, seed));
        let recs = fit_all(&frf);
        let n = frf.len();
        let full = rss_of(&recs, ModelKind::M3);
        f13.push(f_statistic(rss_of(&recs, ModelKind::M1), full, n).unwrap());
        f23.push(f_statistic(rss_of(&recs, ModelKind::M2), full, n).unwrap());
    }
    let hits = f13.iter().filter(|&&f| f > 4.49).count();
    let share = hits as f64 / trials as f64;
    let (m13, m23) = (median(&mut f13), median(&mut f23));
    (
        share >= 0.95 && m23 < m13,
        format!("F(M1-M3) > 4.49 in {hits}/{trials}; median F(M2-M3) = {m23:.3} vs F(M1-M3) = {m13:.3e}"),
    )
}

fn plant_asymptotes() -> (bool, String) {
    let cfg = nominal_plant();
    let low = eval_plant(&cfg, cfg.omega_coupled() / 100.0).norm();
    let w_mid = (cfg.omega_perceived() * cfg.omega_sea).sqrt();
    let mid = eval_plant(&cfg, w_mid).norm();
    let ratio = (cfg.alpha * cfg.model.m_h + cfg.m_e) / (cfg.model.m_h + cfg.m_e);
    let (e_low, e_mid) = (rel(low, cfg.alpha), rel(mid, ratio));
    (
        e_low <= 0.02 && e_mid <= 0.02,
        format!(
            "|P|(ω_he/100) = {low:.4} vs {} ({:.2}%); |P|({w_mid:.2}) = {mid:.4} vs {ratio:.4} ({:.2}%)",
            cfg.alpha,
            100.0 * e_low,
            100.0 * e_mid
        ),
    )
}

fn fractional_fidelity() -> (bool, String) {
    let c = lag_cascade(0.2, (0.5, 500.0), 12).unwrap();
    let centre = (0.5f64 * 500.0).sqrt().log10();
    let n = 801;
    let lw: Vec<f64> = (0..n).map(|i| centre - 1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let db: Vec<f64> = lw
        .iter()
        .map(|&x| 20.0 * c.response(10f64.powf(x)).norm().log10())
        .collect();
    let phase_err = lw
        .iter()
        .map(|&x| (c.phase_deg(10f64.powf(x)) + 18.0).abs())
        .fold(0.0, f64::max);
    let xm = lw.iter().sum::<f64>() / n as f64;
    let ym = db.iter().sum::<f64>() / n as f64;
    let slope = lw.iter().zip(&db).map(|(x, y)| (x - xm) * (y - ym)).sum::<f64>()
        / lw.iter().map(|x| (x - xm).powi(2)).sum::<f64>();
    (
        phase_err <= 3.0 && (slope + 4.0).abs() <= 1.0,
        format!("max |phase + 18°| = {phase_err:.3}°, slope = {slope:.3} dB/dec"),
    )
}

fn margin_guarantee() -> (bool, String) {
    let d = design(&nominal_plant(), 10.0, &DesignOptions::default()).unwrap();
    let pm = d.ideal_margins.phase_margin.unwrap_or(f64::NEG_INFINITY);
    let k_grid: Vec<f64> = (0..=60).map(|i| 10.0 + (48.6 - 10.0) * i as f64 / 60.0).collect();
    let sweep = robustness_sweep(&d, &k_grid);
    let all_cross = sweep.points.iter().all(|p| p.report.has_crossover());
    let min_pm = sweep.min_phase_margin.unwrap_or(f64::NEG_INFINITY);
    (
        pm >= 10.0 && all_cross && min_pm > 0.0,
        format!(
            "PM = {pm:.2}° at ω_c = {:.3}; sweep min PM = {min_pm:.2}° at K_h = {:.2}",
            d.ideal_margins.omega_crossover.unwrap_or(f64::NAN),
            sweep.worst_k_h.unwrap_or(f64::NAN)
        ),
    )
}

fn hysteresis_work() -> (bool, String) {
    let r = row("II.3");
    let truth = SubjectTruth::noiseless(r.params(ModelKind::M2));
    let (omega, a) = (4.0, 0.1);
    let period = 2.0 * PI / omega;
    let dt = period / 20_000.0;
    let (mut tau, mut theta) = steady_state_segment(&truth, omega, a, period, dt, 0);
    tau.push(tau[0]);
    theta.push(theta[0]);
    let w = cycle_work(&tau, &theta);
    let expected = PI * r.m2.c_h * a * a;
    (
        rel(w, expected) <= 0.01,
        format!("∮τdθ = {w:.6} vs πC_hA² = {expected:.6}"),
    )
}

fn low_frequency_phase() -> (bool, String) {
    let phases: Vec<f64> = table()
        .experiments
        .iter()
        .map(|r| (r.m2.c_h / r.k_h).atan().to_degrees())
        .collect();
    let lo = phases.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = phases.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo >= 22.0 && hi <= 46.0, format!("M2 phase range [{lo:.2}°, {hi:.2}°]"))
}

fn main() -> ExitCode {
    let criteria: [(u32, &'static str, Check); 11] = [
        (1, "damping-ratio consistency", damping_ratio_consistency),
        (2, "natural-frequency consistency", natural_frequency_consistency),
        (3, "F critical value", critical_value),
        (4, "regression ordering", regression_ordering),
        (5, "round-trip identification", round_trip),
        (6, "statistical power", statistical_power),
        (7, "plant asymptotes", plant_asymptotes),
        (8, "fractional approximation fidelity", fractional_fidelity),
        (9, "margin guarantee", margin_guarantee),
        (10, "hysteresis work", hysteresis_work),
        (11, "low-frequency phase", low_frequency_phase),
    ];
    let outcomes: Vec<Outcome> = criteria
        .iter()
        .map(|&(id, name, run)| {
            let (pass, detail) = run();
            Outcome { id, name, pass, detail }
        })
        .collect();

    println!("\nacceptance criteria");
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("  [{tag}] {:>2}. {}: {}", o.id, o.name, o.detail);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let unexpected: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.pass && !EXPECTED_RED.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let recovered: Vec<u32> = outcomes
        .iter()
        .filter(|o| o.pass && EXPECTED_RED.contains(&o.id))
        .map(|o| o.id)
        .collect();
    println!("  {passed}/{} passed; known failures: {EXPECTED_RED:?}", outcomes.len());
    if !recovered.is_empty() {
        println!("  criteria {recovered:?} now pass; remove them from EXPECTED_RED");
    }
    if unexpected.is_empty() && recovered.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("  unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
