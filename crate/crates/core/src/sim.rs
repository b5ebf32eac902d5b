//! Synthetic subjects: per-frequency steady-state torque/angle records.
//!
//! Hysteretic damping has no causal time-domain realisation, so each slot of
//! the protocol is filled with the steady-state response at the slot's chirp
//! frequency instead of integrating an ODE.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identify::{
    compensate_inertia, ExperimentConfig, ModelKind, ModelParams, ModelParamsM1, ModelParamsM2, ModelParamsM3,
};
use crate::signal::{
    estimate_frf, segment_frequencies, ChirpSpec, FrequencyResponse, FrfMeta, SegmentationSpec, TimeSeries,
};

/// Ground truth for a synthetic subject. The model's inertia is the human
/// inertia `M_h` alone; exoskeleton compensation happens downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubjectTruth {
    pub model: ModelParams,
    pub noise_sigma_torque: f64,
    pub noise_sigma_angle: f64,
    pub seed: u64,
}

impl SubjectTruth {
    pub fn noiseless(model: ModelParams) -> Self {
        SubjectTruth {
            model,
            noise_sigma_torque: 0.0,
            noise_sigma_angle: 0.0,
            seed: 0,
        }
    }

    /// Truth whose compensated FRF reproduces `perceived`, whose inertia is
    /// `M_h + M_e/α`; the human inertia is recovered by subtracting `M_e/α`.
    pub fn from_perceived(perceived: &ModelParams, cfg: &ExperimentConfig) -> Result<Self> {
        let m_h = perceived.m() - cfg.attenuated_inertia();
        let model = perceived.with_inertia(m_h);
        model.validate()?;
        Ok(SubjectTruth::noiseless(model))
    }

    pub fn with_noise(mut self, sigma_torque: f64, sigma_angle: f64, seed: u64) -> Self {
        self.noise_sigma_torque = sigma_torque;
        self.noise_sigma_angle = sigma_angle;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.noise_sigma_torque >= 0.0 && self.noise_sigma_torque.is_finite()) {
            return Err(Error::invalid("noise_sigma_torque", "must be >= 0"));
        }
        if !(self.noise_sigma_angle >= 0.0 && self.noise_sigma_angle.is_finite()) {
            return Err(Error::invalid("noise_sigma_angle", "must be >= 0"));
        }
        Ok(())
    }

    /// `S_h(jω)` of the human model.
    pub fn stiffness(&self, omega: f64) -> Complex64 {
        self.model.eval(omega)
    }

    fn segment_rng(&self, segment_index: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (segment_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// Serialized truth sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub model: ModelKind,
    #[serde(rename = "K_h")]
    pub k_h: f64,
    #[serde(rename = "C_h", default, skip_serializing_if = "Option::is_none")]
    pub c_h: Option<f64>,
    #[serde(rename = "B_h", default, skip_serializing_if = "Option::is_none")]
    pub b_h: Option<f64>,
    #[serde(rename = "M_h")]
    pub m_h: f64,
    #[serde(default)]
    pub noise_sigma_torque: f64,
    #[serde(default)]
    pub noise_sigma_angle: f64,
    #[serde(default)]
    pub seed: u64,
}

impl From<&SubjectTruth> for TruthRecord {
    fn from(t: &SubjectTruth) -> Self {
        TruthRecord {
            model: t.model.kind(),
            k_h: t.model.k_h(),
            c_h: t.model.c_h(),
            b_h: t.model.b_h(),
            m_h: t.model.m(),
            noise_sigma_torque: t.noise_sigma_torque,
            noise_sigma_angle: t.noise_sigma_angle,
            seed: t.seed,
        }
    }
}

impl TryFrom<&TruthRecord> for SubjectTruth {
    type Error = Error;

    fn try_from(r: &TruthRecord) -> Result<Self> {
        let missing = |name: &'static str| Error::invalid(name, format!("required for model {}", r.model));
        let model = match r.model {
            ModelKind::M1 => ModelParams::M1(ModelParamsM1 {
                k_h: r.k_h,
                b_h: r.b_h.ok_or_else(|| missing("B_h"))?,
                m: r.m_h,
            }),
            ModelKind::M2 => ModelParams::M2(ModelParamsM2 {
                k_h: r.k_h,
                c_h: r.c_h.ok_or_else(|| missing("C_h"))?,
                m: r.m_h,
            }),
            ModelKind::M3 => ModelParams::M3(ModelParamsM3 {
                k_h: r.k_h,
                c_h: r.c_h.ok_or_else(|| missing("C_h"))?,
                b_h: r.b_h.ok_or_else(|| missing("B_h"))?,
                m: r.m_h,
            }),
        };
        let truth = SubjectTruth {
            model,
            noise_sigma_torque: r.noise_sigma_torque,
            noise_sigma_angle: r.noise_sigma_angle,
            seed: r.seed,
        };
        truth.validate()?;
        Ok(truth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub chirp: ChirpSpec,
    pub segmentation: SegmentationSpec,
    pub experiment: ExperimentConfig,
}

impl ProtocolSpec {
    pub fn validate(&self) -> Result<()> {
        self.chirp.validate()?;
        self.segmentation.validate_against(self.chirp.duration)?;
        self.experiment.validate()
    }

    /// Segments `record`, estimates the FRF and removes the attenuated exoskeleton inertia.
    pub fn compensated_frf(&self, record: &TimeSeries, exp: &str) -> Result<FrequencyResponse> {
        self.validate()?;
        let meta = FrfMeta {
            exp: exp.to_string(),
            alpha: self.experiment.alpha,
            m_e: self.experiment.m_e,
        };
        let raw = estimate_frf(record, &self.chirp, &self.segmentation, meta)?;
        Ok(compensate_inertia(&raw, &self.experiment))
    }
}

/// Steady-state window at one frequency: `θ_e = A·sin(ωt)`, `τ_c = |S_h|·A·sin(ωt + arg S_h)`,
/// plus Gaussian noise drawn from the generator of `segment_index`.
pub fn steady_state_segment(
    truth: &SubjectTruth,
    omega: f64,
    amplitude: f64,
    duration: f64,
    dt: f64,
    segment_index: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = (duration / dt).round() as usize;
    let s = truth.stiffness(omega);
    let (gain, lead) = (s.norm(), s.arg());
    let mut tau: Vec<f64> = (0..n)
        .map(|i| gain * amplitude * (omega * i as f64 * dt + lead).sin())
        .collect();
    let mut theta: Vec<f64> = (0..n).map(|i| amplitude * (omega * i as f64 * dt).sin()).collect();

    if truth.noise_sigma_torque > 0.0 || truth.noise_sigma_angle > 0.0 {
        let mut rng = truth.segment_rng(segment_index);
        if truth.noise_sigma_torque > 0.0 {
            let dist = Normal::new(0.0, truth.noise_sigma_torque).expect("finite sigma");
            tau.iter_mut().for_each(|v| *v += rng.sample(dist));
        }
        if truth.noise_sigma_angle > 0.0 {
            let dist = Normal::new(0.0, truth.noise_sigma_angle).expect("finite sigma");
            theta.iter_mut().for_each(|v| *v += rng.sample(dist));
        }
    }
    (tau, theta)
}

/// Full record: every slot carries the steady state at its chirp frequency,
/// with the angle amplitude set so the torque amplitude equals the chirp amplitude.
pub fn simulate_protocol(truth: &SubjectTruth, protocol: &ProtocolSpec) -> Result<TimeSeries> {
    truth.validate()?;
    protocol.validate()?;
    let dt = protocol.chirp.dt();
    let omegas = segment_frequencies(&protocol.chirp, &protocol.segmentation)?;
    let mut tau_c = Vec::new();
    let mut theta_e = Vec::new();
    for (k, &omega) in omegas.iter().enumerate() {
        let angle_amplitude = protocol.chirp.amplitude / truth.stiffness(omega).norm();
        let (tau, theta) = steady_state_segment(
            truth,
            omega,
            angle_amplitude,
            protocol.segmentation.segment_period,
            dt,
            k,
        );
        tau_c.extend(tau);
        theta_e.extend(theta);
    }
    TimeSeries::new(dt, 0.0, tau_c, theta_e)
}

/// `∮ τ dθ` by the trapezoid rule over the given samples.
pub fn cycle_work(tau: &[f64], theta: &[f64]) -> f64 {
    tau.windows(2)
        .zip(theta.windows(2))
        .map(|(t, th)| 0.5 * (t[0] + t[1]) * (th[1] - th[0]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identify::ModelParamsM2;
    use approx::assert_relative_eq;

    fn m2(k: f64, c: f64, m: f64) -> SubjectTruth {
        SubjectTruth::noiseless(ModelParams::M2(ModelParamsM2 { k_h: k, c_h: c, m }))
    }

    #[test]
    fn undamped_segment_is_in_phase() {
        let truth = m2(10.0, 0.0, 0.2);
        let (tau, theta) = steady_state_segment(&truth, 3.0, 0.1, 2.0, 1e-3, 0);
        for (t, th) in tau.iter().zip(&theta) {
            assert_relative_eq!(*t, (10.0 - 0.2 * 9.0) * th, epsilon = 1e-12);
        }
    }

    #[test]
    fn hysteretic_phase_lead() {
        let truth = m2(10.05, 5.89, 0.28);
        let lead = truth.stiffness(4.0).arg().to_degrees();
        assert_relative_eq!(
            lead,
            (5.89f64 / (10.05 - 0.28 * 16.0)).atan().to_degrees(),
            max_relative = 1e-12
        );
        assert!((lead - 46.6).abs() < 0.1);
        assert!((truth.stiffness(1e-9).arg().to_degrees() - 30.4).abs() < 0.05);
    }

    #[test]
    fn cycle_work_is_loop_area() {
        let truth = m2(20.0, 8.0, 0.3);
        let omega = 5.0;
        let a = 0.2;
        let period = 2.0 * std::f64::consts::PI / omega;
        let dt = period / 10_000.0;
        let (tau, theta) = steady_state_segment(&truth, omega, a, period + dt / 2.0, dt, 0);
        let mut tau = tau;
        let mut theta = theta;
        tau.push(tau[0]);
        theta.push(theta[0]);
        let w = cycle_work(&tau, &theta);
        assert_relative_eq!(w, std::f64::consts::PI * 8.0 * a * a, max_relative = 1e-3);
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let truth = m2(20.0, 8.0, 0.3).with_noise(0.05, 0.001, 7);
        let a = steady_state_segment(&truth, 5.0, 0.1, 1.0, 1e-3, 3);
        let b = steady_state_segment(&truth, 5.0, 0.1, 1.0, 1e-3, 3);
        let c = steady_state_segment(&truth, 5.0, 0.1, 1.0, 1e-3, 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn truth_from_perceived_subtracts_attenuated_inertia() {
        let p = ModelParams::M2(ModelParamsM2 {
            k_h: 20.0,
            c_h: 8.0,
            m: 0.5,
        });
        let t = SubjectTruth::from_perceived(&p, &ExperimentConfig::new(4.0, 0.8)).unwrap();
        assert_relative_eq!(t.model.m(), 0.3, epsilon = 1e-15);
        assert!(SubjectTruth::from_perceived(&p, &ExperimentConfig::new(1.0, 0.8)).is_err());
    }

    #[test]
    fn truth_record_round_trip() {
        let t = m2(20.0, 8.0, 0.3).with_noise(0.05, 0.0, 11);
        let rec = TruthRecord::from(&t);
        let json = serde_json::to_string(&rec).unwrap();
        let back: TruthRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(SubjectTruth::try_from(&back).unwrap(), t);
    }
}
