//! Chirp excitation, record segmentation and single-frequency FRF estimation.
//!
//! A record is a uniformly sampled pair of interaction torque `tau_c` and
//! joint angle `theta_e`. The excitation is an exponential chirp whose
//! instantaneous frequency grows geometrically; the record is cut into
//! fixed slots and each slot contributes one complex dynamic-stiffness
//! sample at the chirp frequency of the slot start.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled torque/angle record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub dt: f64,
    pub t0: f64,
    pub tau_c: Vec<f64>,
    pub theta_e: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, t0: f64, tau_c: Vec<f64>, theta_e: Vec<f64>) -> Result<Self> {
        let ts = TimeSeries { dt, t0, tau_c, theta_e };
        ts.validate()?;
        Ok(ts)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !self.t0.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        if self.tau_c.len() != self.theta_e.len() {
            return Err(Error::invalid(
                "theta_e",
                format!(
                    "length {} differs from tau_c length {}",
                    self.theta_e.len(),
                    self.tau_c.len()
                ),
            ));
        }
        if self.tau_c.len() < 2 {
            return Err(Error::invalid("tau_c", "need at least 2 samples"));
        }
        if self.tau_c.iter().chain(&self.theta_e).any(|v| !v.is_finite()) {
            return Err(Error::invalid("samples", "all samples must be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tau_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_c.is_empty()
    }

    /// Covered duration, `len * dt`.
    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }
}

/// Exponential chirp parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpSpec {
    /// rad/s
    pub omega_min: f64,
    /// rad/s
    pub omega_max: f64,
    /// s
    pub duration: f64,
    /// N·m
    pub amplitude: f64,
    /// Hz
    pub sample_rate: f64,
}

impl ChirpSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_min.is_finite()) {
            return Err(Error::invalid(
                "omega_min",
                format!("log sweep needs omega_min > 0, got {}", self.omega_min),
            ));
        }
        if !(self.omega_max >= self.omega_min && self.omega_max.is_finite()) {
            return Err(Error::invalid(
                "omega_max",
                format!("must be >= omega_min, got {}", self.omega_max),
            ));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(
                "duration",
                format!("must be positive, got {}", self.duration),
            ));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::invalid(
                "amplitude",
                format!("must be non-negative, got {}", self.amplitude),
            ));
        }
        let nyquist_rate = 2.0 * self.omega_max / (2.0 * PI);
        if !(self.sample_rate > nyquist_rate && self.sample_rate.is_finite()) {
            return Err(Error::invalid(
                "sample_rate",
                format!(
                    "{} Hz does not exceed the Nyquist rate {:.6} Hz",
                    self.sample_rate, nyquist_rate
                ),
            ));
        }
        Ok(())
    }

    fn log_ratio(&self) -> f64 {
        (self.omega_max / self.omega_min).ln()
    }

    /// ω(t) = ω_min·(ω_max/ω_min)^(t/T)
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.omega_min * (self.log_ratio() * t / self.duration).exp()
    }

    /// Closed-form integral of the instantaneous frequency from 0 to `t`.
    pub fn phase(&self, t: f64) -> f64 {
        let l = self.log_ratio();
        if l == 0.0 {
            self.omega_min * t
        } else {
            self.omega_min * self.duration / l * (l * t / self.duration).exp_m1()
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }
}

/// Torque-only excitation produced by [`gen_exp_chirp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    pub dt: f64,
    pub torque: Vec<f64>,
}

/// Samples `A·sin(φ(t))` at `t = i/sample_rate` for `i in 0..round(T·fs)`.
pub fn gen_exp_chirp(spec: &ChirpSpec) -> Result<Excitation> {
    spec.validate()?;
    let dt = spec.dt();
    let torque = (0..spec.sample_count())
        .map(|i| spec.amplitude * spec.phase(i as f64 * dt).sin())
        .collect();
    Ok(Excitation { dt, torque })
}

/// How a record is cut into independent single-frequency windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationSpec {
    pub n_segments: usize,
    /// Slot length (s).
    pub segment_period: f64,
    /// Leading part of each slot that is analysed (s).
    pub used_duration: f64,
}

impl SegmentationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_segments == 0 {
            return Err(Error::invalid("n_segments", "must be at least 1"));
        }
        if !(self.segment_period > 0.0 && self.segment_period.is_finite()) {
            return Err(Error::invalid("segment_period", "must be positive"));
        }
        if !(self.used_duration > 0.0 && self.used_duration <= self.segment_period) {
            return Err(Error::invalid(
                "used_duration",
                format!(
                    "must lie in (0, segment_period = {}], got {}",
                    self.segment_period, self.used_duration
                ),
            ));
        }
        Ok(())
    }

    pub fn validate_against(&self, record_duration: f64) -> Result<()> {
        self.validate()?;
        let needed = self.n_segments as f64 * self.segment_period;
        if needed > record_duration * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "n_segments",
                format!(
                    "{} x {} s slots exceed the {} s record",
                    self.n_segments, self.segment_period, record_duration
                ),
            ));
        }
        Ok(())
    }

    /// Slot time left unused after the analysed window.
    pub fn settling_gap(&self) -> f64 {
        self.segment_period - self.used_duration
    }

    /// Whether the unused tail covers four time constants (≈ 2% settling).
    /// Logs a warning when it does not.
    pub fn check_settling_gap(&self, time_constant: f64) -> bool {
        let ok = self.settling_gap() >= 4.0 * time_constant;
        if !ok {
            log::warn!(
                "settling gap {:.3} s is shorter than 4 x {:.3} s time constant",
                self.settling_gap(),
                time_constant
            );
        }
        ok
    }
}

/// Chirp frequency at the start of every slot: `ω_min·(ω_max/ω_min)^(t_k/T)` with `t_k = k·segment_period`.
pub fn segment_frequencies(spec: &ChirpSpec, seg: &SegmentationSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    seg.validate_against(spec.duration)?;
    Ok((0..seg.n_segments)
        .map(|k| spec.instantaneous_frequency(k as f64 * seg.segment_period))
        .collect())
}

/// One analysed window borrowed from a record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<'a> {
    pub start: f64,
    pub tau_c: &'a [f64],
    pub theta_e: &'a [f64],
}

pub fn segment_record<'a>(record: &'a TimeSeries, seg: &SegmentationSpec) -> Result<Vec<Segment<'a>>> {
    record.validate()?;
    seg.validate()?;
    let slot = (seg.segment_period / record.dt).round() as usize;
    let used = (seg.used_duration / record.dt).round() as usize;
    if used == 0 {
        return Err(Error::invalid("used_duration", "shorter than one sample"));
    }
    let needed = (seg.n_segments - 1) * slot + used;
    if record.len() < needed {
        return Err(Error::RecordTooShort {
            needed,
            available: record.len(),
        });
    }
    Ok((0..seg.n_segments)
        .map(|k| {
            let a = k * slot;
            Segment {
                start: record.time(a),
                tau_c: &record.tau_c[a..a + used],
                theta_e: &record.theta_e[a..a + used],
            }
        })
        .collect())
}

/// One complex dynamic-stiffness sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySample {
    pub omega: f64,
    pub value: Complex64,
}

impl FrequencySample {
    pub fn new(omega: f64, value: Complex64) -> Self {
        FrequencySample { omega, value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FrfMeta {
    pub exp: String,
    pub alpha: f64,
    #[serde(rename = "M_e")]
    pub m_e: f64,
}

/// Ordered set of FRF samples with strictly increasing frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    samples: Vec<FrequencySample>,
    pub meta: FrfMeta,
}

impl FrequencyResponse {
    pub fn new(samples: Vec<FrequencySample>, meta: FrfMeta) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !(s.omega > 0.0 && s.omega.is_finite()) {
                return Err(Error::invalid("omega", format!("sample {i}: must be positive")));
            }
            if !(s.value.re.is_finite() && s.value.im.is_finite()) {
                return Err(Error::invalid("value", format!("sample {i}: must be finite")));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].omega <= w[0].omega) {
            return Err(Error::invalid(
                "omega",
                format!("frequencies must be strictly increasing (sample {})", i + 1),
            ));
        }
        Ok(FrequencyResponse { samples, meta })
    }

    pub fn samples(&self) -> &[FrequencySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.omega)
    }

    /// Applies `f` to every value, keeping frequencies and metadata.
    pub fn map_values(&self, f: impl Fn(f64, Complex64) -> Complex64) -> FrequencyResponse {
        FrequencyResponse {
            samples: self
                .samples
                .iter()
                .map(|s| FrequencySample::new(s.omega, f(s.omega, s.value)))
                .collect(),
            meta: self.meta.clone(),
        }
    }
}

/// Single-frequency Fourier estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrfEstimator {
    /// Reference coefficients smaller than `excitation_floor × rms(theta)` are rejected.
    pub excitation_floor: f64,
}

impl Default for FrfEstimator {
    fn default() -> Self {
        FrfEstimator {
            excitation_floor: 1e-12,
        }
    }
}

impl FrfEstimator {
    /// Ratio of the `e^{jωt}` phasors of `tau` and `theta`.
    ///
    /// The window is truncated to the largest whole number of periods. Each
    /// phasor comes from the least-squares projection onto `{1, cos ωt, sin ωt}`,
    /// which is the plain Fourier correlation when the window holds an exact
    /// integer number of periods in samples and stays exact for a pure
    /// sinusoid when it does not.
    pub fn estimate(&self, tau: &[f64], theta: &[f64], dt: f64, omega: f64) -> Result<Complex64> {
        if tau.len() != theta.len() {
            return Err(Error::invalid(
                "seg_theta",
                format!("length {} differs from seg_tau length {}", theta.len(), tau.len()),
            ));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid("omega", "must be positive"));
        }
        if omega * dt >= PI {
            return Err(Error::invalid(
                "omega",
                format!("omega*dt = {} is not below pi", omega * dt),
            ));
        }
        let period = 2.0 * PI / omega;
        let span = tau.len() as f64 * dt;
        let periods = (span / period).floor();
        if periods < 1.0 {
            return Err(Error::invalid(
                "seg_tau",
                format!("window of {span} s is shorter than one period ({period} s)"),
            ));
        }
        let m = ((periods * period / dt).round() as usize).min(tau.len());

        let (gram, rhs_tau, rhs_theta) = normal_equations(&tau[..m], &theta[..m], dt, omega);
        let coef_tau = solve3(gram, rhs_tau)?;
        let coef_theta = solve3(gram, rhs_theta)?;
        // x = a cos + b sin  =>  phasor a - jb
        let phasor_tau = Complex64::new(coef_tau[1], -coef_tau[2]);
        let phasor_theta = Complex64::new(coef_theta[1], -coef_theta[2]);

        let floor = self.excitation_floor * rms(&theta[..m]);
        if phasor_theta.norm() <= floor {
            return Err(Error::InsufficientExcitation {
                magnitude: phasor_theta.norm(),
                floor,
            });
        }
        Ok(phasor_tau / phasor_theta)
    }
}

/// [`FrfEstimator::estimate`] with the default excitation floor.
pub fn estimate_frf_point(seg_tau: &[f64], seg_theta: &[f64], dt: f64, omega: f64) -> Result<Complex64> {
    FrfEstimator::default().estimate(seg_tau, seg_theta, dt, omega)
}

type Gram = [[f64; 3]; 3];

fn normal_equations(tau: &[f64], theta: &[f64], dt: f64, omega: f64) -> (Gram, [f64; 3], [f64; 3]) {
    let mut g = [[0.0; 3]; 3];
    let mut rt = [0.0; 3];
    let mut rh = [0.0; 3];
    for (i, (&x, &y)) in tau.iter().zip(theta).enumerate() {
        let (s, c) = (omega * i as f64 * dt).sin_cos();
        let basis = [1.0, c, s];
        for r in 0..3 {
            for col in r..3 {
                g[r][col] += basis[r] * basis[col];
            }
            rt[r] += basis[r] * x;
            rh[r] += basis[r] * y;
        }
    }
    for r in 0..3 {
        for col in 0..r {
            g[r][col] = g[col][r];
        }
    }
    (g, rt, rh)
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: Gram, mut b: [f64; 3]) -> Result<[f64; 3]> {
    for k in 0..3 {
        let p = (k..3)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if a[p][k].abs() < f64::MIN_POSITIVE {
            return Err(Error::RankDeficient("singular single-frequency basis".into()));
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..3 {
            let factor = a[i][k] / a[k][k];
            for j in k..3 {
                a[i][j] -= factor * a[k][j];
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let tail: f64 = (k + 1..3).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - tail) / a[k][k];
    }
    Ok(x)
}

pub(crate) fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Segments `record` and estimates one FRF sample per window at the slot-start chirp frequency.
pub fn estimate_frf(
    record: &TimeSeries,
    chirp: &ChirpSpec,
    seg: &SegmentationSpec,
    meta: FrfMeta,
) -> Result<FrequencyResponse> {
    let omegas = segment_frequencies(chirp, seg)?;
    let windows = segment_record(record, seg)?;
    let estimator = FrfEstimator::default();
    let samples = omegas
        .iter()
        .zip(&windows)
        .map(|(&omega, w)| {
            estimator
                .estimate(w.tau_c, w.theta_e, record.dt, omega)
                .map(|v| FrequencySample::new(omega, v))
        })
        .collect::<Result<Vec<_>>>()?;
    FrequencyResponse::new(samples, meta)
}
