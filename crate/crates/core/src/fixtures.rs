//! Reference parameter table for 15 elbow experiments, shipped as a
//! versioned JSON file and compiled into the crate.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::identify::{ExperimentConfig, ModelKind, ModelParams, ModelParamsM1, ModelParamsM2, ModelParamsM3};
use crate::signal::{ChirpSpec, SegmentationSpec};
use crate::sim::ProtocolSpec;

pub const TABLE_JSON: &str = include_str!("../fixtures/table3.json");

/// Bare exoskeleton inertia (kg·m²).
pub const EXO_BASE_INERTIA: f64 = 0.1;
/// Distance of the attached load from the joint (m).
pub const LOAD_ARM: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M1Entry {
    #[serde(rename = "B_h")]
    pub b_h: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M2Entry {
    #[serde(rename = "C_h")]
    pub c_h: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M3Entry {
    #[serde(rename = "C_h")]
    pub c_h: f64,
    #[serde(rename = "B_h")]
    pub b_h: f64,
    pub zeta: f64,
}

/// One experiment: protocol settings plus the identified parameters of all three models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub exp: String,
    pub alpha: f64,
    pub load_kg: f64,
    pub grip_kg: f64,
    pub bias_nm: f64,
    pub amplitude_nm: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    #[serde(rename = "K_h")]
    pub k_h: f64,
    /// Perceived inertia `M_h + M_e/α`.
    #[serde(rename = "M")]
    pub m: f64,
    pub omega_n: f64,
    #[serde(rename = "M1")]
    pub m1: M1Entry,
    #[serde(rename = "M2")]
    pub m2: M2Entry,
    #[serde(rename = "M3")]
    pub m3: M3Entry,
}

impl ExperimentRow {
    pub fn params(&self, kind: ModelKind) -> ModelParams {
        let (k_h, m) = (self.k_h, self.m);
        match kind {
            ModelKind::M1 => ModelParams::M1(ModelParamsM1 {
                k_h,
                b_h: self.m1.b_h,
                m,
            }),
            ModelKind::M2 => ModelParams::M2(ModelParamsM2 {
                k_h,
                c_h: self.m2.c_h,
                m,
            }),
            ModelKind::M3 => ModelParams::M3(ModelParamsM3 {
                k_h,
                c_h: self.m3.c_h,
                b_h: self.m3.b_h,
                m,
            }),
        }
    }

    pub fn zeta(&self, kind: ModelKind) -> f64 {
        match kind {
            ModelKind::M1 => self.m1.zeta,
            ModelKind::M2 => self.m2.zeta,
            ModelKind::M3 => self.m3.zeta,
        }
    }

    /// Exoskeleton inertia with the load as a point mass at [`LOAD_ARM`].
    pub fn exo_inertia(&self) -> f64 {
        EXO_BASE_INERTIA + self.load_kg * LOAD_ARM * LOAD_ARM
    }

    pub fn experiment_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            alpha: self.alpha,
            m_e: self.exo_inertia(),
            load_label: Some(format!("{} kg", self.load_kg)),
            grip_label: Some(format!("{} kg", self.grip_kg)),
            bias: self.bias_nm,
        }
    }

    /// 100 s chirp at 1 kHz split into ten 10 s slots, of which the first 5.78 s are analysed.
    pub fn protocol(&self) -> ProtocolSpec {
        ProtocolSpec {
            chirp: ChirpSpec {
                omega_min: self.omega_min,
                omega_max: self.omega_max,
                duration: 100.0,
                amplitude: self.amplitude_nm,
                sample_rate: 1000.0,
            },
            segmentation: SegmentationSpec {
                n_segments: 10,
                segment_period: 10.0,
                used_duration: 5.78,
            },
            experiment: self.experiment_config(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterTable {
    pub version: u32,
    #[serde(default)]
    pub description: String,
    pub experiments: Vec<ExperimentRow>,
}

impl ParameterTable {
    pub fn parse(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn builtin() -> Self {
        Self::parse(TABLE_JSON).expect("bundled parameter table is valid JSON")
    }

    pub fn row(&self, exp: &str) -> Option<&ExperimentRow> {
        self.experiments.iter().find(|r| r.exp == exp)
    }

    /// `(K_h, C_h)` pairs for M2 or M3.
    pub fn stiffness_hysteresis_pairs(&self, kind: ModelKind) -> Vec<(f64, f64)> {
        self.experiments
            .iter()
            .filter_map(|r| r.params(kind).c_h().map(|c| (r.k_h, c)))
            .collect()
    }
}
