#![allow(dead_code)]

use dynstiff::fixtures::{ExperimentRow, ParameterTable};
use dynstiff::identify::{identify_all, ModelKind, ParamRecord};
use dynstiff::sim::{simulate_protocol, SubjectTruth};
use dynstiff::{FrequencyResponse, ModelParams};

pub fn table() -> ParameterTable {
    ParameterTable::builtin()
}

pub fn row(exp: &str) -> ExperimentRow {
    table().row(exp).unwrap_or_else(|| panic!("no row {exp}")).clone()
}

/// Truth whose compensated FRF reproduces the tabulated parameters of `kind`.
pub fn truth_for(row: &ExperimentRow, kind: ModelKind) -> SubjectTruth {
    SubjectTruth::from_perceived(&row.params(kind), &row.experiment_config()).unwrap()
}

/// simulate → segment → estimate → compensate
pub fn measure(row: &ExperimentRow, truth: &SubjectTruth) -> FrequencyResponse {
    let protocol = row.protocol();
    let record = simulate_protocol(truth, &protocol).unwrap();
    protocol.compensated_frf(&record, &row.exp).unwrap()
}

pub fn fit_all(frf: &FrequencyResponse) -> Vec<ParamRecord> {
    identify_all(&frf.meta.exp, frf.samples()).unwrap()
}

pub fn rss_of(records: &[ParamRecord], kind: ModelKind) -> f64 {
    records.iter().find(|r| r.model == kind).unwrap().rss
}

pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Largest relative parameter error between two parameter sets of the same kind.
pub fn max_param_error(fitted: &ModelParams, truth: &ModelParams) -> f64 {
    assert_eq!(fitted.kind(), truth.kind());
    let mut e = rel(fitted.k_h(), truth.k_h()).max(rel(fitted.m(), truth.m()));
    if let (Some(a), Some(b)) = (fitted.c_h(), truth.c_h()) {
        e = e.max(rel(a, b));
    }
    if let (Some(a), Some(b)) = (fitted.b_h(), truth.b_h()) {
        e = e.max(rel(a, b));
    }
    e
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
