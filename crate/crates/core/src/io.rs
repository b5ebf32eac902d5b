//! File formats: time-series CSV, FRF JSON and Bode CSV.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::BodePoint;
use crate::error::{Error, Result};
use crate::signal::{FrequencyResponse, FrequencySample, FrfMeta, TimeSeries};

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    t: f64,
    tau_c: f64,
    theta_e: f64,
}

/// Writes `t,tau_c,theta_e` rows with shortest round-trip float formatting.
pub fn write_time_series_csv<W: Write>(writer: W, ts: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for i in 0..ts.len() {
        w.serialize(SampleRow {
            t: ts.time(i),
            tau_c: ts.tau_c[i],
            theta_e: ts.theta_e[i],
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a time-series CSV. The step is the mean spacing of `t`, snapped to
/// `1/round(1/dt)` when it lies within 1e-9 of an integer sample rate.
pub fn read_time_series_csv<R: Read>(reader: R) -> Result<TimeSeries> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    let expected = ["t", "tau_c", "theta_e"];
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::Format(format!(
            "expected header t,tau_c,theta_e, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut t = Vec::new();
    let mut tau_c = Vec::new();
    let mut theta_e = Vec::new();
    for row in r.deserialize::<SampleRow>() {
        let row = row?;
        t.push(row.t);
        tau_c.push(row.tau_c);
        theta_e.push(row.theta_e);
    }
    if t.len() < 2 {
        return Err(Error::invalid("tau_c", "need at least 2 samples"));
    }
    let mut dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    let rate = 1.0 / dt;
    if rate.is_finite() && (rate - rate.round()).abs() <= 1e-9 * rate {
        dt = 1.0 / rate.round();
    }
    TimeSeries::new(dt, t[0], tau_c, theta_e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrfPoint {
    pub omega: f64,
    pub re: f64,
    pub im: f64,
}

/// `{ "meta": {exp, alpha, M_e}, "samples": [{omega, re, im}, ...] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrfDocument {
    pub meta: FrfMeta,
    pub samples: Vec<FrfPoint>,
}

impl From<&FrequencyResponse> for FrfDocument {
    fn from(frf: &FrequencyResponse) -> Self {
        FrfDocument {
            meta: frf.meta.clone(),
            samples: frf
                .samples()
                .iter()
                .map(|s| FrfPoint {
                    omega: s.omega,
                    re: s.value.re,
                    im: s.value.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<FrfDocument> for FrequencyResponse {
    type Error = Error;

    fn try_from(doc: FrfDocument) -> Result<Self> {
        let samples = doc
            .samples
            .iter()
            .map(|p| FrequencySample::new(p.omega, Complex64::new(p.re, p.im)))
            .collect();
        FrequencyResponse::new(samples, doc.meta)
    }
}

pub fn write_frf_json<W: Write>(writer: W, frf: &FrequencyResponse) -> Result<()> {
    serde_json::to_writer_pretty(writer, &FrfDocument::from(frf))?;
    Ok(())
}

pub fn read_frf_json<R: Read>(reader: R) -> Result<FrequencyResponse> {
    let doc: FrfDocument = serde_json::from_reader(reader)?;
    doc.try_into()
}

/// `omega,mag_db,phase_deg` rows.
pub fn write_bode_csv<W: Write>(writer: W, points: &[BodePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
