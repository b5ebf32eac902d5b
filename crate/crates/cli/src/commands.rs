use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dynstiff::control::{
    bode_table, design, eval_plant, margin_grid, robustness_sweep, DesignOptions, OneParamModel, PlantConfig,
    SweepReport,
};
use dynstiff::fixtures::ParameterTable;
use dynstiff::identify::{identify_all, ModelKind, ParamRecord};
use dynstiff::io::{read_time_series_csv, write_bode_csv, write_frf_json, write_time_series_csv};
use dynstiff::sim::{simulate_protocol, ProtocolSpec, SubjectTruth, TruthRecord};
use dynstiff::stats::{
    f_test, regress_ch_kh, viscous_hypothesis_check, Comparison, FTestRecord, RegressionReport, ViscousCheck,
};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::manifest::{resolve_input, resolve_output_dir, RunManifest};
use crate::{DesignArgs, FtestArgs, IdentifyArgs, PlantArgs, RegressArgs, SimulateArgs};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_config(path: Option<&PathBuf>, manifest: &mut RunManifest) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let p = resolve_input(p)?;
            let cfg = RunConfig::load(Some(&p))?;
            manifest.inputs.push(p);
            Ok(cfg)
        }
        None => RunConfig::load(None),
    }
}

fn fixture_row(exp: &str) -> Result<dynstiff::fixtures::ExperimentRow> {
    ParameterTable::builtin().row(exp).cloned().ok_or_else(|| {
        anyhow!(dynstiff::Error::InvalidInput {
            field: "exp",
            reason: format!("no experiment {exp} in the built-in table")
        })
    })
}

fn missing(section: &'static str, hint: &str) -> anyhow::Error {
    anyhow!(dynstiff::Error::InvalidInput {
        field: section,
        reason: format!("missing; {hint}"),
    })
}

/// Protocol from `--exp` (built-in table) or the config file, with experiment overrides applied.
fn resolve_protocol(exp: Option<&str>, cfg: &RunConfig, alpha: Option<f64>, m_e: Option<f64>) -> Result<ProtocolSpec> {
    let mut protocol = match (exp, &cfg.protocol) {
        (_, Some(p)) => p.clone(),
        (Some(e), None) => fixture_row(e)?.protocol(),
        (None, None) => return Err(missing("protocol", "pass --config with a protocol section or --exp")),
    };
    if let Some(a) = alpha {
        protocol.experiment.alpha = a;
    }
    if let Some(m) = m_e {
        protocol.experiment.m_e = m;
    }
    protocol.validate()?;
    Ok(protocol)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("simulate", json!({}));
    let cfg = load_config(args.config.as_ref(), &mut manifest)?;
    let out = resolve_output_dir(&args.out)?;

    let protocol = resolve_protocol(args.exp.as_deref(), &cfg, args.alpha, args.m_e)?;
    let mut record = match (&cfg.truth, args.exp.as_deref()) {
        (Some(t), _) => t.clone(),
        (None, Some(e)) => {
            let row = fixture_row(e)?;
            let truth = SubjectTruth::from_perceived(&row.params(args.model), &protocol.experiment)?;
            TruthRecord::from(&truth)
        }
        (None, None) => return Err(missing("truth", "pass --config with a truth section or --exp")),
    };
    if let Some(s) = args.seed {
        record.seed = s;
    }
    if let Some(s) = args.noise_torque {
        record.noise_sigma_torque = s;
    }
    if let Some(s) = args.noise_angle {
        record.noise_sigma_angle = s;
    }
    let truth = SubjectTruth::try_from(&record)?;
    let series = simulate_protocol(&truth, &protocol)?;

    let record_path = out.join("record.csv");
    let truth_path = out.join("truth.json");
    let protocol_path = out.join("protocol.json");
    let mut w = create(&record_path)?;
    write_time_series_csv(&mut w, &series)?;
    w.flush()?;
    write_json(&truth_path, &record)?;
    write_json(&protocol_path, &protocol)?;
    log::info!("wrote {} samples to {}", series.len(), record_path.display());

    manifest.seed = Some(record.seed);
    manifest.parameters = json!({ "protocol": protocol, "truth": record });
    manifest.outputs = vec![record_path, truth_path, protocol_path];
    manifest.write(&out)
}

pub fn identify(args: &IdentifyArgs) -> Result<()> {
    let mut manifest = RunManifest::new("identify", json!({}));
    let cfg = load_config(args.config.as_ref(), &mut manifest)?;
    let out = resolve_output_dir(&args.out)?;
    let protocol = resolve_protocol(args.exp.as_deref(), &cfg, args.alpha, args.m_e)?;

    let record_path = resolve_input(&args.record)?;
    let series = read_time_series_csv(BufReader::new(File::open(&record_path)?))?;
    manifest.inputs.push(record_path);

    let label = args
        .label
        .clone()
        .or_else(|| args.exp.clone())
        .unwrap_or_else(|| "run".into());
    let frf = protocol.compensated_frf(&series, &label)?;
    let records = identify_all(&label, frf.samples())?;

    let params_path = out.join("params.json");
    let frf_path = out.join("frf.json");
    write_json(&params_path, &records)?;
    let mut w = create(&frf_path)?;
    write_frf_json(&mut w, &frf)?;
    w.flush()?;

    manifest.parameters = json!({ "protocol": protocol, "exp": label, "n_samples": frf.len() });
    manifest.outputs = vec![params_path, frf_path];
    manifest.write(&out)
}

pub fn ftest(args: &FtestArgs) -> Result<()> {
    let mut manifest = RunManifest::new("ftest", json!({ "n": args.n, "p": args.p }));
    let out = resolve_output_dir(&args.out)?;
    let mut reports = Vec::new();
    for path in &args.params {
        let path = resolve_input(path)?;
        let records: Vec<ParamRecord> = serde_json::from_reader(BufReader::new(File::open(&path)?))
            .with_context(|| format!("parsing {}", path.display()))?;
        manifest.inputs.push(path);

        let mut exps: Vec<&str> = Vec::new();
        for r in &records {
            if !exps.contains(&r.exp.as_str()) {
                exps.push(&r.exp);
            }
        }
        for exp in exps {
            let rss = |kind: ModelKind| -> Result<f64> {
                records
                    .iter()
                    .find(|r| r.exp == exp && r.model == kind)
                    .map(|r| r.rss)
                    .ok_or_else(|| missing("params", &format!("no {kind} record for experiment {exp}")))
            };
            let full = rss(ModelKind::M3)?;
            for (comparison, reduced) in [(Comparison::M1M3, ModelKind::M1), (Comparison::M2M3, ModelKind::M2)] {
                let report = f_test(rss(reduced)?, full, args.n, args.p)?;
                reports.push(FTestRecord::new(exp, comparison, &report));
            }
        }
    }
    let path = out.join("ftest.json");
    write_json(&path, &reports)?;
    manifest.outputs = vec![path];
    manifest.write(&out)
}

#[derive(Serialize)]
struct RegressionOutput {
    table_version: u32,
    #[serde(rename = "M2")]
    m2: RegressionReport,
    #[serde(rename = "M3")]
    m3: RegressionReport,
    viscous: ViscousCheck,
}

pub fn regress(args: &RegressArgs) -> Result<()> {
    let mut manifest = RunManifest::new("regress", json!({}));
    let out = resolve_output_dir(&args.out)?;
    let table = match &args.table {
        Some(p) => {
            let p = resolve_input(p)?;
            let t = ParameterTable::parse(&std::fs::read_to_string(&p)?)?;
            manifest.inputs.push(p);
            t
        }
        None => ParameterTable::builtin(),
    };
    let viscous_rows: Vec<(f64, f64)> = table.experiments.iter().map(|r| (r.omega_n, r.m1.zeta)).collect();
    let output = RegressionOutput {
        table_version: table.version,
        m2: regress_ch_kh(&table.stiffness_hysteresis_pairs(ModelKind::M2))?,
        m3: regress_ch_kh(&table.stiffness_hysteresis_pairs(ModelKind::M3))?,
        viscous: viscous_hypothesis_check(&viscous_rows)?,
    };
    let path = out.join("regression.json");
    write_json(&path, &output)?;
    manifest.outputs = vec![path];
    manifest.write(&out)
}

fn resolve_plant(cfg: &RunConfig, p: &PlantArgs) -> Result<PlantConfig> {
    let mut plant = match cfg.plant {
        Some(plant) => plant,
        None => {
            let need = |v: Option<f64>, field: &'static str| {
                v.ok_or_else(|| missing(field, "pass --config with a plant section or the plant flags"))
            };
            PlantConfig::new(
                OneParamModel {
                    k_h: need(p.k_h, "K_h")?,
                    c_h: need(p.c_h, "c_h")?,
                    m_h: need(p.m_h, "M_h")?,
                },
                need(p.m_e, "M_e")?,
                need(p.alpha, "alpha")?,
            )
        }
    };
    if let Some(v) = p.k_h {
        plant.model.k_h = v;
    }
    if let Some(v) = p.c_h {
        plant.model.c_h = v;
    }
    if let Some(v) = p.m_h {
        plant.model.m_h = v;
    }
    if let Some(v) = p.m_e {
        plant.m_e = v;
    }
    if let Some(v) = p.alpha {
        plant.alpha = v;
    }
    if let Some(v) = p.omega_sea {
        plant.omega_sea = v;
    }
    if let Some(v) = p.zeta_sea {
        plant.zeta_sea = v;
    }
    plant.validate()?;
    Ok(plant)
}

#[derive(Serialize)]
struct DesignOutput<'a> {
    #[serde(flatten)]
    design: &'a dynstiff::Design,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepReport>,
}

fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!(dynstiff::Error::InvalidInput {
            field: "sweep",
            reason: format!("expected LO:HI:N, got {spec}")
        });
    }
    let bad = || {
        anyhow!(dynstiff::Error::InvalidInput {
            field: "sweep",
            reason: format!("cannot parse {spec}")
        })
    };
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && n >= 1) {
        bail!(dynstiff::Error::InvalidInput {
            field: "sweep",
            reason: format!("need 0 < LO <= HI and N >= 1, got {spec}")
        });
    }
    Ok(if n == 1 {
        vec![lo]
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    })
}

pub fn design_cmd(args: &DesignArgs) -> Result<()> {
    let mut manifest = RunManifest::new("design", json!({}));
    let cfg = load_config(args.config.as_ref(), &mut manifest)?;
    let out = resolve_output_dir(&args.out)?;
    let plant = resolve_plant(&cfg, &args.plant)?;
    let options = DesignOptions {
        f: args.f,
        omega_c: args.omega_c,
        n_sections: args.sections,
        ..DesignOptions::default()
    };
    let d = match design(&plant, args.phi, &options) {
        Ok(d) => d,
        Err(e @ dynstiff::Error::InfeasibleMargin { limit_deg, .. }) => {
            eprintln!(
                "admissible fractional orders are (0, (atan(c_h) - phi)/90), empty unless phi < {limit_deg:.3} deg; \
                 at phi -> 0 the interval is (0, {:.4})",
                limit_deg / 90.0
            );
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    let sweep = args
        .sweep
        .as_deref()
        .map(parse_sweep)
        .transpose()?
        .map(|k| robustness_sweep(&d, &k));

    let grid = margin_grid(&plant);
    let ideal = d.ideal_controller();
    let cascade = d.cascade_controller();
    let tables = [
        ("bode_plant.csv", bode_table(|w| eval_plant(&plant, w), &grid)),
        ("bode_controller_ideal.csv", bode_table(|w| ideal.response(w), &grid)),
        (
            "bode_controller_cascade.csv",
            bode_table(|w| cascade.response(w), &grid),
        ),
        (
            "bode_loop_ideal.csv",
            bode_table(|w| ideal.response(w) * eval_plant(&plant, w), &grid),
        ),
        (
            "bode_loop_cascade.csv",
            bode_table(|w| cascade.response(w) * eval_plant(&plant, w), &grid),
        ),
    ];
    let mut outputs = Vec::new();
    for (name, table) in &tables {
        let path = out.join(name);
        let mut w = create(&path)?;
        write_bode_csv(&mut w, table)?;
        w.flush()?;
        outputs.push(path);
    }
    let design_path = out.join("design.json");
    write_json(&design_path, &DesignOutput { design: &d, sweep })?;
    outputs.insert(0, design_path);

    if let Some(pm) = d.ideal_margins.phase_margin {
        log::info!(
            "phase margin {pm:.2} deg at {:.3} rad/s",
            d.ideal_margins.omega_crossover.unwrap_or(f64::NAN)
        );
    }
    manifest.parameters = json!({ "plant": plant, "phi": args.phi, "f": args.f, "omega_c": args.omega_c, "sections": args.sections, "sweep": args.sweep });
    manifest.outputs = outputs;
    manifest.write(&out)
}
