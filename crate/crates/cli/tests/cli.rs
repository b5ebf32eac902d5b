use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dynstiff::fixtures::ParameterTable;
use dynstiff::identify::{identify_all, ModelKind, ParamRecord};
use dynstiff::sim::{simulate_protocol, SubjectTruth};
use serde_json::Value;

fn dynstiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynstiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = dynstiff(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest_without_timestamp(dir: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert!(v["timestamp"].is_string());
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        ok(&[
            "simulate",
            "--exp",
            "III.1",
            "--seed",
            "7",
            "--noise-torque",
            "0.05",
            "-o",
            path(dir),
        ]);
    }
    for file in ["record.csv", "truth.json", "protocol.json"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let (ma, mb) = (manifest_without_timestamp(&a), manifest_without_timestamp(&b));
    assert_eq!(ma["parameters"], mb["parameters"]);
    assert_eq!(ma["seed"], 7);

    let csv = fs::read_to_string(a.join("record.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,tau_c,theta_e"));
    // 100 s at 1 kHz
    assert_eq!(lines.count(), 100_000);
}

#[test]
fn pipeline_matches_the_library() {
    let tmp = tempfile::tempdir().unwrap();
    let (sim, id) = (tmp.path().join("sim"), tmp.path().join("id"));
    ok(&[
        "simulate",
        "--exp",
        "I.1",
        "--seed",
        "3",
        "--noise-torque",
        "0.02",
        "-o",
        path(&sim),
    ]);
    ok(&[
        "identify",
        "--record",
        path(&sim.join("record.csv")),
        "--exp",
        "I.1",
        "-o",
        path(&id),
    ]);
    let from_cli: Vec<ParamRecord> =
        serde_json::from_str(&fs::read_to_string(id.join("params.json")).unwrap()).unwrap();

    let row = ParameterTable::builtin().row("I.1").unwrap().clone();
    let protocol = row.protocol();
    let truth = SubjectTruth::from_perceived(&row.params(ModelKind::M2), &protocol.experiment)
        .unwrap()
        .with_noise(0.02, 0.0, 3);
    let record = simulate_protocol(&truth, &protocol).unwrap();
    let frf = protocol.compensated_frf(&record, "I.1").unwrap();
    let from_lib = identify_all("I.1", frf.samples()).unwrap();
    assert_eq!(from_cli, from_lib);

    // noiseless identification recovers the tabulated M2 parameters
    let (sim0, id0) = (tmp.path().join("sim0"), tmp.path().join("id0"));
    ok(&["simulate", "--exp", "I.1", "-o", path(&sim0)]);
    ok(&[
        "identify",
        "--record",
        path(&sim0.join("record.csv")),
        "--exp",
        "I.1",
        "-o",
        path(&id0),
    ]);
    let recs: Vec<ParamRecord> = serde_json::from_str(&fs::read_to_string(id0.join("params.json")).unwrap()).unwrap();
    let m2 = recs.iter().find(|r| r.model == ModelKind::M2).unwrap();
    assert!((m2.k_h - row.k_h).abs() < 1e-6 * row.k_h);
    assert!((m2.c_h.unwrap() - row.m2.c_h).abs() < 1e-6 * row.m2.c_h);
    assert!((m2.m - row.m).abs() < 1e-6 * row.m);
    assert!(recs.iter().all(|r| r.k_h == m2.k_h && r.m == m2.m));
}

#[test]
fn ftest_flags_the_viscous_model() {
    let tmp = tempfile::tempdir().unwrap();
    let (sim, id, ft) = (tmp.path().join("sim"), tmp.path().join("id"), tmp.path().join("ft"));
    ok(&[
        "simulate",
        "--exp",
        "II.3",
        "--seed",
        "1",
        "--noise-torque",
        "0.05",
        "-o",
        path(&sim),
    ]);
    ok(&[
        "identify",
        "--record",
        path(&sim.join("record.csv")),
        "--exp",
        "II.3",
        "-o",
        path(&id),
    ]);
    ok(&["ftest", "--params", path(&id.join("params.json")), "-o", path(&ft)]);
    let v: Value = serde_json::from_str(&fs::read_to_string(ft.join("ftest.json")).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[0]["comparison"], "M1-M3");
    assert_eq!(arr[0]["significant"], true);
    assert!((arr[0]["f_critical"].as_f64().unwrap() - 4.49).abs() < 0.01);
    assert!(arr[1]["f_stat"].as_f64().unwrap() < arr[0]["f_stat"].as_f64().unwrap());
}

#[test]
fn ftest_requires_all_three_models() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("params.json");
    fs::write(
        &file,
        r#"[{"exp":"X","model":"M1","K_h":10,"B_h":1,"M":0.2,"omega_n":7,"zeta":0.1,"rss":1.0}]"#,
    )
    .unwrap();
    let out = dynstiff(&["ftest", "--params", path(&file), "-o", path(&tmp.path().join("ft"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("M3"));
}

#[test]
fn regress_reports_both_models() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["regress", "-o", path(tmp.path())]);
    let v: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("regression.json")).unwrap()).unwrap();
    assert!(v["M2"]["r_squared"].as_f64().unwrap() > v["M3"]["r_squared"].as_f64().unwrap());
    assert_eq!(v["viscous"]["proportional_rejected"], true);
}

#[test]
fn design_from_table_regression() {
    let tmp = tempfile::tempdir().unwrap();
    let reg = tmp.path().join("reg");
    ok(&["regress", "-o", path(&reg)]);
    let v: Value = serde_json::from_str(&fs::read_to_string(reg.join("regression.json")).unwrap()).unwrap();
    let c_h = v["M2"]["c_h"].as_f64().unwrap().to_string();
    let des = tmp.path().join("des");
    ok(&[
        "design",
        "--k-h",
        "20",
        "--c-h",
        &c_h,
        "--m-h",
        "0.3",
        "--m-e",
        "0.6",
        "--alpha",
        "4",
        "--phi",
        "10",
        "--sweep",
        "10:48.6:12",
        "-o",
        path(&des),
    ]);
    let d: Value = serde_json::from_str(&fs::read_to_string(des.join("design.json")).unwrap()).unwrap();
    assert!(d["ideal_margins"]["phase_margin"].as_f64().unwrap() >= 10.0);
    assert!(d["sweep"]["min_phase_margin"].as_f64().unwrap() > 0.0);
    let bode = fs::read_to_string(des.join("bode_loop_ideal.csv")).unwrap();
    assert!(bode.starts_with("omega,mag_db,phase_deg\n"));
    // 400 points per decade over [ω_he/100, 100·ω_sea]
    let decades = (100.0 * 2.0 * std::f64::consts::PI * 10.0 / (20f64 / 0.9).sqrt() * 100.0).log10();
    let rows = bode.lines().count() - 1;
    assert!((rows as f64 - 400.0 * decades).abs() < 3.0, "{rows}");
}

#[test]
fn design_with_config_file_and_unity_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"plant":{"model":{"K_h":20,"c_h":0.5,"M_h":0.3},"M_e":0.6,"alpha":4}}"#,
    )
    .unwrap();
    let out = tmp.path().join("des");
    ok(&[
        "design",
        "--config",
        path(&cfg),
        "--alpha",
        "1",
        "--phi",
        "10",
        "-o",
        path(&out),
    ]);
    let d: Value = serde_json::from_str(&fs::read_to_string(out.join("design.json")).unwrap()).unwrap();
    assert_eq!(d["plant"]["alpha"], 1.0);
    assert!(d["spec"]["k_f"].as_f64().unwrap() > 0.0);
    let m = manifest_without_timestamp(&out);
    assert!(Path::new(m["inputs"][0].as_str().unwrap()).is_absolute());
}

#[test]
fn infeasible_margin_exits_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dynstiff(&[
        "design",
        "--k-h",
        "20",
        "--c-h",
        "0.5",
        "--m-h",
        "0.3",
        "--m-e",
        "0.6",
        "--alpha",
        "4",
        "--phi",
        "80",
        "-o",
        path(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("infeasible margin") && err.contains("admissible"), "{err}");
}

#[test]
fn zero_duration_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{
  "protocol": {
    "chirp": {"omega_min": 4, "omega_max": 40, "duration": 0, "amplitude": 2, "sample_rate": 1000},
    "segmentation": {"n_segments": 10, "segment_period": 10, "used_duration": 5.78},
    "experiment": {"alpha": 1, "M_e": 0.2}
  },
  "truth": {"model": "M2", "K_h": 48, "C_h": 25, "M_h": 0.01}
}"#,
    )
    .unwrap();
    let out = dynstiff(&["simulate", "--config", path(&cfg), "-o", path(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duration"));
}

#[test]
fn constant_angle_is_insufficient_excitation() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("flat.csv");
    let mut text = String::from("t,tau_c,theta_e\n");
    for i in 0..100_000 {
        let t = i as f64 * 1e-3;
        text.push_str(&format!("{t},{},0.3\n", (4.0 * t).sin()));
    }
    fs::write(&csv, text).unwrap();
    let out = dynstiff(&[
        "identify",
        "--record",
        path(&csv),
        "--exp",
        "I.1",
        "-o",
        path(&tmp.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient excitation"));
}

#[test]
fn missing_sections_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dynstiff(&["simulate", "-o", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("protocol"));
}
