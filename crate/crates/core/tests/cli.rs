use std::process::{Command, Output};

fn qnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnoise"))
        .args(args)
        .env_remove("QNOISE_PRESET_DIR")
        .output()
        .expect("binary runs")
}

fn table(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn lookup(rows: &[Vec<String>], key: &str) -> f64 {
    num(&rows.iter().find(|r| r[0] == key).unwrap()[1])
}

#[test]
fn sql_preset() {
    let out = qnoise(&["sql"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = table(&out);
    assert_eq!(header, ["quantity", "value", "unit"]);
    assert!((lookup(&rows, "tau") - 8.5e-4).abs() / 8.5e-4 < 0.02);
    assert!((lookup(&rows, "bounces") - 32.0).abs() / 32.0 < 0.05);
    let sql = &rows.iter().find(|r| r[0] == "sql").unwrap()[1];
    // Nine significant digits in scientific notation.
    assert_eq!(sql.split('e').next().unwrap().replace(['.', '-'], "").len(), 9);
}

#[test]
fn sql_json_matches_csv() {
    let (_, rows) = table(&qnoise(&["sql"]));
    let out = qnoise(&["sql", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "sql");
    for key in ["sql", "tau", "bounces", "a_pc", "a_rp"] {
        let j = v[key].as_f64().unwrap();
        assert!((j - lookup(&rows, key)).abs() / j < 1e-8, "{key}");
    }
    assert_eq!(v["config"]["mirror_mass_kg"], 11.0);
}

#[test]
fn config_file_and_doubled_finesse() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("double.json");
    std::fs::write(
        &path,
        r#"{"mirror_mass_kg": 11, "arm_length_m": 4000, "finesse": 400, "wavelength_m": 1.064e-6}"#,
    )
    .unwrap();
    let (_, base) = table(&qnoise(&["sql"]));
    let (_, doubled) = table(&qnoise(&["sql", "--config", path.to_str().unwrap()]));
    let ratio = lookup(&doubled, "tau") / lookup(&base, "tau");
    assert!((ratio - 2.0).abs() < 1e-8);
}

#[test]
fn preset_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("heavy.json"),
        r#"{"mirror_mass_kg": 44, "arm_length_m": 4000, "finesse": 200, "wavelength_m": 1.064e-6}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qnoise"))
        .args(["sql", "--config", "heavy"])
        .env("QNOISE_PRESET_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let (_, heavy) = table(&out);
    let (_, base) = table(&qnoise(&["sql"]));
    assert!((lookup(&heavy, "sql") / lookup(&base, "sql") - 0.5).abs() < 1e-8);
}

#[test]
fn usage_and_config_errors_exit_1() {
    assert_eq!(qnoise(&["sql", "--config", "no-such-preset"]).status.code(), Some(1));
    assert_eq!(qnoise(&["optimum"]).status.code(), Some(1));
    assert_eq!(qnoise(&["optimum", "--family", "squeezed"]).status.code(), Some(1));
    assert_eq!(
        qnoise(&["sweep", "--family", "coherent", "--sweep", "nbar:0:10:5:log"]).status.code(),
        Some(1)
    );
    assert_eq!(qnoise(&["sql", "--family", "plasma"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing-dir").join("out.csv");
    assert_eq!(qnoise(&["sql", "--out", bad.to_str().unwrap()]).status.code(), Some(1));
}

fn optimum_row(args: &[&str]) -> Vec<String> {
    let out = qnoise(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = table(&out);
    assert_eq!(header[..4], ["family", "nbar_opt", "power_opt_w", "dz_opt_m"]);
    rows.into_iter().next().unwrap()
}

#[test]
fn optimum_powers() {
    let coherent = optimum_row(&["optimum", "--family", "coherent"]);
    assert!((num(&coherent[2]) - 191e3).abs() / 191e3 < 0.05);
    let heis = optimum_row(&["optimum", "--family", "heisenberg"]);
    assert!((num(&heis[2]) - 9e-6).abs() / 9e-6 < 0.10);
    assert!((num(&heis[5]) - 2e10).abs() / 2e10 < 0.15);
    let sq = optimum_row(&["optimum", "--family", "squeezed", "--r", "0.5"]);
    let ratio = num(&sq[2]) / num(&coherent[2]);
    assert!((ratio - (-1.0f64).exp()).abs() / (-1.0f64).exp() < 1e-3);
}

#[test]
fn coherent_nbar_sweep_minimum() {
    let out = qnoise(&["sweep", "--family", "coherent", "--sweep", "nbar:1e18:1e24:7:log"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = table(&out);
    assert_eq!(header, ["nbar", "dz_pc_m", "dz_rp_m", "dz_total_m", "power_w", "flags"]);
    assert_eq!(rows.len(), 7);
    let best = rows
        .iter()
        .min_by(|a, b| num(&a[3]).total_cmp(&num(&b[3])))
        .unwrap();
    // One decade per grid step.
    let step = (num(&best[0]) / 9.2e20).log10().abs();
    assert!(step <= 1.0, "minimum at {}", best[0]);
}

#[test]
fn squeeze_sweep_reoptimizes_power() {
    let out = qnoise(&["sweep", "--family", "squeezed", "--sweep", "r:0:1:5:lin"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = table(&out);
    let p0 = num(&rows[0][4]);
    for row in &rows {
        let r = num(&row[0]);
        assert!((num(&row[4]) / p0 - (-2.0 * r).exp()).abs() < 1e-6);
    }
}

#[test]
fn gamma_sweep_flags_loss_boundary() {
    let out = qnoise(&[
        "sweep",
        "--family",
        "heisenberg",
        "--nbar",
        "4.3e10",
        "--sweep",
        "gamma:1.10e-11:1.20e-11:11:lin",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let (_, rows) = table(&out);
    for row in &rows {
        let flagged = row[5].contains("loss-threshold-violated");
        assert_eq!(flagged, num(&row[0]) * 4.3e10 >= 0.5, "gamma {}", row[0]);
    }
    let first = rows.iter().position(|r| !r[5].is_empty()).unwrap();
    assert!((num(&rows[first][0]) - 1.17e-11).abs() < 1e-15);
}

#[test]
fn twin_fock_budget_is_routed_to_squared_difference() {
    let out = qnoise(&["budget", "--family", "twin-fock", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("squared-difference"));
}

#[test]
fn sweeps_are_deterministic() {
    let args = [
        "sweep",
        "--family",
        "intelligent",
        "--j2",
        "8",
        "--m0x2",
        "2",
        "--sweep",
        "eta:0.1:0.9:9:lin",
    ];
    let a = qnoise(&args);
    let b = qnoise(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("budget.json");
    let out = qnoise(&[
        "budget",
        "--family",
        "squeezed",
        "--alpha",
        "100",
        "--r",
        "0.5",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "budget");
    assert!(v["budget"]["dz_total"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_quick_passes_and_records_prng() {
    let out = qnoise(&["verify", "quick", "--format", "json", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["prng"], "ChaCha8Rng");
    assert_eq!(v["report"]["seed"], 42);
    assert!(v["report"]["checks"].as_array().unwrap().len() >= 10);
}
