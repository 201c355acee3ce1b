use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use besov_lab::report::fmt_f64;
use besov_lab::{kamont_series, GeneratorRegistry, GeneratorSpec, Grid};
use serde_json::Value;

fn besovlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besovlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = besovlab(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_series(dir: &Path, name: &str, j: u32, f: impl Fn(f64) -> f64) -> PathBuf {
    let g = Grid::unit(j).unwrap();
    let mut text = String::from("t,value\n");
    for k in 0..g.points() {
        let t = g.point(k);
        text.push_str(&format!("{},{}\n", fmt_f64(t), fmt_f64(f(t))));
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn generate_is_deterministic_and_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["generate", "--process", "bm", "--J", "12", "--seed", "42", "--out", "a.csv"], d);
    ok(&["generate", "--process", "bm", "--J", "12", "--seed", "42", "--out", "b.csv"], d);
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
    assert_eq!(fs::read(d.join("a.csv.json")).unwrap(), fs::read(d.join("b.csv.json")).unwrap());
    let meta: Value = serde_json::from_slice(&fs::read(d.join("a.csv.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["spec"]["process"], "bm");
    assert_eq!(meta["spec"]["grid"]["j"], 12);
    let text = fs::read_to_string(d.join("a.csv")).unwrap();
    assert!(text.starts_with("t,value\n0.0,0.0\n"));
    assert_eq!(text.lines().count(), 4098);
}

#[test]
fn fbm_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["generate", "--process", "fbm", "--H", "0.75", "--J", "14", "--seed", "7"], dir.path());
    assert_eq!(out.lines().count() - 1, 16385);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(besovlab(&["generate", "--process", "wfbm", "--H", "0.4"], d).status.code(), Some(2));
    assert_eq!(besovlab(&["generate", "--process", "nope"], d).status.code(), Some(2));
    assert_eq!(besovlab(&["generate", "--bogus"], d).status.code(), Some(2));
    assert_eq!(besovlab(&["generate", "--J", "30"], d).status.code(), Some(2));
    assert_eq!(besovlab(&["dyadic", "missing.csv", "--alpha", "0.5"], d).status.code(), Some(3));
    fs::write(d.join("bad.csv"), "t,value\n0,1\n0,2\n").unwrap();
    assert_eq!(besovlab(&["dyadic", "bad.csv", "--alpha", "0.5"], d).status.code(), Some(3));
    write_series(d, "short.csv", 6, |t| t);
    let out = besovlab(&["dyadic", "short.csv", "--alpha", "0.5", "--N", "8"], d);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty() && out.stdout.is_empty());
    assert_eq!(besovlab(&["lemma", "--pz-exact", &vec!["1"; 21].join(",")], d).status.code(), Some(3));
    assert_eq!(besovlab(&["lemma"], d).status.code(), Some(2));
}

#[test]
fn dyadic_ramp_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_series(d, "ramp.csv", 10, |t| t);
    let out = ok(&["dyadic", "ramp.csv", "--alpha", "0.25", "--p", "2", "--format", "csv"], d);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,T_n,partial_sum"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let want = (2.0 * cols[0] * (0.25 - 1.0)).exp2();
        assert!((cols[1] - want).abs() <= 1e-12 * want, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 10);
}

#[test]
fn dyadic_constant_converges() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_series(d, "flat.csv", 9, |_| 3.5);
    let v: Value = serde_json::from_str(&ok(&["dyadic", "flat.csv", "--alpha", "0.7"], d)).unwrap();
    assert_eq!(v["series"]["verdict"], "converges");
    assert!(v["series"]["terms"].as_array().unwrap().iter().all(|t| t.as_f64() == Some(0.0)));
    assert_eq!(v["ingest"]["resampled"], false);
}

#[test]
fn bm_files_diverge_at_alpha_point_six() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let seeds = 40;
    let mut diverges = 0;
    for seed in 0..seeds {
        let s = seed.to_string();
        ok(&["generate", "--J", "12", "--seed", &s, "--out", "bm.csv"], d);
        let v: Value = serde_json::from_str(&ok(&["dyadic", "bm.csv", "--alpha", "0.6"], d)).unwrap();
        if v["series"]["verdict"] == "diverges" {
            diverges += 1;
        }
    }
    assert!(diverges as f64 >= 0.95 * seeds as f64, "{diverges}/{seeds}");
}

#[test]
fn generate_then_dyadic_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (process, extra) in [("bm", vec![]), ("wfbm", vec!["--H", "0.7", "--weight", "sine:1,3,0.2"])] {
        let mut args = vec!["generate", "--process", process, "--J", "11", "--seed", "9", "--a", "-1", "--b", "2"];
        args.extend(&extra);
        args.extend(["--out", "rt.csv"]);
        ok(&args, d);
        let v: Value = serde_json::from_str(&ok(&["dyadic", "rt.csv", "--alpha", "0.45", "--p", "3"], d)).unwrap();
        let meta: Value = serde_json::from_slice(&fs::read(d.join("rt.csv.json")).unwrap()).unwrap();
        let spec: GeneratorSpec = serde_json::from_value(meta["spec"].clone()).unwrap();
        let path = spec.sample(&GeneratorRegistry::with_builtins()).unwrap().path_of();
        let want = serde_json::to_value(kamont_series(&path, 11, 0.45, 3.0).unwrap()).unwrap();
        assert_eq!(v["series"], want, "{process}");
        assert_eq!(v["ingest"]["resampled"], false);
    }
}

#[test]
fn irregular_input_is_resampled_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let text: String = std::iter::once("t,value\n".to_string())
        .chain((0..300).map(|k| {
            let t = (k as f64 / 299.0).powi(2);
            format!("{t},{}\n", (7.0 * t).sin())
        }))
        .collect();
    fs::write(d.join("irr.csv"), text).unwrap();
    let v: Value = serde_json::from_str(&ok(&["dyadic", "irr.csv", "--alpha", "0.5"], d)).unwrap();
    assert_eq!(v["ingest"]["resampled"], true);
    assert_eq!(v["ingest"]["exponent"], 9);
    assert_eq!(v["ingest"]["rows"], 300);
    let v: Value = serde_json::from_str(&ok(&["dyadic", "irr.csv", "--alpha", "0.5", "--J", "7"], d)).unwrap();
    assert_eq!(v["ingest"]["exponent"], 7);
}

#[test]
fn besov_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_series(d, "flat.csv", 8, |_| -2.0);
    let v: Value = serde_json::from_str(&ok(&["besov", "flat.csv", "--alpha", "0.5"], d)).unwrap();
    assert_eq!(v["norm"]["seminorm_truncated"], 0.0);

    write_series(d, "ramp.csv", 12, |t| t);
    let oracle: Value =
        serde_json::from_str(&fs::read_to_string("../core/tests/fixtures/ramp_oracle.json").unwrap()).unwrap();
    let v: Value = serde_json::from_str(&ok(&["besov", "ramp.csv", "--alpha", "0.3", "--p", "2", "--q", "2"], d)).unwrap();
    let got = v["norm"]["seminorm_truncated"].as_f64().unwrap();
    let want = oracle["seminorm_truncated"].as_f64().unwrap();
    assert!((got - want).abs() <= 0.01 * want, "{got} vs {want}");

    ok(&["generate", "--J", "12", "--seed", "3", "--out", "bm.csv"], d);
    let v: Value = serde_json::from_str(&ok(&["besov", "bm.csv", "--alpha", "0.4", "--extrapolate"], d)).unwrap();
    let ext = v["norm"]["extrapolated_seminorm"].as_f64().expect("extrapolated value present");
    assert!(ext >= v["norm"]["seminorm_truncated"].as_f64().unwrap());

    let curve = ok(&["besov", "bm.csv", "--alpha", "0.4", "--format", "csv"], d);
    assert!(curve.starts_with("t,w\n"));
    assert_eq!(curve.lines().count(), 1 + 12 * 64 + 1);
}

#[test]
fn sweep_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = r#"
schema_version = 1
p = 2.0
alpha_grid = [0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7]
n_levels = 12
replicates = 100
workers = 4

[generator]
process = "bm"
seed = 11
grid = { a = 0.0, b = 1.0, j = 14 }
"#;
    fs::write(d.join("sweep.toml"), config).unwrap();
    ok(&["sweep", "--config", "sweep.toml", "--out", "res"], d);
    let v: Value = serde_json::from_slice(&fs::read(d.join("res.json")).unwrap()).unwrap();
    let crit = v["critical_alpha"].as_f64().unwrap();
    assert!((0.45..=0.55).contains(&crit), "{crit}");
    let csv = fs::read_to_string(d.join("res.csv")).unwrap();
    assert!(csv.starts_with("alpha,median_slope,frac_conv,frac_div,frac_inc\n"));
    assert_eq!(csv.lines().count(), 10);

    ok(&["sweep", "--config", "sweep.toml", "--out", "one", "--J", "12", "--workers", "1", "--format", "csv"], d);
    assert!(d.join("one.csv").exists() && !d.join("one.json").exists());

    fs::write(d.join("broken.toml"), "schema_version = 1\n").unwrap();
    let out = besovlab(&["sweep", "--config", "broken.toml", "--out", "none"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(!d.join("none.json").exists());
}

#[test]
fn lemma_paley_zygmund_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(ok(&["lemma", "--pz-exact", "1"], d), "probability=1.0 bound=0.125 PASS\n");
    assert_eq!(ok(&["lemma", "--pz-exact", "1,1"], d), "probability=0.5 bound=0.125 PASS\n");
    let v: Value = serde_json::from_str(&ok(&["lemma", "--pz-exact", "-2,1,0.5", "--format", "json"], d)).unwrap();
    assert_eq!(v["pass"], true);
    let mc = ok(&["lemma", "--pz-mc", "1,1", "--samples", "20000", "--seed", "5"], d);
    assert!(mc.contains("standard_error=") && mc.ends_with("PASS\n"));
}

#[test]
fn lemma_statistic_is_nondecreasing() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["lemma", "--statistic", "--alpha", "0.4", "--p", "2", "--N", "12", "--process", "bm"], dir.path());
    let sums: Vec<f64> = out.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(sums.len(), 12);
    assert!(sums.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn lemma_probe_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["lemma", "--probe", "--J", "9", "--sizes", "4,64", "--replicates", "50", "--seed", "1"], dir.path());
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "family_size,quantile_value,max_abs");
    assert_eq!(lines.len(), 3);
}
