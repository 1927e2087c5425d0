use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_esqpt-lab"));
    c.env_remove("ESQPT_LAB_WORKERS");
    c
}

struct Run {
    out: PathBuf,
    result: Output,
    _dir: tempfile::TempDir,
}

impl Run {
    fn manifest(&self) -> Value {
        let text = fs::read_to_string(self.out.join("manifest.json")).expect("manifest written");
        serde_json::from_str(&text).unwrap()
    }

    fn stdout(&self) -> String {
        String::from_utf8_lossy(&self.result.stdout).into_owned()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.result.stderr).into_owned()
    }

    fn code(&self) -> i32 {
        self.result.status.code().unwrap()
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out.join(name)).unwrap()
    }
}

fn run_with(sub: &str, config: &str, extra: &[&str], setup: impl FnOnce(&mut Command)) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let mut cmd = bin();
    cmd.arg(sub).arg("--config").arg(&cfg).arg("--out").arg(&out).args(extra);
    setup(&mut cmd);
    let result = cmd.output().unwrap();
    Run {
        out,
        result,
        _dir: dir,
    }
}

fn run(sub: &str, config: &str, extra: &[&str]) -> Run {
    run_with(sub, config, extra, |_| {})
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn assert_no_orphans(out: &Path, manifest: &Value) {
    let listed: BTreeSet<String> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap().to_string())
        .collect();
    let mut on_disk: BTreeSet<String> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(on_disk.remove("manifest.json"));
    assert_eq!(listed, on_disk);
}

#[test]
fn oracle_check_reports_agreement() {
    let r = run("oracle-check", "{}", &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert!(r.stdout().contains("all blocks match oracle within 1e-9"));
    let m = r.manifest();
    assert_eq!(m["status"], "ok");
    assert_eq!(m["summary"]["cases"], 4 * 4 * 5);
    let rows = csv_rows(&r.read("oracle_check.csv"));
    assert_eq!(rows[0], ["model", "N", "xi", "dimension", "max_abs_dev", "pass"]);
    assert_eq!(rows.len(), 1 + 80);
    assert!(rows[1..].iter().all(|r| r[5] == "true"));
    assert_no_orphans(&r.out, &m);
}

#[test]
fn lmg_gaps_against_n_prefer_the_exponential_law() {
    let r = run(
        "gaps-n",
        r#"{"model": "LMG", "xi": "0.5", "N_list": {"start": 20, "stop": 120, "step": 20}}"#,
        &["--plots"],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let fits = csv_rows(&r.read("fits.csv"));
    let r2 = |form: &str| -> f64 { fits.iter().find(|row| row[1] == form).unwrap()[4].parse().unwrap() };
    assert!(r2("exponential") > 0.999);
    assert!(r2("exponential") > r2("power"));
    let gaps = csv_rows(&r.read("gaps_n.csv"));
    assert_eq!(gaps.len(), 7);
    assert!(gaps[1..].iter().all(|row| row[7] == "true"));
    // lin-log: N ticks are plain numbers, gap ticks are decades
    let svg = r.read("gaps_n.svg");
    assert!(svg.contains(">100</text>"));
    assert!(svg.contains(">1e-16</text>"));
    assert!(!svg.contains(">1e1</text>"));
    assert!(svg.contains("exponential fit"));
    assert_no_orphans(&r.out, &r.manifest());
}

#[test]
fn vm2d_gaps_against_n_use_log_log_axes() {
    let r = run(
        "gaps-n",
        r#"{"model": "VM2D", "xi": 0.5, "N_list": [20, 40, 80, 160], "precision": {"mode": "double"}}"#,
        &["--plots"],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let fits = csv_rows(&r.read("fits.csv"));
    let r2 = |form: &str| -> f64 { fits.iter().find(|row| row[1] == form).unwrap()[4].parse().unwrap() };
    assert!(r2("power") > r2("exponential"));
    let svg = r.read("gaps_n.svg");
    assert!(svg.contains(">1e1</text>") && svg.contains(">1e2</text>"));
    assert!(svg.contains("power fit"));
}

#[test]
fn identical_configs_give_identical_csv() {
    let cfg = r#"{"model": "VM2D", "N": 30, "xi_grid": {"start": 0, "stop": 1, "step": "0.1"}, "sectors": ["l=0", "l=1"]}"#;
    let a = run("ced", cfg, &["--plots"]);
    let b = run("ced", cfg, &["--plots"]);
    assert_eq!(a.code(), 0);
    assert_eq!(a.read("ced.csv"), b.read("ced.csv"));
    assert_eq!(a.read("ced.svg"), b.read("ced.svg"));
    let rows = csv_rows(&a.read("ced.csv"));
    assert_eq!(rows[0], ["xi", "sector", "level", "energy"]);
    // 11 grid points, 16 levels with l = 0 and 15 with l = 1
    assert_eq!(rows.len(), 1 + 11 * 31);
    let svg = a.read("ced.svg");
    assert!(svg.contains("stroke-dasharray=\"8 4\""), "second sector is dashed");
    assert!(!a.read("ced.csv").contains('\r'));
}

#[test]
fn validation_errors_are_machine_readable() {
    let r = run("ced", r#"{"model": "LMG", "N": 10, "xi_grid": [0.1, "1.7"]}"#, &[]);
    assert_eq!(r.code(), 2);
    let record: Value = serde_json::from_str(r.stderr().lines().last().unwrap()).unwrap();
    assert_eq!(record["error"]["kind"], "validation");
    assert_eq!(record["error"]["subcommand"], "ced");
    let m = r.manifest();
    assert_eq!(m["status"], "failed");
    assert_eq!(m["error"]["error"]["kind"], "validation");
    assert_eq!(m["config"]["model"], "LMG");
    assert!(r.out.join("error.json").exists());
    assert_no_orphans(&r.out, &m);
}

#[test]
fn unknown_keys_and_mismatched_subcommands_are_rejected() {
    assert_eq!(run("ced", r#"{"model": "LMG", "N": 10, "colour": "red"}"#, &[]).code(), 2);
    assert_eq!(run("gaps-xi", r#"{"subcommand": "ced", "model": "LMG", "N": 10}"#, &[]).code(), 2);
    assert_eq!(run("ced", "not json", &[]).code(), 2);
    assert_eq!(run("otoc-scan", r#"{"model": "IBM", "N": 10, "xi": 0.6}"#, &[]).code(), 2);
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = bin()
        .args(["ced", "--config"])
        .arg(dir.path().join("absent.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(3));
    let m: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["error"]["error"]["kind"], "io");
}

#[test]
fn otoc_scan_emits_both_real_part_and_modulus() {
    let r = run(
        "otoc-scan",
        r#"{"model": "LMG", "N": 40, "xi": "0.6", "otoc": {"T_list": ["inf", "10"], "tol_deg": "1e-10"}}"#,
        &["--plots"],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = csv_rows(&r.read("otoc.csv"));
    assert_eq!(
        rows[0],
        ["N", "j", "E_j", "scaled_energy", "value", "abs_F", "imag_F", "T", "tol_deg", "accidental_resonances"]
    );
    // 21 even states at two averaging windows
    assert_eq!(rows.len(), 1 + 2 * 21);
    assert!(rows[1..22].iter().all(|r| r[7] == "inf"));
    assert!(rows[22..].iter().all(|r| r[7].parse::<f64>().unwrap() == 10.0));
    let svg = r.read("otoc.svg");
    assert!(svg.contains("mean-field eps_c"));
    let eps = r.manifest()["summary"]["meanfield_critical_energy"].as_f64().unwrap();
    assert!((eps - 5.0 / 12.0).abs() < 1e-9);
}

#[test]
fn worker_count_comes_from_flag_or_environment() {
    let cfg = r#"{"model": "LMG", "N": 10, "xi_grid": [0, 0.5, 1]}"#;
    let flag = run("ced", cfg, &["--workers", "2"]);
    assert_eq!(flag.manifest()["workers"], 2);
    let env = run_with("ced", cfg, &[], |c| {
        c.env("ESQPT_LAB_WORKERS", "3");
    });
    assert_eq!(env.manifest()["workers"], 3);
    assert_eq!(run("ced", cfg, &["--workers", "0"]).code(), 2);
}

#[test]
fn band_heads_collapse_at_the_so3_limit() {
    let r = run("centrifugal", r#"{"model": "VM2D", "N": 20, "xi_grid": ["1"], "l_list": [1, 5]}"#, &["--plots"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = csv_rows(&r.read("centrifugal.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[1..].iter().all(|r| r[2].parse::<f64>().unwrap().abs() < 1e-10));
    assert!(r.read("centrifugal.svg").contains("l = 5"));
}

#[test]
fn centrifugal_curves_start_at_unity() {
    let r = run("centrifugal", r#"{"model": "VM2D", "N": 50, "xi_grid": ["0", "0.5"]}"#, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = csv_rows(&r.read("centrifugal.csv"));
    for row in rows[1..].iter().filter(|r| r[0] == "0") {
        assert!((row[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
    }
    assert_eq!(rows.len(), 1 + 2 * 3);
}

#[test]
fn critical_energy_agrees_with_meanfield() {
    let r = run("critical-energy", r#"{"model": "LMG", "xi": "0.6", "N_list": [200, 400, 800]}"#, &["--plots"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = csv_rows(&r.read("critical_energy.csv"));
    let mf: f64 = rows[1][1].parse().unwrap();
    let ld: f64 = rows[1][2].parse().unwrap();
    assert!((mf - 5.0 / 12.0).abs() < 1e-9);
    assert!(((ld - mf) / mf).abs() < 0.05);
    assert_eq!(csv_rows(&r.read("level_density_peaks.csv")).len(), 4);
    assert_no_orphans(&r.out, &r.manifest());
}

#[test]
fn gaps_against_xi_flag_unresolved_points() {
    let r = run(
        "gaps-xi",
        r#"{"model": "LMG", "N": 60, "xi_grid": {"start": 0, "stop": 1, "step": "0.1"}, "precision": {"mode": "double"}}"#,
        &["--plots"],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = csv_rows(&r.read("gaps_xi.csv"));
    assert_eq!(rows.len(), 12);
    // the doublet closes below double resolution deep in the broken phase
    assert!(rows[1..].iter().any(|r| r[7] == "false"));
    assert!(rows[1..].iter().any(|r| r[7] == "true"));
    assert!(r.stdout().contains("below the certified resolution"));
    assert!(r.manifest()["notes"].as_array().unwrap().len() == 1);
}
