use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
name = "small"
seed = 21
snr_db = [0.0, 10.0, 20.0]

[run]
uses_per_point = 4000
beta_realizations = 200

[system]
k = 2
n_a = 4
n_t = 8

[[curves]]
label = "F_A"
codebook = "array_response"

[[curves]]
label = "F_B, B=4"
codebook = "beamsteering"
bits = 4
"#;

fn hbfsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbfsm")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(out: &Path, name: &str) -> serde_json::Value {
    let text = fs::read_to_string(out.join(format!("{name}-manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn ber_run_writes_one_row_per_grid_point() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = hbfsm(&["ber", &cfg, "--out", out.to_str().unwrap(), "--no-plot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("small-f_a.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "snr_db,ber,ber_spatial,ber_symbol,bits,errors,stderr,degenerate");
    assert_eq!(lines.count(), 3);
    assert!(out.join("small-f_b__b_4.csv").exists());
    assert!(!out.join("small-ber.svg").exists());

    let m = manifest(&out, "small");
    assert_eq!(m["seed"], 21);
    assert_eq!(m["command"], "ber");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    let curves = m["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 2);
    for c in curves {
        let beta = c["beta"].as_f64().unwrap();
        assert!(beta.is_finite() && beta > 0.0);
        assert_eq!(c["beta_realizations"], 200);
    }
}

#[test]
fn rerun_is_byte_identical_and_seed_override_applies() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let run = |dir: &str, extra: &[&str]| {
        let out = tmp.path().join(dir);
        let mut args = vec!["ber", cfg.as_str(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = hbfsm(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        (fs::read(out.join("small-f_b__b_4.csv")).unwrap(), out)
    };
    let (a, _) = run("a", &[]);
    let (b, _) = run("b", &["--workers", "3"]);
    assert_eq!(a, b);
    let (c, out) = run("c", &["--seed", "7"]);
    assert_ne!(a, c);
    assert_eq!(manifest(&out, "small")["seed"], 7);
    assert!(out.join("small-ber.svg").exists());
}

#[test]
fn cli_grid_and_trials_override_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = hbfsm(&["ber", &cfg, "--snr", "-5:5:2.5", "--trials", "1600", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("small-f_a.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("-5,"));
    assert_eq!(manifest(&out, "small")["config"]["run"]["uses_per_point"], 1600);
}

#[test]
fn missing_config_is_io_error() {
    let tmp = TempDir::new().unwrap();
    let o = hbfsm(&["ber", tmp.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.toml"));
}

#[test]
fn unwritable_output_is_io_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = hbfsm(&["ber", &cfg, "--out", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn non_power_of_two_arrays_is_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("n_a = 4", "n_a = 3"));
    let o = hbfsm(&["ber", &cfg, "--out", tmp.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_a"), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_key_is_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("n_t = 8", "n_t = 8\nantennas = 8"));
    let o = hbfsm(&["ber", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("antennas"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(hbfsm(&["ber"]).status.code(), Some(2));
    assert_eq!(hbfsm(&["ber", "--preset", "fig3", "--snr", "1:0:1"]).status.code(), Some(2));
    assert_eq!(hbfsm(&["ber", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(hbfsm(&["launch"]).status.code(), Some(2));
}

#[test]
fn compare_rejects_unequal_rates() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{SMALL}\n[[curves]]\nlabel = \"ref\"\nscheme = \"classical_sm\"\nn_t = 8\nreference = true\n");
    let cfg = write_config(tmp.path(), &text);
    let o = hbfsm(&["compare", &cfg, "--out", tmp.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn quantization_and_rate_tables() {
    let tmp = TempDir::new().unwrap();
    let text = format!(
        "{}\n[rate]\nrealizations = 3\n\n[quantization]\nbits = [4, 6]\ntrials = 20\n",
        SMALL.replace("n_a = 4", "n_a = 2")
    );
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let o = hbfsm(&["quantization", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let q = fs::read_to_string(out.join("small-quantization.csv")).unwrap();
    assert_eq!(q.lines().next().unwrap(), "B,mean_dc2,max_dc2,fitted_bound");
    assert_eq!(q.lines().count(), 3);

    let o = hbfsm(&["rate", &cfg, "--out", out.to_str().unwrap(), "--no-plot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = fs::read_to_string(out.join("small-rate.csv")).unwrap();
    assert_eq!(r.lines().next().unwrap(), "snr_db,exact,lower,upper");
    assert_eq!(r.lines().count(), 4);
}

#[test]
fn beta_report() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = hbfsm(&["beta", &cfg, "--check-realizations", "300", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let b = fs::read_to_string(out.join("small-beta.csv")).unwrap();
    assert_eq!(b.lines().count(), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("beta ="));
}

#[test]
fn presets_resolve_through_the_binary() {
    let tmp = TempDir::new().unwrap();
    for name in ["fig2", "fig3", "fig4"] {
        let o = hbfsm(&["quantization", "--preset", name, "--out", tmp.path().to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
    }
}
