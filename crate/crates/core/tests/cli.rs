//! End-to-end tests of the `chiral-array` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const BIN: &str = env!("CARGO_BIN_EXE_chiral-array");
const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs");

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let mut rows = vec![header];
    rows.extend(reader.records().map(|r| r.unwrap().iter().map(String::from).collect()));
    rows
}

fn column<'a>(rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let k = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[k].as_str()).collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const MINIMAL: &str = "[system]\nn_total = 2\nxi_over_pi = 0.25\ndisorder_strength = 0.0\n\n[ensemble]\nrealizations = 1\n";

#[test]
fn minimal_run_writes_the_default_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "minimal.toml", MINIMAL);
    let out = tmp.path().join("out");
    let result = run(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "{}", stderr(&result));
    for kind in ["imbalance", "right_population", "entropy", "pr", "flux_left", "flux_right", "dplr"] {
        let rows = csv_rows(&out.join(format!("{kind}.csv")));
        assert_eq!(rows[0], ["gamma_t", "mean", "stderr", "n_surviving"]);
        assert_eq!(rows.len() - 1, 201, "{kind}");
        assert_eq!(rows[1][0], "0.0000000000000000e0");
    }
    let m = manifest(&out);
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&"imbalance.csv") && outputs.contains(&"manifest.json"));
    assert_eq!(m["realizations"], 1);
}

#[test]
fn missing_n_total_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "bad.toml", "[system]\nxi_over_pi = 0.25\n");
    let out = tmp.path().join("out");
    let result = run(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    let message = stderr(&result);
    assert!(message.contains("n_total"), "{message}");
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn config_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "bad.toml", "[system]\nn_total = 4\nxi_over_pi = 0.25\ndirectionality = \"left\"\n");
    let result = run(&["run", "--config", config.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr(&result).contains("bad.toml:4"), "{}", stderr(&result));
}

#[test]
fn overrides_win_and_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "minimal.toml", MINIMAL);
    let out = tmp.path().join("out");
    let result = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "disorder_strength=0.3",
        "--seed",
        "18446744073709551615",
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let m = manifest(&out);
    let text = m["config"].as_str().unwrap();
    assert!(text.contains("disorder_strength = 0.3"), "{text}");
    assert_eq!(m["master_seed"], u64::MAX);
    let overrides: Vec<&str> = m["overrides"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(overrides.contains(&"disorder_strength=0.3"));
}

#[test]
fn manifest_digest_matches_its_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(tmp.path(), "minimal.toml", MINIMAL);
    let out = tmp.path().join("out");
    assert!(run(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    let m = manifest(&out);
    let digest = hex::encode(Sha256::digest(m["config"].as_str().unwrap().as_bytes()));
    assert_eq!(m["config_digest"].as_str().unwrap(), digest);
    // the canonical text is itself a valid configuration with the same digest
    let again = write(tmp.path(), "canonical.toml", m["config"].as_str().unwrap());
    let out2 = tmp.path().join("out2");
    assert!(run(&["run", "--config", again.to_str().unwrap(), "--out", out2.to_str().unwrap()]).status.success());
    assert_eq!(manifest(&out2)["config_digest"], m["config_digest"]);
}

#[test]
fn one_point_sweep_equals_run() {
    let tmp = tempfile::tempdir().unwrap();
    let base = "[system]\nn_total = 12\nxi_over_pi = 0.25\ndirectionality = 0.2\ndisorder_strength = 0.3\n\n\
                [ensemble]\nrealizations = 8\nseed = 11\nobservables = [\"imbalance\", \"pr\", \"dplr\"]\n";
    let run_cfg = write(tmp.path(), "run.toml", &format!("{base}\n[grid]\nkind = \"explicit\"\ntimes = [0.0, 4000.0]\n"));
    let sweep_cfg = write(
        tmp.path(),
        "sweep.toml",
        &format!("{base}\n[sweep]\naxis = [{{ parameter = \"disorder_strength\", values = [0.3] }}]\nreadout_time = 4000.0\n"),
    );
    let (run_out, sweep_out) = (tmp.path().join("run"), tmp.path().join("sweep"));
    assert!(run(&["run", "--config", run_cfg.to_str().unwrap(), "--out", run_out.to_str().unwrap()]).status.success());
    let result = run(&["sweep", "--sweep", sweep_cfg.to_str().unwrap(), "--out", sweep_out.to_str().unwrap()]);
    assert!(result.status.success(), "{}", stderr(&result));
    let sweep = csv_rows(&sweep_out.join("sweep.csv"));
    assert_eq!(sweep.len(), 2);
    for (kind, col) in [("imbalance", "imbalance"), ("pr", "pr"), ("dplr", "dplr")] {
        let series = csv_rows(&run_out.join(format!("{kind}.csv")));
        let last = series.last().unwrap();
        assert_eq!(last[0], "4.0000000000000000e3");
        assert_eq!(column(&sweep, col)[0], last[1], "{kind} mean");
        assert_eq!(column(&sweep, &format!("{col}_stderr"))[0], last[2], "{kind} stderr");
    }
}

#[test]
fn failing_sweep_point_is_tagged_and_counted() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.toml",
        "[system]\nn_total = 6\nxi_over_pi = 0.25\n\n[ensemble]\nrealizations = 2\n\n\
         [sweep]\naxis = [{ parameter = \"n_clean\", values = [2, 9, 3] }]\nlinks = [\"disordered_from_total\"]\n",
    );
    let out = tmp.path().join("out");
    let result = run(&["sweep", "--sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));
    assert!(stderr(&result).contains("1 of 3 sweep points failed"), "{}", stderr(&result));
    let rows = csv_rows(&out.join("sweep.csv"));
    assert_eq!(column(&rows, "error"), ["", "INVALID_CONFIG", ""]);
    let points = manifest(&out)["points"].as_array().unwrap().clone();
    assert_eq!(points.len(), 3);
    assert!(points[1]["config_digest"].is_null() && points[0]["config_digest"].is_string());
}

#[test]
fn size_sweep_has_one_row_per_grid_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!("{CONFIGS}/gap_ratio_vs_size.toml");
    let result = run(&["sweep", "--sweep", &cfg, "--out", out.to_str().unwrap(), "--realizations", "1"]);
    assert!(result.status.success(), "{}", stderr(&result));
    let rows = csv_rows(&out.join("sweep.csv"));
    assert_eq!(rows.len() - 1, 4 * 14);
    let sizes: Vec<&str> = column(&rows, "n_total");
    assert_eq!(sizes.iter().filter(|s| **s == "200").count(), 14);
    let halves = rows[1..].iter().all(|r| {
        let n: usize = r[1].parse().unwrap();
        r[2].parse::<usize>().unwrap() == n / 2
    });
    assert!(halves);
}

#[test]
fn single_emitter_spectrum() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "one.toml", "[system]\nn_total = 1\nxi_over_pi = 0.25\n");
    let out = tmp.path().join("out");
    let result = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--realizations", "1"]);
    assert!(result.status.success(), "{}", stderr(&result));
    let rows = csv_rows(&out.join("spectrum.csv"));
    assert_eq!(rows[0], ["seed", "index", "re", "im", "zone_weight", "retained"]);
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[1][2].as_str(), rows[1][3].as_str()), ("-5.0000000000000000e-1", "0.0000000000000000e0"));
    assert!(out.join("gap_statistics.csv").exists());
}

#[test]
fn chiral_spectrum_warns_but_still_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "chiral.toml",
        "[system]\nn_total = 40\nxi_over_pi = 0.25\ndirectionality = 0.2\ndisorder_strength = 0.5\n",
    );
    let out = tmp.path().join("out");
    let result = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--realizations", "20"]);
    assert!(result.status.success(), "{}", stderr(&result));
    assert!(stderr(&result).contains("level statistics can only be utilized in the reciprocal regime"));
    let stats = csv_rows(&out.join("gap_statistics.csv"));
    assert_eq!(column(&stats, "error"), [""]);
    assert!(!column(&stats, "mean_gap_ratio")[0].is_empty());
}

#[test]
fn repeated_spectra_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "clean.toml", "[system]\nn_total = 30\nxi_over_pi = 0.25\n");
    let mut files = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "3")] {
        let out = tmp.path().join(name);
        let args = ["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers];
        assert!(run(&args).status.success());
        files.push((std::fs::read(out.join("spectrum.csv")).unwrap(), std::fs::read(out.join("gap_statistics.csv")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["run"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--config", "x.toml"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
