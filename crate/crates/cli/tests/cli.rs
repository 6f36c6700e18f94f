use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn synclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synclab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json_line(o: &Output) -> serde_json::Value {
    let text = stdout(o);
    serde_json::from_str(text.lines().last().expect("some output")).expect("json")
}

#[test]
fn spectrum_of_spin_half_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.csv");
    let o = synclab(&["spectrum", "--model", "spin_half_pair", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["re_lambda", "im_lambda", "class", "residual"]);
    let classes: Vec<String> = rd.records().map(|r| r.unwrap()[2].to_string()).collect();
    assert_eq!(classes.len(), 16);
    assert_eq!(classes.iter().filter(|c| *c == "zero").count(), 2);
    assert_eq!(classes.iter().filter(|c| *c == "oscillating").count(), 2);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spec.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "spectrum");
    assert_eq!(manifest["zero"], 2);
}

#[test]
fn steady_then_phase_dist_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("steady");
    let o = synclab(&[
        "steady", "--model", "spin_half_pair", "-p", "b=0.5", "--eta", "0.01", "--seed", "7", "--grid", "64",
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = json_line(&o);
    for f in ["rho.csv", "sd.csv", "manifest.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let sd = dir.path().join("again.csv");
    let o = synclab(&[
        "phase-dist", "--rho", out_dir.join("rho.csv").to_str().unwrap(), "--spins", "0.5,0.5", "--grid", "64",
        "--out", sd.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = json_line(&o);
    let (sa, sb) = (a["s_max"].as_f64().unwrap(), b["s_max"].as_f64().unwrap());
    assert!(sa > 0.0 && (sa - sb).abs() <= 1e-12 * sa.max(1.0), "{sa} vs {sb}");
    assert_eq!(fs::read_to_string(out_dir.join("sd.csv")).unwrap(), fs::read_to_string(&sd).unwrap());
}

#[test]
fn unperturbed_degenerate_steady_state_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("steady");
    let o = synclab(&["steady", "--model", "spin_half_pair", "--eta", "0", "--out-dir", out_dir.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("not unique"));
    assert!(!out_dir.join("rho.csv").exists());
}

#[test]
fn bad_inputs_exit_nonzero() {
    assert!(!synclab(&["spectrum", "--model", "no_such_model"]).status.success());
    assert!(!synclab(&["spectrum", "--model", "spin1_chain", "-p", "bogus=1"]).status.success());
    assert!(!synclab(&["sweep", "--config", "/nonexistent.toml"]).status.success());
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.csv");
    fs::write(&rho, "row,col,re,im\n0,0,1,0\n").unwrap();
    let out = dir.path().join("sd.csv");
    let o = synclab(&["phase-dist", "--rho", rho.to_str().unwrap(), "--spins", "0.5,0.5", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

fn write_config(dir: &Path, out: &Path) -> std::path::PathBuf {
    let cfg = dir.join("sweep.toml");
    fs::write(
        &cfg,
        format!(
            "[model]\npreset = \"spin_half_pair\"\n[sweep]\neta_values = [0.001, 1.0]\nsamples_per_eta = 3\n\
             chi_samples_per_record = 50\ngrid = 32\nbootstrap_resamples = 20\noutput_dir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn sweep_and_aggregate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write_config(dir.path(), &out);
    let o = synclab(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["records.csv", "chi.csv", "aggregate.csv", "histogram.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let first = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    let o = synclab(&["aggregate", "--input", out.to_str().unwrap(), "--resamples", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("aggregate.csv")).unwrap(), first);
    assert_eq!(stdout(&o).lines().count(), 2);

    let other = dir.path().join("other");
    let o = synclab(&["sweep", "--config", cfg.to_str().unwrap(), "--output-dir", other.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(other.join("records.csv")).unwrap(), fs::read_to_string(out.join("records.csv")).unwrap());
}

#[test]
fn selftest_passes() {
    let o = synclab(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
