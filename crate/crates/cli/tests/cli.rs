use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use stoqlab_cli::{parse_config, Scenario};

fn stoqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stoqlab"))
        .args(args)
        .env("STOQLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_NELSON: &str = "\
scenario = \"nelson\"
seed = 11
potential.harmonic.omega = 1
grid.x_min = -8
grid.x_max = 8
grid.n_points = 401
integrator.dt = 0.002
integrator.steps = 500
integrator.record_stride = 10
ensemble.n_traj = 400
ensemble.bins = 20
";

#[test]
fn eigen_run_writes_declared_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "potential.harmonic.omega = 1\neigen.count = 3\n");
    let out = stoqlab(&["eigen", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let m = manifest(&out_dir);
    assert_eq!(m["scenario"], "eigen");
    assert_eq!(m["exit_code"], 0);
    let declared: Vec<&str> = m["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["path"].as_str().unwrap())
        .collect();
    assert!(declared.contains(&"eigenvalues.csv"));
    for entry in fs::read_dir(&out_dir).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        if name != "manifest.json" {
            assert!(declared.contains(&name.as_str()), "{name} not in manifest");
        }
    }

    let table = fs::read_to_string(out_dir.join("eigenvalues.csv")).unwrap();
    let energies: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(energies.len(), 3);
    for (n, e) in energies.iter().enumerate() {
        assert!((e - (n as f64 + 0.5)).abs() < 1e-4, "E_{n} = {e}");
    }
}

#[test]
fn nelson_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL_NELSON);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = stoqlab(&["nelson", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    for name in ["histogram.csv", "flux_velocity.csv", "osmotic_velocity.csv"] {
        let x = fs::read(a.join(name)).unwrap();
        let y = fs::read(b.join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs between reruns");
    }
}

#[test]
fn out_of_range_branch_is_rejected_with_a_named_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "potential.harmonic.omega = 1\nparams.lambda = 2\n");
    let out = stoqlab(&["eigen", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lambda_branch must be +1 or -1"), "{}", stderr(&out));
}

#[test]
fn two_potentials_are_ambiguous() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "potential.harmonic.omega = 1\npotential.box.L = 4\n");
    let out = stoqlab(&["eigen", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ambiguous potential"), "{}", stderr(&out));
}

#[test]
fn strongly_damped_sed_is_invalid_input() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o");
    let cfg = write_config(tmp.path(), "potential.harmonic.omega = 1\nsed.gamma = 0.5\n");
    let out = stoqlab(&["sed", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let m = manifest(&out_dir);
    assert_eq!(m["status"], "invalid_input");
    assert!(m["error"].as_str().is_some());
}

#[test]
fn unknown_scenario_exits_with_invalid_input() {
    let out = stoqlab(&["warp-drive"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flipped_osmotic_velocity_fails_the_nelson_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o");
    let cfg = write_config(
        tmp.path(),
        "potential.harmonic.omega = 1\n\
         verify.inject = \"flip-osmotic\"\n\
         verify.sed_realizations = 20\n\
         verify.variant_realizations = 20\n\
         verify.zpf_realizations = 20\n",
    );
    let out = stoqlab(&["verify", "--config", &cfg, "--fast", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    let nelson = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "nelson-sampling")
        .expect("nelson check reported");
    assert_eq!(nelson["status"], "fail");
    let m = manifest(&out_dir);
    let flags: Vec<&str> = m["flags"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    assert!(flags.contains(&"check_failed:nelson-sampling"), "{flags:?}");
}

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    prop::sample::select(Scenario::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emitted_config_parses_back(
        scenario in scenario_strategy(),
        seed in 0u64..1_000_000,
        omega in 0.1f64..5.0,
        hbar in 0.2f64..3.0,
        n_points in 101usize..3001,
        steps in 1usize..100_000,
        n_traj in 1usize..100_000,
        lambda in prop::bool::ANY,
    ) {
        let text = format!(
            "scenario = \"{}\"\nseed = {seed}\npotential.harmonic.omega = {omega:?}\n\
             params.hbar = {hbar:?}\nparams.lambda = {}\ngrid.n_points = {n_points}\n\
             integrator.steps = {steps}\nensemble.n_traj = {n_traj}\n",
            scenario.name(),
            if lambda { 1 } else { -1 },
        );
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.emit()).unwrap();
        prop_assert_eq!(cfg, again);
    }
}
