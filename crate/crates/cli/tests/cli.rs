use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use polycs::epsiloncs::{wavefunction_closed, StateLabel};
use polycs::polyfock::log_sigma;

fn polycs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polycs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows (header and `#` comments dropped) as numbers.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn normalization_at_origin() {
    let o = polycs(&["--command", "eval", "--quantity", "normalization", "--m", "3", "--eps", "0.7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "z_re,z_im,re,im,log_scale");
    let r = rows(&text);
    assert_eq!(r.len(), 1);
    assert!((r[0][2] - (-2.1f64).exp() / PI).abs() < 1e-16);
    assert_eq!(&r[0][3..], &[0.0, 0.0]);
}

#[test]
fn overlap_with_itself_is_one() {
    let o = polycs(&[
        "--command", "eval", "--quantity", "kernel-overlap", "--m", "2", "--eps", "0.4",
        "--z-re", "0.7", "--z-im", "-1.1", "--w-re", "0.7", "--w-im", "-1.1",
    ]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert!((r[0][2] - 1.0).abs() < 1e-12);
    assert_eq!(r[0][3], 0.0);
}

#[test]
fn wavefunction_rows_equal_library_calls() {
    let o = polycs(&[
        "--command", "eval", "--quantity", "wavefunction", "--m", "1", "--eps", "0.5", "--z-re", "1",
        "--x-min", "-4", "--x-max", "4", "--x-count", "81",
    ]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 81);
    let label = StateLabel::new(Complex64::new(1.0, 0.0), 1, 0.5).unwrap();
    for row in &r {
        let v = wavefunction_closed(row[0], &label).unwrap();
        assert_eq!((row[1], row[2]), (v.re, v.im), "x = {}", row[0]);
    }
}

#[test]
fn json_format_is_one_record_per_line() {
    let o = polycs(&[
        "--command", "eval", "--quantity", "kernel-km", "--m", "1", "--grid-re=-1,1,3", "--w-re", "0.5",
        "--format", "json",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("re").is_some() && v.get("z_re").is_some());
    }
}

#[test]
fn large_sigma_switches_to_log_scale() {
    let o = polycs(&["--command", "eval", "--quantity", "sigma", "--m", "1", "--eps", "0.1", "--n", "200"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 201);
    assert_eq!(r[0][3], 0.0);
    assert!((r[0][1] - PI).abs() < 1e-15);
    let last = &r[200];
    assert_eq!(last[3], 1.0);
    assert_eq!(last[1], log_sigma(1, 0.1, 200).unwrap());
}

#[test]
fn transform_of_ground_state_is_constant() {
    let o = polycs(&[
        "--command", "transform", "--n", "0", "--m", "0", "--eps", "0", "--grid-re=-1,1,3", "--grid-im=-1,1,3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# ") && text.contains("quad_order=96"));
    let r = rows(&text);
    assert_eq!(r.len(), 9);
    for row in r {
        assert!((row[2] - 1.0 / PI.sqrt()).abs() < 1e-12 && row[3].abs() < 1e-12);
    }
}

#[test]
fn transform_of_first_eigenstate_is_conjugate_monomial() {
    // the transform is conjugate-linear, so φ₁ maps to z̄/√π
    let o = polycs(&["--command", "transform", "--n", "1", "--eps", "0", "--grid-re", "0,1,3", "--grid-im=-1,1,3"]);
    assert!(o.status.success());
    for row in rows(&stdout(&o)) {
        let want = Complex64::new(row[0], row[1]).conj() / PI.sqrt();
        assert!((Complex64::new(row[2], row[3]) - want).norm() < 1e-12);
    }
}

#[test]
fn transform_of_sampled_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi0.csv");
    let mut text = String::from("x,re\n");
    for i in 0..=1200 {
        let x = -6.0 + 0.01 * i as f64;
        text.push_str(&format!("{x},{}\n", (-x * x / 2.0).exp() / PI.powf(0.25)));
    }
    std::fs::write(&path, text).unwrap();
    let o = polycs(&[
        "--command", "transform", "--eps", "0", "--input", path.to_str().unwrap(), "--interp", "spline",
        "--quad-hermite", "128",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert!((r[0][2] - 1.0 / PI.sqrt()).abs() < 1e-6);
}

#[test]
fn empty_grid_writes_only_the_header() {
    let o = polycs(&["--command", "transform", "--n", "0", "--eps", "0.2", "--grid-re", "0,1,0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(rows(&text).is_empty());
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1);
}

#[test]
fn io_errors_exit_4() {
    let o = polycs(&["--command", "transform", "--eps", "0.2", "--input", "/definitely/not/here.csv"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("--input"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,re\n0,1\noops,2\n").unwrap();
    let o = polycs(&["--command", "transform", "--eps", "0.2", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn inadequate_quadrature_exits_3() {
    let o = polycs(&["--command", "transform", "--n", "30", "--eps", "0.3", "--z-re", "2", "--quad-hermite", "4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("quadrature inadequate"));
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let cases: &[(&[&str], &str)] = &[
        (&["--command", "eval", "--quantity", "phi", "--m", "1"], "--n"),
        (&["--command", "eval", "--quantity", "phi", "--n", "1", "--m", "x"], "--m"),
        (&["--command", "eval", "--quantity", "wavefunction"], "--eps"),
        (&["--command", "eval", "--quantity", "kernel-km", "--grid-re", "1,0,3"], "--grid-re"),
        (&["--command", "eval", "--quantity", "kernel-km", "--eps", "-1"], "--eps"),
        (&["--command", "sweep", "--quantity", "heat", "--eps-list", "0.1,0.2"], "--eps-list"),
        (&["--command", "bogus"], "--command"),
    ];
    for (args, flag) in cases {
        let o = polycs(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(flag), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn verify_without_suites_is_empty() {
    let o = polycs(&["--command", "verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn verify_identity_matrix_defaults() {
    let o = polycs(&["--command", "verify", "--suite", "identity_matrix"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["suite"], "identity_matrix");
    assert_eq!(v["passed"], true);
    for key in ["params", "defect_abs", "defect_rel", "tolerance", "runtime_ms"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn verify_error_paths() {
    let o = polycs(&["--command", "verify", "--suite", "identity_matrix", "--quad-radial", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("radial order >= 13"));

    let o = polycs(&["--command", "verify", "--suite", "no_such_suite"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_failure_exits_1() {
    // the heat-operator limit misses its 0.05 target at ε = 0.02
    let o = polycs(&["--command", "verify", "--suite", "heat_limit"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn verify_reads_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suites.json");
    std::fs::write(
        &cfg,
        r#"[{"suite": "overlap", "params": {"ms": [1]}}, {"suite": "deruyts"}]"#,
    )
    .unwrap();
    let out = dir.path().join("reports.jsonl");
    let o = polycs(&[
        "--command", "verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let suites: Vec<String> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["suite"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(suites, ["overlap", "deruyts"]);

    std::fs::write(&cfg, r#"[{"suite": "overlap", "params": {"mss": [1]}}]"#).unwrap();
    let o = polycs(&["--command", "verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweeps_decrease() {
    let o = polycs(&[
        "--command", "sweep", "--quantity", "kernel-overlap", "--m", "1", "--z-re", "0.3", "--w-im", "0.5",
        "--eps-list", "0.1,0.01,0.001",
    ]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert!(r[0][1] > r[1][1] && r[1][1] > r[2][1]);

    let o = polycs(&["--command", "sweep", "--quantity", "identity", "--m", "2", "--eps-list", "0.5,0.1,0.02"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert!(r[0][1] > r[1][1] && r[1][1] > r[2][1]);
}

fn run_to(path: &Path, args: &[&str]) -> Vec<u8> {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", path.to_str().unwrap()]);
    assert!(polycs(&all).status.success());
    std::fs::read(path).unwrap()
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["--command", "eval", "--quantity", "heat-kernel", "--eps", "0.3", "--x-count", "21"],
        &["--command", "transform", "--n", "3", "--m", "2", "--eps", "0.5", "--grid-re=-1,1,5", "--grid-im=-1,1,5"],
        &["--command", "verify", "--suite", "overlap,thermal,mehler"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = run_to(&dir.path().join(format!("a{i}")), args);
        let b = run_to(&dir.path().join(format!("b{i}")), args);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}
