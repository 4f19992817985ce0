use std::path::Path;
use std::process::{Command, Output};

use phaseret::io;

fn phaseret(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaseret")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SIGNAL: &str = "1 0.5\n-0.3 0.2\n0.7 -1\n0.1 0.1\n0.5 0\n-1 1\n0.2 0.3\n0.4 -0.6\n";

#[test]
fn gen_ensemble_writes_28_vectors_for_psi_8() {
    let dir = tempfile::tempdir().unwrap();
    let o = phaseret(&["gen-ensemble", "--kind", "psi", "--n", "8", "--out", "ens.txt"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("seed: 0"));
    let e = io::read_ensemble(&dir.path().join("ens.txt")).unwrap();
    assert_eq!(e.len(), 28);
    assert_eq!(e.dim(), 8);
}

#[test]
fn measure_recover_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("x.txt"), SIGNAL).unwrap();
    assert!(phaseret(&["gen-ensemble", "--kind", "psi", "--n", "8", "--out", "ens.txt"], d).status.success());

    // noiseless first: exact recovery
    let o = phaseret(&["measure", "--ensemble", "ens.txt", "--signal", "x.txt", "--out", "b0.txt"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = phaseret(
        &[
            "recover",
            "--method",
            "algebraic",
            "--kind",
            "psi",
            "--n",
            "8",
            "--measurements",
            "b0.txt",
            "--truth",
            "x.txt",
            "--out",
            "xhat.txt",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let x = io::read_vector(&d.join("x.txt")).unwrap();
    let xh = io::read_vector(&d.join("xhat.txt")).unwrap();
    assert!(phaseret::aligned_error(&x, &xh).unwrap() < 1e-20);
    assert!(stdout(&o).contains("aligned_error:"));

    // noisy run from the documented example
    let o = phaseret(
        &[
            "measure",
            "--ensemble",
            "ens.txt",
            "--signal",
            "x.txt",
            "--noise-var",
            "0.01",
            "--seed",
            "7",
            "--out",
            "b.txt",
        ],
        d,
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("seed: 7"));
    let o = phaseret(
        &[
            "recover",
            "--method",
            "algebraic",
            "--kind",
            "psi",
            "--n",
            "8",
            "--measurements",
            "b.txt",
            "--truth",
            "x.txt",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let err: f64 = stdout(&o).lines().find_map(|l| l.strip_prefix("relative_error: ")).unwrap().parse().unwrap();
    assert!(err > 0.0 && err < 1.0, "relative error {err}");
}

#[test]
fn sdp_recovery_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("x.txt"), SIGNAL).unwrap();
    assert!(phaseret(&["gen-ensemble", "--kind", "phi", "--n", "8", "--out", "ens.txt"], d).status.success());
    assert!(phaseret(&["measure", "--ensemble", "ens.txt", "--signal", "x.txt", "--out", "b.txt"], d).status.success());
    let o = phaseret(
        &["recover", "--method", "sdp", "--ensemble", "ens.txt", "--measurements", "b.txt", "--out", "xh.txt"],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let x = io::read_vector(&d.join("x.txt")).unwrap();
    let xh = io::read_vector(&d.join("xh.txt")).unwrap();
    assert!(phaseret::aligned_error(&x, &xh).unwrap() <= 1e-8 * x.norm_sqr());
}

#[test]
fn verify_certificate_prints_pass_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = phaseret(&["verify", "--suite", "certificate", "--kind", "phi", "--n", "8", "--trials", "20"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let checks: Vec<&str> = out.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|l| l.starts_with("PASS ")), "{out}");
}

#[test]
fn every_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["frames", "nullspace", "certificate", "injectivity", "masks", "bounds"] {
        for kind in ["phi", "psi"] {
            let o = phaseret(&["verify", "--suite", suite, "--kind", kind, "--n", "6", "--trials", "5"], dir.path());
            assert!(o.status.success(), "{suite} {kind}: {}", stdout(&o));
            assert!(!stdout(&o).contains("FAIL"));
        }
    }
}

#[test]
fn bench_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |jobs: &'static str, out: &'static str| {
        vec![
            "bench", "--kind", "phi", "--n", "16", "--trials", "50", "--snr", "20,40", "--seed", "3", "--jobs", jobs,
            "--out", out,
        ]
    };
    let o = phaseret(&args("1", "a.csv"), d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("seed: 3"));
    assert!(phaseret(&args("3", "b.csv"), d).status.success());
    let a = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(d.join("b.csv")).unwrap());
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some(phaseret::bench::CSV_HEADER));
    assert_eq!(lines.count(), 2);
}

#[test]
fn masks_demo_recovers() {
    let dir = tempfile::tempdir().unwrap();
    let o = phaseret(&["masks", "--kind", "psi", "--n", "16", "--seed", "4", "--out", "m.txt"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let err: f64 = stdout(&o).lines().find_map(|l| l.strip_prefix("relative_error: ")).unwrap().parse().unwrap();
    assert!(err < 1e-18);
    assert_eq!(io::read_intensities(&dir.path().join("m.txt")).unwrap().len(), 64);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = phaseret(&["gen-ensemble", "--kind", "psi", "--n", "8", "--bogus", "1", "--out", "e.txt"], d);
    assert_eq!(o.status.code(), Some(1));
    let o = phaseret(&["gen-ensemble", "--kind", "random", "--n", "8", "--out", "e.txt"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
    let o = phaseret(&["recover", "--kind", "psi", "--n", "8", "--measurements", "missing.txt"], d);
    assert_eq!(o.status.code(), Some(1));

    // all-zero intensities: every block is degenerate
    std::fs::write(d.join("zeros.txt"), "0\n".repeat(28)).unwrap();
    let o = phaseret(&["recover", "--kind", "psi", "--n", "8", "--measurements", "zeros.txt"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));

    // SDP with a one-iteration budget cannot converge
    std::fs::write(d.join("x.txt"), SIGNAL).unwrap();
    assert!(phaseret(&["measure", "--kind", "psi", "--n", "8", "--signal", "x.txt", "--out", "b.txt"], d)
        .status
        .success());
    let o = phaseret(
        &["recover", "--method", "sdp", "--kind", "psi", "--n", "8", "--measurements", "b.txt", "--max-iter", "1"],
        d,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_documents_formats() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["gen-ensemble", "measure", "recover", "masks"] {
        let o = phaseret(&[sub, "--help"], dir.path());
        assert!(o.status.success());
        assert!(stdout(&o).contains("File formats"), "{sub}");
    }
    for sub in ["bench", "verify"] {
        let o = phaseret(&[sub, "--help"], dir.path());
        assert!(o.status.success());
        assert!(stdout(&o).contains("Output format"), "{sub}");
        assert!(stdout(&o).contains("--seed"), "{sub}");
    }
}
