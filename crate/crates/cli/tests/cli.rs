use std::fs;

use ppconv::{run_with, EXIT_ACCEPTANCE, EXIT_INVALID, EXIT_NO_CONVERGENCE, EXIT_OK};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ppconv").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn reference_cfg() -> String {
    format!("{}/../../configs/reference.cfg", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn missing_config_names_the_path() {
    let (code, _, err) = run(&["simulate", "--config", "/no/such/file.cfg"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("/no/such/file.cfg"), "{err}");
}

#[test]
fn low_duty_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "vi = 48\n\nd = 0.4\n").unwrap();
    let (code, _, err) = run(&["analytic", "--config", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("bad.cfg:3: D must exceed 0.5"), "{err}");
}

#[test]
fn literal_table_leakage_warns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lit.cfg");
    fs::write(&path, "llk1 = 1109u\nllk2 = 1109u\n").unwrap();
    let (_, _, err) = run(&["analytic", "--config", path.to_str().unwrap(), "--samples", "64"]);
    assert!(err.contains("warning:"), "{err}");
}

#[test]
fn design_recovers_the_reference_duty() {
    let (code, out, _) = run(&["design", "--vi", "48", "--vo2", "6.59", "--n", "8", "--fs", "40k", "--load", "4.5"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("D        = 0.6698"), "{out}");
}

#[test]
fn design_rejects_unreachable_gain() {
    let (code, _, err) = run(&["design", "--vi", "48", "--vo2", "30", "--n", "8", "--fs", "40k", "--load", "4.5"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("gain unattainable"), "{err}");
}

#[test]
fn verify_passes_on_the_reference() {
    let (code, out, err) = run(&["verify", "--config", &reference_cfg()]);
    assert_eq!(code, EXIT_OK, "{out}\n{err}");
    assert_eq!(out.matches("[PASS]").count(), 10, "{out}");
    assert!(out.contains("110.24"));
}

#[test]
fn verify_skips_table_checks_off_reference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("off.cfg");
    fs::write(&path, "llk = 200u\n").unwrap();
    let (code, out, _) = run(&["verify", "--config", path.to_str().unwrap()]);
    assert!(out.contains("[SKIP]  1"), "{out}");
    assert!(code == EXIT_OK || code == EXIT_ACCEPTANCE, "{code}");
}

#[test]
fn convergence_failure_exits_two() {
    let (code, _, err) = run(&["simulate", "--periods", "3"]);
    assert_eq!(code, EXIT_NO_CONVERGENCE);
    assert!(err.contains("no convergence"), "{err}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let d = dir.path().to_str().unwrap();
        let (code, _, err) = run(&["simulate", "--config", &reference_cfg(), "--out", d, "--gates-csv", "--samples", "256"]);
        assert_eq!(code, EXIT_OK, "{err}");
    }
    for name in ["waveforms.csv", "events.csv", "gates.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
        assert!(x.starts_with(b"# params-hash: "), "{name}");
    }
    let csv = fs::read_to_string(a.path().join("waveforms.csv")).unwrap();
    let header = csv.lines().nth(1).unwrap();
    assert!(header.starts_with("t,i_L,i_LK1,i_LK2,i_S1,"), "{header}");
    assert_eq!(csv.lines().count(), 2 + 256);
}

#[test]
fn analyze_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, out, err) = run(&["analyze", "--engine", "analytic", "--out", d, "--thresh-zcs", "1"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("soft switching"));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("metric,value,target_analytic,target_sim,delta_rel"));
}

#[test]
fn analytic_rejects_snubbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sn.cfg");
    fs::write(&path, "csn = 1n\n").unwrap();
    let (code, _, err) = run(&["analytic", "--config", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("Csn"), "{err}");
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(run(&["--help"]).0, EXIT_OK);
    assert_eq!(run(&["simulate", "--bogus"]).0, EXIT_INVALID);
    assert_eq!(run(&["simulate", "--gates-csv"]).0, EXIT_INVALID);
}
