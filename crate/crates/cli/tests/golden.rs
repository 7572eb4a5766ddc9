use std::path::PathBuf;

use termshape_cli::run;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("termshape").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Compares stdout with `tests/golden/<name>`; set `UPDATE_GOLDEN=1` to rewrite.
fn check(name: &str, args: &[&str]) {
    let (code, out, err) = invoke(args);
    assert_eq!(code, 0, "{name}: {err}");
    assert!(err.is_empty(), "{name}: unexpected diagnostics {err}");
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &out).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(out, want, "{name} drifted from its golden file");
}

#[test]
fn classify_ns_hump() {
    check("classify_ns_hump.json", &["classify", "--curve", "forward", "--beta", "0,0,1,0", "--tau1", "1", "--tau2", "0.5"]);
    check("classify_hdh.csv", &["classify", "--beta", "0,-0.7,0.1,1", "--tau1", "1", "--tau2", "0.5", "--format", "csv"]);
}

#[test]
fn segment() {
    check("segment.json", &["segment", "--curve", "yield", "--beta", "0,0,0,1", "--tau1", "1", "--tau2", "0.5", "--grid", "-2,2,-3,3,4,3"]);
    check(
        "segment.csv",
        &["segment", "--beta", "0,0,0,-1", "--tau1", "1", "--tau2", "3.6", "--grid", "-10,4,-8,6,5,4", "--format", "csv", "--threads", "2"],
    );
}

#[test]
fn envelope() {
    check("envelope.csv", &["envelope", "--tau1", "1", "--tau2", "0.5", "--n", "8", "--format", "csv"]);
    check("envelope_si.json", &["envelope", "--curve", "yield", "--tau1", "1", "--tau2", "3", "--t", "24", "--n", "6"]);
}

#[test]
fn attainable() {
    check("attainable.json", &["attainable", "--beta", "0,0,1,-1", "--tau1", "1", "--tau2", "5"]);
    check("attainable_bliss.csv", &["attainable", "--beta", "0,0,0,1", "--tau1", "1", "--tau2", "1.5", "--format", "csv"]);
}

#[test]
fn horizons() {
    check("horizons.json", &["horizons", "--beta2", "1", "--beta3", "1", "--tau1", "1"]);
    check("horizons_negative.csv", &["horizons", "--beta", "0,0,-0.1,1", "--tau1", "2", "--format", "csv"]);
}

#[test]
fn probabilities() {
    check("probabilities.json", &["probabilities", "--beta", "0,-0.6,0.02,1", "--tau1", "1", "--t", "0.5"]);
    check("probabilities_yield.csv", &["probabilities", "--curve", "yield", "--beta", "0,0,-0.1,1", "--tau1", "1", "--t", "1", "--format", "csv"]);
}

#[test]
fn simulate() {
    check("simulate.json", &["simulate", "--beta", "0,-0.6,0.02,1", "--tau1", "1", "--t", "0.5", "--n", "2000", "--seed", "7"]);
}

#[test]
fn ingest() {
    let series = data("series.csv");
    check("ingest.json", &["ingest", &series, "--curve", "forward"]);
    check("ingest.csv", &["ingest", &series, "--format", "csv"]);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec![],
        vec!["classify"],
        vec!["classify", "--beta", "0,0", "--tau1", "1"],
        vec!["classify", "--beta", "0,0,1,1", "--tau1", "1"],
        vec!["segment", "--beta", "0,0,0,1", "--tau1", "1", "--tau2", "0.5", "--grid", "0,1,0,1,1,1"],
        vec!["frobnicate"],
        vec!["classify", "--beta", "0,0,1,0", "--tau1", "1", "--format", "xml"],
    ] {
        let (code, out, err) = invoke(&args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty(), "{args:?} wrote {out}");
        assert!(!err.is_empty());
    }
}

#[test]
fn domain_errors_exit_1() {
    let (code, out, err) = invoke(&["classify", "--tau1", "1", "--tau2", "1", "--beta", "0,0,1,1"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("degenerate family"), "{err}");
    for args in [
        vec!["envelope", "--tau1", "1", "--tau2", "3"],
        vec!["probabilities", "--beta", "0,0,1,-1", "--tau1", "1", "--t", "1"],
        vec!["probabilities", "--beta", "0,0,1,1", "--tau1", "1", "--tau2", "0.7", "--t", "1"],
        vec!["probabilities", "--beta", "0,0,1,1", "--tau1", "1", "--t", "0"],
        vec!["attainable", "--beta", "0,0,1,1", "--tau1", "-1", "--tau2", "1"],
        vec!["ingest", "/nonexistent/series.csv"],
    ] {
        let (code, out, _) = invoke(&args);
        assert_eq!(code, 1, "{args:?}");
        assert!(out.is_empty());
    }
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("termshape-out-{}.json", std::process::id()));
    let p = path.to_string_lossy().into_owned();
    let (code, out, _) = invoke(&["horizons", "--beta2", "1", "--beta3", "1", "--tau1", "1", "--out", &p]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written, std::fs::read_to_string(golden_dir().join("horizons.json")).unwrap());
}

#[test]
fn help_goes_to_stdout() {
    let (code, out, err) = invoke(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("classify") && err.is_empty());
}
