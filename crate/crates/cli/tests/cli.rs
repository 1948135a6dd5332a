use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracmix"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env_remove("FRACMIX_OUT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn selftest_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["selftest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(d.path().join("selftest.csv")).unwrap();
    assert!(csv.starts_with("suite,check,pass,value,tolerance"));
    assert!(!csv.contains(",false,"));
}

#[test]
fn outputs_are_reproducible() {
    for args in [
        &["decay", "--series", "complementary", "--mu", "0.64", "--flow", "geodesic"][..],
        &["--format", "json", "mixbound", "--sweep", "20"][..],
        &["--format", "json", "selftest"][..],
        &["solve"][..],
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert_eq!(code(&run(a.path(), args)), 0, "{args:?}");
        assert_eq!(code(&run(b.path(), args)), 0, "{args:?}");
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
        }
    }
}

#[test]
fn decay_example_fits_the_gap() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["decay", "--series", "complementary", "--mu", "0.64", "--flow", "geodesic"]);
    assert_eq!(code(&o), 0);
    let fit = fs::read_to_string(d.path().join("decay_fit.csv")).unwrap();
    let exponent: f64 = fit.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((exponent - 0.2).abs() < 0.01);
}

#[test]
fn roots_reports_the_system() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["--format", "json", "roots", "--family", "A", "--rank", "3", "--epsilon", "0.1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("roots.json")).unwrap()).unwrap();
    assert_eq!(v["system"].as_array().unwrap().len(), 2);
    assert_eq!(v["maximal"], true);
}

#[test]
fn environment_sets_the_output_directory() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fracmix"))
        .args(["tauberian", "--r-prime", "0.25"])
        .env("FRACMIX_OUT", d.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(d.path().join("tauberian.csv").exists());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(d.path(), &["--help"])), 0);
    assert_eq!(code(&run(d.path(), &["nonsense"])), 1);
    assert_eq!(code(&run(d.path(), &["decay", "--no-such-flag"])), 1);
    // Invalid parameters.
    assert_eq!(code(&run(d.path(), &["decay", "--mu", "1.5"])), 1);
    assert_eq!(code(&run(d.path(), &["typeii", "--mode", "solve", "--r", "0.3,0.2"])), 1);
    assert_eq!(code(&run(d.path(), &["roots", "--family", "Q"])), 1);
    // Too few samples in the fit window is a numerical failure.
    assert_eq!(code(&run(d.path(), &["decay", "--t-max", "0.5"])), 2);
    // Grid larger than the node budget.
    assert_eq!(code(&run(d.path(), &["irrep", "--ratio", "1.0000001"])), 2);
}
