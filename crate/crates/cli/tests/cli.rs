use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn critload(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critload")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn critical_load_reference_material() {
    let o = critload(&["critical-load", "--dim", "2", "--material", s(&data("materials/reference_2d.toml"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# critload "));
    let star: f64 = text.lines().find_map(|l| l.strip_prefix("# lambda_star=")).unwrap().parse().unwrap();
    assert!((star - 1.071).abs() < 1e-3);
    assert!(text.contains("\nkind,lambda,q,hprime,"));
    assert!(text.lines().last().unwrap().starts_with("critical,"));
}

#[test]
fn critical_load_3d_with_large_gamma_binds_on_main() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "m.toml",
        "dim = 3\nq = 2.5\ngamma = 100.0\n[h]\nfamily = \"quad_log\"\nparams = { a = 1.0, b = 2.0 }\n",
    );
    let o = critload(&["critical-load", "--dim", "3", "--material", s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("binding=main"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = write(dir.path(), "bad.toml", "dim = 2\nq = \n");
    let unknown =
        write(dir.path(), "unk.toml", "dim = 2\nq = 1.5\nfoo = 1\n[h]\nfamily = \"quad_log\"\nparams = { a = 1.0, b = 2.0 }\n");
    for m in [&malformed, &unknown] {
        let o = critload(&["critical-load", "--dim", "2", "--material", s(m)]);
        assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let missing = critload(&["critical-load", "--dim", "2", "--material", "/nonexistent.toml"]);
    assert_eq!(missing.status.code(), Some(2));
    let dim = critload(&["critical-load", "--dim", "3", "--material", s(&data("materials/reference_2d.toml"))]);
    assert_eq!(dim.status.code(), Some(2));
    assert_eq!(critload(&["verify", "--lemma", "zhang", "--q", "2.5"]).status.code(), Some(2));
    assert_eq!(critload(&["kappa", "--q-grid", "1.5,2.5,0.1"]).status.code(), Some(2));
    assert_eq!(critload(&["kappa", "--q-grid", "2.1,2.2"]).status.code(), Some(2));
}

#[test]
fn hypothesis_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "weak.toml",
        "dim = 2\nq = 1.5\n[h]\nfamily = \"power_log\"\nparams = { a = 1.0, p = 1.0, b = 1.0, r = 0.001 }\n",
    );
    let o = critload(&["critical-load", "--dim", "2", "--material", s(&m)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_outcomes() {
    let ok = critload(&["verify", "--lemma", "zhang", "--q", "1.8", "--samples", "2000"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("\nzhang,1.8,,2000,"));

    let above = critload(&["verify", "--lemma", "lesperanza", "--q", "1.5", "--lambda", "1.3"]);
    assert_eq!(above.status.code(), Some(0));
    let row = stdout(&above).lines().last().unwrap().to_string();
    assert!(row.contains(",false,true,"), "{row}");

    let excess = critload(&["verify", "--lemma", "excess", "--samples", "500"]);
    assert_eq!(excess.status.code(), Some(0));
}

#[test]
fn kappa_table_passes_the_affine_claim() {
    let o = critload(&["kappa", "--q-grid", "2.05,2.95,0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\nq,lower,numeric,upper,affine,abs_gap\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("2.")).count(), 4);
}

#[test]
fn cavitation_and_bad_bracket() {
    let m = data("materials/power_log_2d.toml");
    let o = critload(&["cavitation", "--material", s(&m), "--dim", "2", "--points", "3", "--a-points", "24"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("lambda_cav_ge_lambda_star=true"));
    let bad = critload(&["cavitation", "--material", s(&m), "--dim", "2", "--bracket", "8,9"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn field_check_corpus_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fields.csv");
    let o = critload(&[
        "field-check",
        "--material",
        s(&data("materials/power_log_2d.toml")),
        "--lambda-factor",
        "0.9",
        "-o",
        s(&out),
        s(&data("fields/bump_03.toml")),
        s(&data("fields/trig_04.toml")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 2);
}

#[test]
fn truncated_field_is_flagged_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "cut.toml",
        "lambda = 1.05\nresolution = 16\n[perturbation]\nfamily = \"trig\"\namp = 0.05\nfreq = 1.5\n",
    );
    let o = critload(&["field-check", "--material", s(&data("materials/power_log_2d.toml")), s(&f)]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().last().unwrap().to_string();
    assert!(row.contains(",1.5,16,1.05,false,"), "{row}");
}

#[test]
fn conjecture_is_seeded() {
    let a = critload(&["--seed", "7", "conjecture", "--trials", "5"]);
    let b = critload(&["--seed", "7", "--workers", "3", "conjecture", "--trials", "5"]);
    let c = critload(&["--seed", "8", "conjecture", "--trials", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}
