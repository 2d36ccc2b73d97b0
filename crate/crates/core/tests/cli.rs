use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_annulus-radial");

const GEOMETRY: &str = r#"
[domain]
n = 3
R0 = 1.0
R1 = 2.718281828459045

[windows]
a1 = 0.25
b1 = 0.75
a2 = 0.5
b2 = 1.0
"#;

const LEVELS: &str = r#"
[thresholds]
rho1 = 0.1
rho2 = 0.1
s1 = 10.0
s2 = 10.0
"#;

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn config_with_f(f1: &str, f2: &str) -> String {
    format!("{GEOMETRY}{LEVELS}\n[f]\nf1 = \"{f1}\"\nf2 = \"{f2}\"\n")
}

fn example_config() -> String {
    config_with_f(
        "exp(-r^2)/6 * (2 - sin(gu^2 + gv^2)) * u^5",
        "2/pi * exp(-r^2) * atan(1 + gu^2 + gv^2) * v^5",
    )
}

#[test]
fn constants_for_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", &format!("{GEOMETRY}{LEVELS}"));
    let out = run(&["constants", "--config", cfg.to_str().unwrap(), "--machine"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for line in [
        "constants.M1=16",
        "constants.M2=4",
        "constants.c1=0.25",
        "constants.c2=0.5",
        "constants.m1=8",
        "constants.sup_p=21.8161323",
        "constants.threshold_inf_f1=201.236305",
    ] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }
}

#[test]
fn constants_in_the_plane_omit_a_and_b() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", &GEOMETRY.replace("n = 3", "n = 2"));
    let out = run(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(!text.lines().any(|l| l.trim_start().starts_with("A ")));
    assert!(text.contains("not defined for n = 2"));
}

#[test]
fn degenerate_window_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.toml",
        &GEOMETRY.replace("b1 = 0.75", "b1 = 0.25"),
    );
    let out = run(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate window"));
}

#[test]
fn syntax_errors_point_at_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.toml",
        &GEOMETRY.replace("a2 = 0.5", "a2 = 0.5.1"),
    );
    let out = run(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 10"));
}

#[test]
fn example_existence_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", &example_config());
    let out = run(&["check", "existence", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("existence.verdict=SATISFIED"));
    assert_eq!(text.matches(".margin=").count(), 4);
    assert!(text.contains("existence.f1.inf_a_s.extremum=448.355825"));
}

#[test]
fn constant_forcing_nonexistence_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", &config_with_f("1", "1"));
    let out = run(&[
        "check",
        "nonexistence",
        "--config",
        cfg.to_str().unwrap(),
        "--machine",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("nonexistence.verdict=INCONCLUSIVE"));
}

#[test]
fn multiplicity_without_theta_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", &example_config());
    let out = run(&["check", "multiplicity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn quiet_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", &example_config());
    let out = run(&[
        "check",
        "existence",
        "--quiet",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut rows = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    rows.map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn unit_forcing_solve_writes_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let body =
        config_with_f("(e/(e-1))^2 / r^4", "(e/(e-1))^2 / r^4") + "\n[numerics]\ndamping = 1.0\n";
    let cfg = write_config(dir.path(), "p.toml", &body);
    let csv = dir.path().join("out.csv");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# N=512\n"));
    assert!(text.contains("# converged=true"));
    let u_max = csv_column(&text, "u")
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((u_max - 0.125).abs() <= 1e-6);
    let v = csv_column(&text, "v");
    assert!((v[v.len() - 1] - 0.5).abs() <= 1e-8);
}

#[test]
fn zero_forcing_solve_gives_zero_columns() {
    let dir = tempfile::tempdir().unwrap();
    let body = config_with_f("0", "0") + "\n[numerics]\ngrid = 64\n";
    let cfg = write_config(dir.path(), "p.toml", &body);
    let csv = dir.path().join("out.csv");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    for col in ["u", "v", "du_dt", "dv_dt"] {
        assert!(
            csv_column(&text, col).iter().all(|&x| x.abs() < 1e-9),
            "column {col}"
        );
    }
}

#[test]
fn example_solve_populates_residuals_and_resumes_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", &example_config());
    let csv = dir.path().join("out.csv");
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--grid",
        "128",
    ]);
    assert!(matches!(code(&out), 0 | 1));
    let text = fs::read_to_string(&csv).unwrap();
    for key in [
        "fixed_point_residual",
        "ode_residual_u",
        "pde_residual_v",
        "localization",
    ] {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("# {key}="))),
            "{key}"
        );
    }

    let resume = example_config()
        + &format!(
            "\n[numerics]\ngrid = 128\ninitial = \"csv\"\ninitial_csv = {:?}\n",
            csv.to_str().unwrap()
        );
    let cfg2 = write_config(dir.path(), "resume.toml", &resume);
    let out = run(&[
        "solve",
        "--config",
        cfg2.to_str().unwrap(),
        "--machine",
        "--out",
        dir.path().join("o2.csv").to_str().unwrap(),
    ]);
    assert!(matches!(code(&out), 0 | 1));
    assert!(stdout(&out).contains("solve.iterations="));
}

#[test]
fn reproduce_example_exits_zero() {
    let out = run(&["reproduce-example"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for printed in [
        "0.0366701",
        "0.00916753",
        "201.236",
        "21.9044",
        "448.356",
        "30.8989",
    ] {
        assert!(text.contains(printed), "{printed}");
    }
}

#[test]
fn exit_codes_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", &example_config());
    let first = run(&[
        "check",
        "existence",
        "--config",
        cfg.to_str().unwrap(),
        "--machine",
    ]);
    let second = run(&[
        "check",
        "existence",
        "--config",
        cfg.to_str().unwrap(),
        "--machine",
    ]);
    assert_eq!(code(&first), code(&second));
    assert_eq!(first.stdout, second.stdout);
}
