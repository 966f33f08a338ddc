use std::f64::consts::{PI, SQRT_2};
use std::process::{Command, Output};

fn sol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sol")).args(args).output().expect("run sol")
}

fn ok(args: &[&str]) -> String {
    let out = sol(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn nums(s: &str) -> Vec<f64> {
    s.split_whitespace().map(|t| t.parse().unwrap()).collect()
}

fn field<'a>(s: &'a str, key: &str) -> &'a str {
    s.lines().find_map(|l| l.strip_prefix(key)).unwrap().trim()
}

const PI_S: &str = "3.141592653589793";

#[test]
fn exp_examples() {
    assert_eq!(ok(&["exp", "0", "0", "2"]).trim(), "0 0 2");
    let p = nums(&ok(&["exp", "1", "0", "0"]));
    assert!((p[0] - 0.7615942).abs() < 1e-7 && p[1] == 0.0 && (p[2] + 0.4337809).abs() < 1e-7);
    let p = nums(&ok(&["exp", "3.14159265", "3.14159265", "0"]));
    assert!(p[2].abs() < 1e-7);
    let p = nums(&ok(&["exp", "-1", "0", "0"]));
    assert!((p[0] + 0.7615942).abs() < 1e-7);
}

#[test]
fn exp_trace_is_a_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    ok(&["exp", "0.5", "1", "-0.3", "--trace", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y,z,ux,uy,uz"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    assert!(rows.len() > 10 && rows.iter().all(|r| r.len() == 7));
    let last = rows.last().unwrap();
    assert!((last[0] - (0.25f64 + 1.0 + 0.09).sqrt()).abs() < 1e-8);
    for r in &rows {
        assert!((r[4] * r[4] + r[5] * r[5] + r[6] * r[6] - 1.0).abs() < 1e-7);
    }
}

#[test]
fn classify_examples() {
    let s = ok(&["classify", "2", "2", "0"]);
    assert_eq!(field(&s, "class "), "Small");
    assert_eq!(field(&s, "mu "), "2");
    let s = ok(&["classify", PI_S, PI_S, "0"]);
    assert_eq!(field(&s, "class "), "Perfect");
    let s = ok(&["--tol-perfect", "1e-8", "classify", "3.14159265", "3.14159265", "0"]);
    assert_eq!(field(&s, "class "), "Perfect");
    let s = ok(&["classify", "1", "0", "99"]);
    assert_eq!((field(&s, "class "), field(&s, "mu "), field(&s, "cut_time ")), ("Small", "0", "inf"));
    assert_eq!(field(&ok(&["classify", "4", "4", "0.5"]), "class "), "Large");
}

#[test]
fn random_classification_is_seeded() {
    let a = ok(&["classify", "--random", "20", "--seed", "11"]);
    assert_eq!(a, ok(&["classify", "--random", "20", "--seed", "11"]));
    assert_ne!(a, ok(&["classify", "--random", "20", "--seed", "12"]));
    assert_eq!(a.lines().count(), 21);
}

#[test]
fn distance_and_log() {
    assert_eq!(ok(&["distance", "0", "0", "0", "0", "0", "5"]).trim(), "5");
    let d = nums(&ok(&["distance", "0", "0", "0", PI_S, PI_S, "0"]))[0];
    assert!((d - PI * SQRT_2).abs() < 1e-6);
    let p = ok(&["--full", "exp", "1.2", "-0.4", "0.9"]);
    let mut args = vec!["log"];
    args.extend(p.split_whitespace());
    let v = nums(&ok(&args));
    assert!((v[0] - 1.2).abs() < 1e-6 && (v[1] + 0.4).abs() < 1e-6 && (v[2] - 0.9).abs() < 1e-6);
    let two = ok(&["log", PI_S, PI_S, "0"]);
    assert_eq!(two.lines().count(), 1);
}

#[test]
fn cutlocus_rows() {
    let s = ok(&["cutlocus", "--thetas", "31"]);
    let rows: Vec<Vec<f64>> = s.lines().skip(1).map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 31);
    let mid = &rows[15];
    assert!((mid[0] - PI / 4.0).abs() < 1e-8);
    assert!((mid[1] - PI * SQRT_2).abs() < 1e-7 && (mid[2] - PI * SQRT_2).abs() < 1e-7);
    for r in &rows {
        assert!(r[2] * (2.0 * r[0]).sin().sqrt() >= PI * SQRT_2 * (1.0 - 1e-8));
    }
    let xy: Vec<f64> = rows.iter().map(|r| r[3] * r[4]).collect();
    assert!(xy[..16].windows(2).all(|w| w[1] <= w[0] + 1e-9));
    assert!(xy[15..].windows(2).all(|w| w[1] >= w[0] - 1e-9));
    let neg = ok(&["cutlocus", "--thetas", "3", "--sector", "np"]);
    assert!(neg.lines().skip(1).all(|l| l.split(',').nth(3).unwrap().starts_with('-')));
}

#[test]
fn wavefront_rows() {
    let s = ok(&["wavefront", "6", "50"]);
    let tri = nums(&s.lines().next().unwrap().trim_start_matches("# triangle").replace(';', " "));
    let (a, b) = (tri[4], tri[5]);
    assert!(a > b && b > 0.0);
    let rows: Vec<&str> = s.lines().skip(2).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    let first: Vec<f64> = rows[0].split(',').take(3).map(|t| t.parse().unwrap()).collect();
    assert!((first[2] / first[1] - b / a).abs() < 1e-2 * (b / a));
}

#[test]
fn sphere_files() {
    let dir = tempfile::tempdir().unwrap();
    for (l, arcs) in [("1", "arcs 0"), ("5", "arcs 4")] {
        let path = dir.path().join(format!("s{l}.obj"));
        let out = sol(&["sphere", l, "16", "--check", "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
        let report = String::from_utf8(out.stderr).unwrap();
        assert!(report.contains("euler 2") && report.contains(arcs), "{report}");
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().any(|l| l.starts_with("f ")));
    }
    let ply = ok(&["sphere", "5", "8", "--format", "ply"]);
    assert!(ply.starts_with("ply\n"));
    let csv = ok(&["sphere", "5", "8", "--format", "csv"]);
    assert!(csv.starts_with("x,y,z,tag\n"));
}

#[test]
fn period_and_holonomy() {
    let s = ok(&["period", "0.7071067"]);
    assert!((nums(field(&s, "L "))[0] - PI * SQRT_2).abs() < 1e-4);
    let s = ok(&["period", "--from-L", "5"]);
    assert!((nums(field(&s, "a "))[0] - 0.601028431).abs() < 1e-8);
    assert_eq!(ok(&["holonomy", "4.442882938158366"]).trim(), "3.14159265");
    let h = nums(&ok(&["holonomy", "40", "--full"]))[0];
    assert!((h * (-10.0f64).exp() - 1.0).abs() < 1e-6);
}

#[test]
fn digits_and_determinism() {
    let short = ok(&["exp", "1", "0", "0"]);
    let full = ok(&["--full", "exp", "1", "0", "0"]);
    assert!(full.split_whitespace().next().unwrap().len() > short.split_whitespace().next().unwrap().len());
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.ply"), dir.path().join("b.ply"));
    ok(&["sphere", "5", "12", "--format", "ply", "--out", a.to_str().unwrap()]);
    ok(&["sphere", "5", "12", "--format", "ply", "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "full = true\nformat = csv\n").unwrap();
    let c = cfg.to_str().unwrap();
    let full = ok(&["--config", c, "exp", "1", "0", "0"]);
    assert_eq!(full, ok(&["--full", "exp", "1", "0", "0"]));
    assert!(ok(&["--config", c, "sphere", "5", "8"]).starts_with("x,y,z,tag"));
    assert!(!ok(&["--config", c, "sphere", "5", "8", "--format", "obj"]).starts_with("x,y,z"));
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(sol(&["--config", c, "exp", "1", "0", "0"]).status.code(), Some(2));
}

#[test]
fn bad_input_exits_with_two() {
    for args in [
        vec!["exp", "1", "2"],
        vec!["exp", "1", "2", "nan"],
        vec!["period", "0.9"],
        vec!["wavefront", "4", "10"],
        vec!["holonomy", "1"],
        vec!["cutlocus", "--sector", "xy"],
        vec!["sphere", "0", "16"],
        vec!["--dt", "-1", "exp", "1", "0", "0"],
        vec!["distance", "0", "0", "0", "1"],
    ] {
        assert_eq!(sol(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn vertical_geodesics_are_exact() {
    assert_eq!(ok(&["exp", "0", "0", "800"]).trim(), "0 0 800");
    assert_eq!(ok(&["exp", "0", "0", "-3"]).trim(), "0 0 -3");
}
