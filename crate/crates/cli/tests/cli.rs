use std::path::Path;
use std::process::{Command, Output};

use infbern::field_io::{mask_to_string, read_field, read_mask};
use infbern::{CompactMask, DomainSpec, Grid, Point, Primitive, ReportSet};

fn infbern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infbern")).args(args).env("NO_COLOR", "1").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(dir: &Path) -> ReportSet {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ball of radius 1 on a grid of spacing 1/16.
fn ball_spec(dir: &Path) -> std::path::PathBuf {
    let spec = DomainSpec::from_primitives(&[Primitive::disk(0.0, 0.0, 1.0)], 1.0 / 16.0, 3);
    let path = dir.join("ball.json");
    std::fs::write(&path, spec.to_json()).unwrap();
    path
}

fn ball_grid(dir: &Path) -> Grid {
    let spec = DomainSpec::parse(&std::fs::read_to_string(ball_spec(dir)).unwrap()).unwrap();
    spec.build().unwrap().1
}

#[test]
fn radial_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = infbern(&["radial", "--n", "2", "--p", "3", "--R", "1", "--lambda", "3", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for line in ["alpha = 0.5", "lambda_p = 2", "rho' = 0.044658", "rho'' = 0.622008"] {
        assert!(text.lines().any(|l| l == line), "{line} missing from\n{text}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("radial.json")).unwrap()).unwrap();
    assert_eq!(json["solution"]["R"], 1.0);
    assert!(report(dir.path()).all_pass());
}

#[test]
fn below_critical_prints_certificate_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ball_spec(dir.path());
    let out = dir.path().join("out");
    let o = infbern(&["bernoulli-solve", "--spec", s(&spec), "--lambda", "0.5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("below 1/inradius"));
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["critical"], 1.0);
    assert_eq!(cert["report"]["pass"], true);
    // the measured critical value itself is refused too
    assert_eq!(infbern(&["bernoulli-solve", "--spec", s(&spec), "--lambda", "1"]).status.code(), Some(1));
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(infbern(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(infbern(&[]).status.code(), Some(1));
    assert_eq!(infbern(&["scenario", "torus"]).status.code(), Some(1));
    assert_eq!(infbern(&["radial", "--p", "2", "--lambda", "3"]).status.code(), Some(1));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"primitives\": [").unwrap();
    let o = infbern(&["distance", "--spec", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spec parse"));
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = infbern(&["constants", "--out", s(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(infbern(&["distance"]).status.code(), Some(1));
    assert_eq!(infbern(&["--help"]).status.code(), Some(0));
}

#[test]
fn distance_writes_readable_fields() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ball_spec(dir.path());
    let o = infbern(&["distance", "--spec", s(&spec), "--r", "0.5", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let d = read_field(&dir.path().join("distance.field")).unwrap();
    assert_eq!(d.grid, ball_grid(dir.path()));
    let centre = d.grid.nearest(Point::default()).unwrap();
    assert!((d.values[centre] - 1.0).abs() < 1e-12);
    let closed = read_mask(&dir.path().join("parallel_closed.field")).unwrap();
    assert!(closed.indices().all(|i| d.values[i] >= 0.5 - 2.0 / 16.0));
    assert!(stdout(&o).contains("inradius 1.000000"));
}

#[test]
fn h2_failure_is_a_verification_failure() {
    let o = infbern(&["distance", "--domain", "lopsided", "--h", "0.1", "--r", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL closure of open parallel set"));
}

#[test]
fn solve_verify_and_energies() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ball_spec(dir.path());
    let out = dir.path().join("solve");
    let o = infbern(&["bernoulli-solve", "--spec", s(&spec), "--lambda", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rs = report(&out);
    assert!(rs.all_pass());
    assert!(rs.reports.iter().any(|r| r.property == "lower sandwich bound"));
    let u = out.join("u_w.field");
    let o = infbern(&["bernoulli-verify", "--spec", s(&spec), "--lambda", "3", "--u", s(&u)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // the same field is far too steep for a smaller lambda
    let o = infbern(&["bernoulli-verify", "--spec", s(&spec), "--lambda", "1.5", "--u", s(&u)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL gradient bound"));
    let jdir = dir.path().join("j");
    let o = infbern(&["jfunc", "--u", s(&u), "--lambda", "3", "--p", "2,5,50", "--out", s(&jdir)]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(jdir.join("jfunc.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    // on a different grid the field is rejected
    let o = infbern(&["bernoulli-verify", "--spec", s(&spec), "--h", "0.1", "--lambda", "3", "--u", s(&u)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ball_spec(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = infbern(&["bernoulli-solve", "--spec", s(&spec), "--lambda", "2", "--seed", "9", "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0));
        (std::fs::read(out.join("report.json")).unwrap(), std::fs::read(out.join("u_w.field")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn trivial_and_characterize_masks() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ball_spec(dir.path());
    let grid = ball_grid(dir.path());
    let write = |name: &str, m: &CompactMask| {
        let p = dir.path().join(name);
        std::fs::write(&p, mask_to_string(m)).unwrap();
        p
    };
    let centre = write("centre.field", &CompactMask::from_fn(grid, |i| grid.point(i).norm() < 1e-12));
    let o = infbern(&["trivial", "--spec", s(&spec), "--lambda", "1", "--k", s(&centre)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("Trivial solution"));
    // a zero set with interior is not a trivial zero set
    let blob = write("blob.field", &CompactMask::from_fn(grid, |i| grid.point(i).norm() <= 0.3));
    assert_eq!(infbern(&["trivial", "--spec", s(&spec), "--lambda", "1", "--k", s(&blob)]).status.code(), Some(1));
    // at lambda 3 the blob sits inside {d >= 1/3} but does not fill it
    let o = infbern(&["characterize", "--spec", s(&spec), "--lambda", "3", "--k", s(&blob)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL interior components match parallel components"));
    let core = write("core.field", &CompactMask::from_fn(grid, |i| grid.point(i).norm() <= 2.0 / 3.0 + 1e-9));
    let out = dir.path().join("ch");
    let o = infbern(&["characterize", "--spec", s(&spec), "--lambda", "3", "--k", s(&core), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(out.join("membership.json").exists() && out.join("u_w.field").exists());
    let wrong_grid = write("coarse.field", &CompactMask::empty(Grid::new(Point::default(), 0.5, 3, 3).unwrap()));
    assert_eq!(infbern(&["trivial", "--spec", s(&spec), "--lambda", "1", "--k", s(&wrong_grid)]).status.code(), Some(1));
}

#[test]
fn potential_with_harnack_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = infbern(&[
        "potential", "--domain", "ball", "--h", "0.0625", "--level", "0.5", "--harnack", "0.75,0;1,0", "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rs = report(dir.path());
    let harnack = rs.reports.iter().find(|r| r.property == "Harnack lower bound").unwrap();
    assert!(harnack.notes[0].contains("exp(-L/delta) = 0.367879"));
    let u = read_field(&dir.path().join("potential.field")).unwrap();
    let i = u.grid.nearest(Point::new(0.75, 0.0)).unwrap();
    assert!((u.values[i] - 0.5).abs() < 5.0 * 0.0625);
}

#[test]
fn tables_have_fixed_headers() {
    let dir = tempfile::tempdir().unwrap();
    let o = infbern(&["sweep-p", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let sweep = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("p,rho_hyper,rho_ell,sup_diff\n5,"));
    assert_eq!(sweep.lines().count(), 6);
    let o = infbern(&["constants", "--p", "3,200", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let c = std::fs::read_to_string(dir.path().join("constants.csv")).unwrap();
    assert_eq!(c.lines().nth(1), Some("3,2.0000000000000000e0"));
    // a failing threshold turns into exit 2
    assert_eq!(infbern(&["sweep-p", "--p", "5,10", "--sup-tol", "1e-6"]).status.code(), Some(2));
}

#[test]
fn nonconn_scenario_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let o = infbern(&["scenario", "nonconn", "--lambda", "1", "--h", "0.1", "--out", s(dir.path())]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(!text.contains('\x1b'));
    for f in ["u_w.field", "u_w_minus.field", "u_w_plus.field"] {
        read_field(&dir.path().join(f)).unwrap();
    }
    let rs = report(dir.path());
    assert!(rs.all_pass());
    assert!(rs.reports.iter().any(|r| r.property == "one-sided solutions are distinct"));
}
