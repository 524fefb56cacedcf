use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use helicoid_cli::commands::verify_checks;
use helicoid_cli::{load, Outcome, Overrides};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_helicoid"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn cfg(name: &str) -> String {
    configs().join(format!("{name}.toml")).display().to_string()
}

#[test]
fn zero_pitch_is_a_validation_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--h", "t^2+1", "--c0", "0"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("c0: must be finite and non-zero"), "{}", stderr(&o));
}

#[test]
fn validation_errors_name_the_field() {
    let d = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 6] = [
        (
            &["orbit", "--h", "t^", "--c0", "1", "--from-axis"],
            "h: syntax error at offset 2",
        ),
        (
            &["orbit", "--h", "sqrt(t)", "--c0", "1", "--from-axis"],
            "h: h is not C1",
        ),
        (
            &["orbit", "--h", "1", "--c0", "1", "--eps", "2", "--from-axis"],
            "eps: must be 1 or -1",
        ),
        (
            &["phase-portrait", "--h", "1", "--c0", "1", "--grid", "10"],
            "window.grid: must be at least 64",
        ),
        (&["orbit", "--h", "1", "--c0", "1", "--start", "1.2,1"], "start.point"),
        (&["orbit", "--h", "1", "--c0", "1"], "start: give start.point"),
    ];
    for (args, want) in cases {
        let o = run(args, d.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains(want), "{args:?}: {}", stderr(&o));
    }
    let file = d.path().join("bad.toml");
    fs::write(&file, "h = \"1\"\nc0 = 1.0\n[integration]\ntol = \"tight\"\n").unwrap();
    let o = run(&["verify", "--config", file.to_str().unwrap()], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("integration.tol"), "{}", stderr(&o));
    fs::write(&file, "h = \"1\"\nc0 = 1.0\n[window]\ngrid = 32\n").unwrap();
    let o = run(&["verify", "--config", file.to_str().unwrap()], d.path());
    assert!(stderr(&o).contains("window.grid: must be at least 64"));
}

#[test]
fn flags_override_the_file() {
    let o = Overrides {
        h: Some("1".into()),
        c0: Some(-2.0),
        start: Some("0.5,0".into()),
        ..Overrides::default()
    };
    let c = load(Some(&configs().join("t2p1-axis-periodic.toml")), &o).unwrap();
    assert_eq!(c.h_text, "1");
    assert_eq!(c.c0, -2.0);
    assert!(matches!(c.start, Some(helicoid_cli::Start::Point(p)) if p.x == 0.5));
    // untouched fields keep the file value
    assert_eq!(c.s_max, 10.0);
    assert!(c.through_axis);

    let d = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "classify",
            "--config",
            &cfg("t2p1-unduloid"),
            "--h",
            "1",
            "--start",
            "0.5,0",
        ],
        d.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("\"tag\": \"Equilibrium\""), "{}", stdout(&out));
}

#[test]
fn numeric_failure_exit_code() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "orbit",
            "--h",
            "(t-0.5)*(t+2)",
            "--c0",
            "1",
            "--eps",
            "1",
            "--from-axis",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no axis orbit"));
    let o = run(
        &["classify", "--h", "t^2", "--c0", "1", "--start", "1,0", "--smax", "5"],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("inconclusive"), "{}", stderr(&o));
}

#[test]
fn invariant_failure_exit_code() {
    let bad = Outcome {
        summary: String::new(),
        pass: false,
    };
    assert_eq!(bad.exit_code(), 3);
}

#[test]
fn orbit_examples() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        &["orbit", "--h", "t^2+1", "--c0", "1", "--from-axis", "--smax", "10"],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("surface: AxisPeriodic (period 4.354"),
        "{}",
        stdout(&o)
    );
    let csv = fs::read_to_string(d.path().join("orbit.csv")).unwrap();
    assert!(csv.starts_with("s,x,y,z,phi,nu,kappa,H_residual\n"));
    assert!(csv.contains("# event,YZeroCrossing,"));
    assert!(d.path().join("orbit.svg").exists());

    let o = run(&["orbit", "--config", &cfg("square-asymptote")], d.path());
    assert!(
        stdout(&o).contains("classification: AsymptoteToYZeroAxis"),
        "{}",
        stdout(&o)
    );

    let o = run(
        &[
            "orbit",
            "--h",
            "(t-0.5)*(t+2)",
            "--c0",
            "1",
            "--eps",
            "-1",
            "--from-axis",
            "--smax",
            "1000",
            "--max-step",
            "2",
        ],
        d.path(),
    );
    let s = stdout(&o);
    assert!(s.contains("eps = -1") && s.contains("events EpsilonSwitch: 1"), "{s}");
    assert!(s.contains("surface: LineAsymptotic (t0 0.5)"), "{s}");
}

#[test]
fn portrait_examples() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["phase-portrait", "--h", "t^2+1", "--c0", "1", "--eps", "1"], d.path());
    let s = stdout(&o);
    assert_eq!(o.status.code(), Some(0));
    assert!(s.contains("nullcline components: 1"));
    assert!(s.contains("e0: (0.5, 0)"));
    assert!(s.contains("p: (0, 0.7071067811865475)"));
    let svg = fs::read_to_string(d.path().join("portrait.svg")).unwrap();
    for layer in ["field", "nullcline", "markers", "orbits"] {
        assert!(svg.contains(&format!("<g id=\"{layer}\"")), "{layer}");
    }
    assert!(!svg.contains("id=\"beta0\""));
    for f in ["field", "nullcline", "beta0", "markers", "orbits"] {
        assert!(d.path().join(format!("portrait_{f}.csv")).exists());
    }

    let o = run(
        &["phase-portrait", "--h", "(t-0.6)^2", "--c0", "1", "--eps", "1"],
        d.path(),
    );
    let s = stdout(&o);
    assert!(
        s.contains("nullcline components: 3") && s.contains("p0(0.6): (0.7499999999999999, 1)"),
        "{s}"
    );
    let beta = fs::read_to_string(d.path().join("portrait_beta0.csv")).unwrap();
    assert!(beta.lines().count() > 100);

    let o = run(
        &["phase-portrait", "--h", "t^2+1", "--c0", "1", "--eps", "-1"],
        d.path(),
    );
    assert!(stdout(&o).contains("nullcline: empty in the window"));
    let svg = fs::read_to_string(d.path().join("portrait.svg")).unwrap();
    assert!(!svg.contains("id=\"nullcline\""));
    let nc = fs::read_to_string(d.path().join("portrait_nullcline.csv")).unwrap();
    assert_eq!(nc.lines().count(), 1);
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("surface_report.json")).unwrap()).unwrap()
}

#[test]
fn surface_examples() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["surface", "--config", &cfg("cylinder")], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(d.path());
    assert!(r["max_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["surface"]["label"]["label"], "Cylinder");
    let obj = fs::read_to_string(d.path().join("surface.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 60 * 32);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 2 * 59 * 31);

    let o = run(&["surface", "--config", &cfg("t2p1-unduloid")], d.path());
    assert!(stdout(&o).contains("surface: UnduloidFamily"));
    assert_eq!(report(d.path())["self_intersecting"], false);

    let o = run(
        &["surface", "--config", &cfg("t2p1-nodoid"), "--n-theta", "16"],
        d.path(),
    );
    assert!(stdout(&o).contains("surface: NodoidFamily"));
    let r = report(d.path());
    assert_eq!(r["n_theta"], 16);
    assert!(r["glue"]["max_mismatch"].as_f64().unwrap() < 1e-8);
    assert!(!r["glue"]["switches"].as_array().unwrap().is_empty());

    let o = run(&["surface", "--config", &cfg("t2p1-axis-periodic")], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let prof = fs::read_to_string(d.path().join("surface_profile.csv")).unwrap();
    assert!(prof
        .lines()
        .skip(1)
        .any(|l| l.split(',').nth(1).unwrap().starts_with('-')));
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        run(&["phase-portrait", "--config", &cfg("t2p1-portrait")], d.path());
        run(&["orbit", "--config", &cfg("t2p1-nodoid")], d.path());
    }
    for f in [
        "portrait_field.csv",
        "portrait_nullcline.csv",
        "portrait_orbits.csv",
        "portrait.svg",
        "orbit.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn verify_passes_on_every_shipped_config() {
    let mut names = Vec::new();
    for e in fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        let c = load(Some(&p), &Overrides::default()).unwrap();
        assert!(c.description.is_some() && c.reproduces.is_some(), "{}", p.display());
        let (checks, _) = verify_checks(&c).unwrap();
        for k in &checks {
            assert!(k.pass, "{}: {} {}", p.display(), k.name, k.measured);
        }
        names.push(c.name);
    }
    assert!(names.len() >= 6);
}

#[test]
fn verify_report_and_warnings() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--h", "t^2+1", "--c0", "1"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    for c in v["checks"].as_array().unwrap() {
        for k in ["suite", "name", "measured", "tolerance", "pass"] {
            assert!(c.get(k).is_some());
        }
    }

    let o = run(&["verify", "--h", "cos(40*t)+2", "--c0", "1"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("warning: h is not increasing on [0, 1]"));
    assert!(stdout(&o).contains("PASS [orbit] sample orbit"));
}
