use std::f64::consts::{FRAC_PI_2, TAU};

use helicoid_core::export::{
    write_mesh_scalars_csv, write_nullcline_csv, write_obj, write_orbit_csv, write_profile_csv,
};
use helicoid_core::geometry::{build_mesh, build_profile};
use helicoid_core::orbit::{integrate, IntegrateOptions};
use helicoid_core::phase::trace_nullcline;
use helicoid_core::verify::{run_suites, SuiteConfig};
use helicoid_core::{parse_h, CurveState, Orientation, PhaseModel};

fn nodoid() -> (PhaseModel, helicoid_core::Orbit) {
    let m = PhaseModel::new(parse_h("t^2+1").unwrap(), 1.0, Orientation::Plus).unwrap();
    let o = integrate(
        &m,
        CurveState {
            s: 0.0,
            x: 1.5,
            z: 0.0,
            phi: FRAC_PI_2,
        },
        8.0,
        &IntegrateOptions::default(),
    )
    .unwrap();
    (m, o)
}

fn text(f: impl FnOnce(&mut Vec<u8>)) -> String {
    let mut buf = Vec::new();
    f(&mut buf);
    String::from_utf8(buf).unwrap()
}

#[test]
fn orbit_csv_round_trips_floats() {
    let (_, o) = nodoid();
    let out = text(|b| write_orbit_csv(&o, b).unwrap());
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "s,x,y,z,phi,nu,kappa,H_residual");
    let rows: Vec<&str> = lines.clone().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), o.samples.len());
    for (row, st) in rows.iter().zip(&o.samples) {
        let v: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(v[0].to_bits(), st.s.to_bits());
        assert_eq!(v[1].to_bits(), st.x.to_bits());
        assert_eq!(v[4].to_bits(), st.phi.to_bits());
    }
    let events = out.lines().filter(|l| l.starts_with("# event,EpsilonSwitch")).count();
    assert!(events >= 4);
}

#[test]
fn exports_are_deterministic() {
    let a = {
        let (_, o) = nodoid();
        text(|b| write_orbit_csv(&o, b).unwrap())
    };
    let b = {
        let (_, o) = nodoid();
        text(|b| write_orbit_csv(&o, b).unwrap())
    };
    assert_eq!(a, b);
}

#[test]
fn mesh_obj_and_scalars() {
    let (m, o) = nodoid();
    let p = build_profile(&o).unwrap();
    let mesh = build_mesh(&p, &m.h, (0.0, TAU), 12, 40).unwrap();
    let obj = text(|b| write_obj(&mesh, b).unwrap());
    let count = |tag: &str| obj.lines().filter(|l| l.starts_with(tag)).count();
    assert_eq!(count("v "), mesh.rows * 12);
    assert_eq!(count("vn "), mesh.rows * 12);
    assert_eq!(count("f "), (mesh.rows - 1) * 11 * 2);
    let sidecar = text(|b| write_mesh_scalars_csv(&mesh, b).unwrap());
    assert_eq!(sidecar.lines().next().unwrap(), "vertex,nu,H,residual");
    assert_eq!(sidecar.lines().count(), mesh.vertices.len() + 1);
    let profile = text(|b| write_profile_csv(&p, b).unwrap());
    assert_eq!(profile.lines().next().unwrap(), "s,x,z,phi");
}

#[test]
fn nullcline_csv_columns() {
    let m = PhaseModel::new(parse_h("(t-0.6)^2").unwrap(), 1.0, Orientation::Plus).unwrap();
    let c = trace_nullcline(&m, 4.0, 200).unwrap();
    let out = text(|b| write_nullcline_csv(&c, &m, b).unwrap());
    assert_eq!(out.lines().next().unwrap(), "component_id,x,y,F_residual,regular_flag");
    let ids: std::collections::BTreeSet<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids.len(), 3);
}

#[test]
fn suites_pass_on_the_worked_examples() {
    for h in ["1", "t^2+1", "t^2", "t", "(t-0.6)^2", "(t-0.5)*(t+2)", "cos(40*t)+2"] {
        let r = run_suites(&parse_h(h).unwrap(), 1.0, &SuiteConfig::default());
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).map(|c| &c.name).collect();
        assert!(failed.is_empty(), "{h}: {failed:?}");
    }
}

#[test]
fn oscillating_prescription_warns_but_runs() {
    let r = run_suites(&parse_h("cos(40*t)+2").unwrap(), 1.0, &SuiteConfig::default());
    assert_eq!(r.warnings.len(), 1);
    assert!(r.warnings[0].contains("not increasing"));
    assert!(r.checks.iter().any(|c| c.suite == "orbit"));
}
