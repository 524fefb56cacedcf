use std::f64::consts::{FRAC_PI_2, PI, TAU};

use helicoid_core::geometry::{
    build_mesh, build_profile, gauss_map, glue_check, immersion, mean_curvature, mean_curvature_fundamental,
    surface_taxonomy, GeometryError, Jet,
};
use helicoid_core::orbit::{
    classify, continue_through_axis, integrate, trace_from_axis, ClassifyOptions, IntegrateOptions,
};
use helicoid_core::verify::{mesh_suite, random_jet_agreement};
use helicoid_core::{parse_h, CurveState, Orbit, Orientation, PhaseModel, SurfaceLabel};

fn model(h: &str, c0: f64, eps: f64) -> PhaseModel {
    PhaseModel::new(parse_h(h).unwrap(), c0, Orientation::from_sign(eps).unwrap()).unwrap()
}

fn orbit_from(m: &PhaseModel, x: f64, phi: f64, span: f64) -> Orbit {
    integrate(
        m,
        CurveState { s: 0.0, x, z: 0.0, phi },
        span,
        &IntegrateOptions::default(),
    )
    .unwrap()
}

#[test]
fn cylinder_profile_and_mesh() {
    let m = model("1", 1.0, 1.0);
    let o = orbit_from(&m, 0.5, FRAC_PI_2, 6.0);
    let p = build_profile(&o).unwrap();
    for s in &p.samples {
        assert_eq!(s.x, 0.5);
        assert!((s.z - s.s).abs() < 1e-12);
    }
    let mesh = build_mesh(&p, &m.h, (0.0, TAU), 16, 50).unwrap();
    assert!(mesh.max_residual() < 1e-10);
    for v in &mesh.vertices {
        assert!((v[0].hypot(v[1]) - 0.5).abs() < 1e-15);
    }
    assert!(!mesh.self_intersecting);
}

#[test]
fn unduloid_profile_is_monotone_and_embedded() {
    let m = model("t^2+1", 1.0, 1.0);
    let o = orbit_from(&m, 0.45, FRAC_PI_2, 20.0);
    let p = build_profile(&o).unwrap();
    assert!(p.z_strictly_monotone() && p.is_embedded());
    let (unit, second) = p.jet_identity_errors();
    assert!(unit < 1e-10 && second < 1e-8);
    let class = classify(&o, &m, &ClassifyOptions::default()).unwrap();
    let t = surface_taxonomy(&o, &p, &class).unwrap();
    assert!(matches!(t.label, SurfaceLabel::UnduloidFamily { .. }));
    assert!(t.warnings.is_empty());
}

#[test]
fn nodoid_profile_self_intersects() {
    let m = model("t^2+1", 1.0, 1.0);
    let o = orbit_from(&m, 1.5, FRAC_PI_2, 20.0);
    let p = build_profile(&o).unwrap();
    assert!(!p.z_strictly_monotone());
    assert!(!p.is_embedded());
    let mesh = build_mesh(&p, &m.h, (0.0, TAU), 24, 200).unwrap();
    assert!(mesh.self_intersecting);
    assert!(!mesh.boundary_helices.is_empty());
    for b in &mesh.boundary_helices {
        assert_eq!(b.c0, 1.0);
        assert!(b.x0 > 0.0);
    }
    let class = classify(&o, &m, &ClassifyOptions::default()).unwrap();
    let t = surface_taxonomy(&o, &p, &class).unwrap();
    assert!(matches!(t.label, SurfaceLabel::NodoidFamily { .. }));
}

#[test]
fn gauss_map_on_the_axis() {
    for c0 in [1.0, -2.0] {
        for xp in [1.0, -1.0] {
            let eta = gauss_map(c0, 0.0, xp, 0.0, 0.0).unwrap();
            let want = [0.0, -c0.signum() * xp, 0.0];
            for k in 0..3 {
                assert!((eta[k] - want[k]).abs() < 1e-15);
            }
        }
    }
    assert!(matches!(
        gauss_map(1.0, 0.0, 0.0, 1.0, 0.0),
        Err(GeometryError::DegenerateJet { .. })
    ));
}

#[test]
fn vertical_tangent_has_zero_angle_function() {
    let eta = gauss_map(1.3, 0.8, 0.0, 1.0, 0.7).unwrap();
    assert_eq!(eta[2], 0.0);
}

#[test]
fn gauss_map_is_normal_to_the_immersion() {
    let (c0, x, z, phi, k, theta) = (0.7, 1.1, 0.3, 0.4, -0.6, 1.9);
    let j = Jet::from_angle(x, phi, k);
    let eta = gauss_map(c0, x, j.xp, j.zp, theta).unwrap();
    let d = 1e-6;
    let ps: Vec<f64> = (0..3)
        .map(|i| {
            let a = immersion(
                c0,
                x + d * j.xp + 0.5 * d * d * j.xpp,
                z + d * j.zp + 0.5 * d * d * j.zpp,
                theta,
            )[i];
            let b = immersion(
                c0,
                x - d * j.xp + 0.5 * d * d * j.xpp,
                z - d * j.zp + 0.5 * d * d * j.zpp,
                theta,
            )[i];
            (a - b) / (2.0 * d)
        })
        .collect();
    let pt: Vec<f64> = (0..3)
        .map(|i| (immersion(c0, x, z, theta + d)[i] - immersion(c0, x, z, theta - d)[i]) / (2.0 * d))
        .collect();
    let dot = |v: &[f64]| v.iter().zip(eta).map(|(a, b)| a * b).sum::<f64>();
    assert!(dot(&ps).abs() < 1e-9 && dot(&pt).abs() < 1e-9);
    let n: f64 = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((n - 1.0).abs() < 1e-15);
}

#[test]
fn cylinder_curvature_both_routes() {
    for r in [0.25, 1.0, 3.0] {
        let j = Jet {
            x: r,
            xp: 0.0,
            zp: 1.0,
            xpp: 0.0,
            zpp: 0.0,
        };
        assert!((mean_curvature(1.0, &j).unwrap() - 0.5 / r).abs() < 1e-15);
        assert!((mean_curvature_fundamental(1.0, &j, 0.4).unwrap() - 0.5 / r).abs() < 1e-15);
    }
}

#[test]
fn curvature_routes_agree_on_random_jets() {
    for c0 in [0.3, 1.0, -2.5] {
        assert!(random_jet_agreement(c0, 1000, 11) < 1e-10);
    }
}

#[test]
fn mesh_invariants_on_sample_orbits() {
    let cases = [
        ("t^2+1", 1.0, 0.3, FRAC_PI_2, 10.0),
        ("t^2+1", 1.0, 1.5, FRAC_PI_2, 10.0),
        ("(t-0.5)*(t+2)", 2.0, 1.2, -1.0, 6.0),
        ("cos(40*t)+2", 0.5, 0.4, 1.0, 6.0),
    ];
    for (h, c0, x, phi, span) in cases {
        let m = model(h, c0, phi.sin().signum());
        let o = orbit_from(&m, x, phi, span);
        let p = build_profile(&o).unwrap();
        let mesh = build_mesh(&p, &m.h, (0.0, TAU), 24, 150).unwrap();
        for c in mesh_suite(&mesh, &p, h) {
            assert!(c.pass, "{} {} {}", h, c.name, c.measured);
        }
    }
}

#[test]
fn mesh_through_the_axis() {
    let m = model("t^2+1", 1.0, 1.0);
    let o = trace_from_axis(&m, 10.0, &IntegrateOptions::default()).unwrap();
    let o = continue_through_axis(&o, 4.0, &IntegrateOptions::default()).unwrap();
    let p = build_profile(&o).unwrap();
    assert!(p.samples.iter().any(|s| s.x < 0.0));
    let mesh = build_mesh(&p, &m.h, (0.0, PI), 24, 200).unwrap();
    for c in mesh_suite(&mesh, &p, "axis") {
        assert!(c.pass, "{} {}", c.name, c.measured);
    }
}

#[test]
fn axis_orbit_taxonomy() {
    let m = model("t^2+1", 1.0, 1.0);
    let o = trace_from_axis(&m, 10.0, &IntegrateOptions::default()).unwrap();
    let p = build_profile(&o).unwrap();
    let class = classify(&o, &m, &ClassifyOptions::default()).unwrap();
    match surface_taxonomy(&o, &p, &class).unwrap().label {
        SurfaceLabel::AxisPeriodic { period } => assert!((period - 4.354490346828394).abs() < 1e-5),
        l => panic!("{l:?}"),
    }

    let m = model("1", 1.0, 1.0);
    let o = orbit_from(&m, 0.5, FRAC_PI_2, 3.0);
    let class = classify(&o, &m, &ClassifyOptions::default()).unwrap();
    let t = surface_taxonomy(&o, &build_profile(&o).unwrap(), &class).unwrap();
    assert_eq!(t.label, SurfaceLabel::Cylinder { radius: 0.5 });

    let m = model("(t-0.6)^2", 1.0, 1.0);
    let o = trace_from_axis(&m, 20000.0, &IntegrateOptions::default().with_max_step(5.0)).unwrap();
    let class = classify(&o, &m, &ClassifyOptions::default()).unwrap();
    let t = surface_taxonomy(&o, &build_profile(&o).unwrap(), &class).unwrap();
    assert!(matches!(t.label, SurfaceLabel::LineAsymptotic { t0 } if (t0 - 0.6).abs() < 1e-9));
    assert_eq!(t.warnings.len(), 1);
}

#[test]
fn glue_check_on_the_nodoid() {
    let m = model("t^2+1", 1.0, 1.0);
    let o = orbit_from(&m, 1.5, FRAC_PI_2, 10.0);
    let g = glue_check(&o).unwrap();
    assert!(g.switches.len() >= 6);
    assert!(g.max_mismatch < 1e-8);
    for s in &g.switches {
        let d = (1.0 + s.x0 * s.x0).sqrt();
        let xp = if s.left[2] > 0.0 { 1.0 } else { -1.0 };
        let want = [0.0, -xp / d, xp * s.x0 / d];
        for (k, w) in want.iter().enumerate() {
            assert!((s.left[k] - w).abs() < 1e-8 && (s.right[k] - w).abs() < 1e-8);
        }
    }
    // the helix radii alternate between the two extremes of x
    let radii: Vec<f64> = g.switches.iter().map(|s| s.x0).collect();
    for w in radii.windows(3) {
        assert!((w[0] - w[2]).abs() < 1e-7);
    }
}

#[test]
fn glue_check_needs_a_switch() {
    let m = model("t^2+1", 1.0, 1.0);
    let o = orbit_from(&m, 0.45, FRAC_PI_2, 10.0);
    assert_eq!(glue_check(&o), Err(GeometryError::NoSwitch));
}

#[test]
fn nodoid_period_against_tight_reintegration() {
    let m = model("t^2+1", 1.0, 1.0);
    let default = orbit_from(&m, 1.5, FRAC_PI_2, 20.0);
    let tight = integrate(
        &m,
        CurveState {
            s: 0.0,
            x: 1.5,
            z: 0.0,
            phi: FRAC_PI_2,
        },
        20.0,
        &IntegrateOptions::default().with_tolerance(1e-12),
    )
    .unwrap();
    let p1 = classify(&default, &m, &ClassifyOptions::default()).unwrap();
    let p2 = classify(&tight, &m, &ClassifyOptions::default()).unwrap();
    let period = |c| match c {
        helicoid_core::OrbitClass::NodoidType { period, .. } => period,
        c => panic!("{c:?}"),
    };
    assert!((period(p1) - period(p2)).abs() < 1e-5);
}
