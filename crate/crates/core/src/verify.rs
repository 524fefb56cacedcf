//! Numerical invariant suites. Each check records what was measured against
//! which tolerance, so a report can be printed or serialized as is.

use serde::Serialize;

use crate::geometry::{
    self, gauss_map, immersion, mean_curvature, mean_curvature_fundamental, norm, HelicoidMesh, Jet, ProfileCurve,
};
use crate::ode::{self, Event, SolverOptions};
use crate::orbit::{kappa, state_nu, CurveState, EventKind, Orbit};
use crate::phase::{EndpointKind, NullclineCurve, PhaseModel, PhasePoint};
use crate::prescription::{profile_of, HFunction, HSource};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured < tolerance`.
    pub fn below(suite: &str, name: impl Into<String>, measured: f64, tolerance: f64) -> Check {
        Check {
            suite: suite.into(),
            name: name.into(),
            measured,
            tolerance,
            pass: measured < tolerance,
        }
    }

    /// Passes when `measured > tolerance`.
    pub fn above(suite: &str, name: impl Into<String>, measured: f64, tolerance: f64) -> Check {
        Check {
            suite: suite.into(),
            name: name.into(),
            measured,
            tolerance,
            pass: measured > tolerance,
        }
    }

    pub fn flag(suite: &str, name: impl Into<String>, ok: bool) -> Check {
        Check {
            suite: suite.into(),
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
            pass: ok,
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

pub fn prescription_suite(h: &HFunction) -> Vec<Check> {
    const S: &str = "prescription";
    let mut out = Vec::new();
    let d = h.derivative_check();
    out.push(Check::below(
        S,
        "derivative_vs_central_difference_excess",
        d.excess,
        1e-300,
    ));
    let p = profile_of(h);
    let worst_zero = p.zeros.iter().map(|&t| h.eval(t).abs()).fold(0.0, f64::max);
    out.push(Check::below(S, "zeros_refined", worst_zero, 1e-10));
    out.push(Check::flag(
        S,
        "positive_implies_no_zeros",
        !p.is_positive || (p.zeros.is_empty() && p.min_value > 0.0),
    ));
    if p.is_even {
        let asym = p
            .zeros
            .iter()
            .map(|&t| p.zeros.iter().map(|&u| (u + t).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        out.push(Check::below(S, "even_zeros_symmetric", asym, 1e-9));
    }
    out
}

/// Nullcline invariants for one orientation. An empty nullcline yields no checks.
pub fn nullcline_suite(m: &PhaseModel, curve: &NullclineCurve) -> Vec<Check> {
    const S: &str = "phase";
    let mut out = Vec::new();
    let res = curve
        .components
        .iter()
        .flat_map(|c| c.residuals.iter().copied())
        .fold(0.0, f64::max);
    out.push(Check::below(S, "nullcline_residual", res, 1e-8));

    // Both curves end at the same boundary point, so the sample gap is taken
    // on grid samples only; the sign of F along beta0 settles the rest.
    let row = (1.0 - 1e-9) / curve.grid as f64;
    for t0 in profile_of(&m.h).zeros {
        let gap = curve
            .samples()
            .filter(|(_, p)| 1.0 - p.y.abs() >= row)
            .map(|(_, p)| (m.nu(p.x, p.y) - t0).abs())
            .fold(f64::INFINITY, f64::min);
        out.push(Check::above(S, format!("disjoint_from_beta0(t0={t0})"), gap, 1e-3));
        let f_max = m
            .beta0(t0, curve.x_max, 400)
            .samples
            .iter()
            .map(|&(x, y)| m.f_eps(x, y))
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(Check::below(S, format!("F_negative_on_beta0(t0={t0})"), f_max, 0.0));
    }

    let cell = curve.x_max / curve.grid as f64;
    let axis = m.axis_points();
    let zeros = profile_of(&m.h).zeros;
    let mut axis_dev: f64 = 0.0;
    let mut bound_dev: f64 = 0.0;
    let mut any_axis = false;
    let mut any_bound = false;
    for c in &curve.components {
        let Some(ends) = &c.ends else { continue };
        for e in ends {
            let Some(lim) = e.limit else { continue };
            match e.kind {
                EndpointKind::Axis if e.approach.x < 2.0 * cell => {
                    if let Some((p, q)) = axis {
                        any_axis = true;
                        axis_dev = axis_dev.max(p.dist(lim.x, lim.y).min(q.dist(lim.x, lim.y)));
                    }
                }
                EndpointKind::Boundary => {
                    let targets: Vec<(f64, f64)> = zeros
                        .iter()
                        .filter(|&&t0| t0 != 0.0 && t0.signum() == lim.y.signum())
                        .map(|&t0| (m.c0.abs() * t0.abs() / (1.0 - t0 * t0).sqrt(), t0.signum()))
                        .collect();
                    if !targets.is_empty() {
                        any_bound = true;
                        let d = targets
                            .iter()
                            .map(|&(x, y)| (x - lim.x).hypot(y - lim.y))
                            .fold(f64::INFINITY, f64::min);
                        bound_dev = bound_dev.max(d);
                    }
                }
                _ => {}
            }
        }
    }
    if any_axis {
        out.push(Check::below(S, "axis_endpoints_at_p_eps", axis_dev, 1e-3));
    }
    if any_bound {
        out.push(Check::below(S, "boundary_endpoints_at_p0", bound_dev, 1e-3));
    }

    if let Some(e0) = m.equilibrium() {
        let far = curve
            .samples()
            .filter(|(_, p)| p.y.abs() < 1e-6)
            .map(|(_, p)| (p.x - e0.x).hypot(p.y))
            .fold(0.0, f64::max);
        out.push(Check::below(S, "y_zero_only_at_equilibrium", far, 1e-6));
    }

    if m.eps.sign() > 0.0 {
        let irregular = curve
            .components
            .iter()
            .flat_map(|c| c.regular.iter())
            .filter(|&&r| !r)
            .count();
        let min_grad = curve
            .samples()
            .filter_map(|(_, p)| m.f2_and_gradient(p.x * p.x, m.nu(p.x, p.y)).ok())
            .map(|(_, g)| g[0].hypot(g[1]))
            .fold(f64::INFINITY, f64::min);
        out.push(Check::above(S, "f2_gradient_min", min_grad, 1e-6));
        out.push(Check::below(S, "irregular_samples", irregular as f64, 0.5));
    }

    if let HSource::Constant(h0) = m.h.source() {
        let dev = curve
            .samples()
            .map(|(_, p)| (m.f_eps_level(p.x, p.y) - m.eps.sign() * h0).abs())
            .fold(0.0, f64::max);
        out.push(Check::below(S, "constant_h_level_set", dev, 1e-6));
    }
    out
}

/// Linearization checks at `e0`, when it exists.
pub fn linearization_suite(m: &PhaseModel) -> Vec<Check> {
    const S: &str = "phase";
    let Ok(lin) = m.linearize_at_equilibrium() else {
        return Vec::new();
    };
    let re = lin.eigenvalues.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let mut out = vec![Check::below(S, "jacobian_vs_central_difference", lin.fd_max_diff, 1e-4)];
    if m.h.deriv(0.0) == 0.0 {
        out.push(Check::below(S, "eigenvalues_real_part", re, 1e-12));
    }
    out
}

/// Invariants of one integrated orbit.
pub fn orbit_suite(orbit: &Orbit, label: &str) -> Vec<Check> {
    const S: &str = "orbit";
    let mut out = Vec::new();
    out.push(Check::below(
        S,
        format!("{label}: prescription_residual"),
        orbit.h_residual_max,
        1e-6,
    ));
    let max_nu = orbit.samples.iter().map(|st| orbit.nu_at(st).abs()).fold(0.0, f64::max);
    out.push(Check::below(S, format!("{label}: angle_function_bound"), max_nu, 1.0));

    let sw = orbit
        .events_of(EventKind::EpsilonSwitch)
        .map(|e| e.state.phi.sin().abs())
        .fold(0.0, f64::max);
    out.push(Check::below(S, format!("{label}: switch_on_boundary"), sw, 1e-8));

    let mut nk: f64 = 0.0;
    let mut nf: f64 = 0.0;
    for e in orbit.events_of(EventKind::NullclineCrossing) {
        let st = e.state;
        nk = nk.max(kappa(&orbit.h, orbit.c0, st.x, st.phi).abs());
        if st.x > 0.0 {
            let (sn, cs) = st.phi.sin_cos();
            if sn != 0.0 {
                let m = PhaseModel {
                    h: orbit.h.clone(),
                    c0: orbit.c0,
                    eps: if sn > 0.0 {
                        crate::phase::Orientation::Plus
                    } else {
                        crate::phase::Orientation::Minus
                    },
                };
                nf = nf.max(m.f_eps(st.x, cs).abs());
            }
        }
    }
    out.push(Check::below(S, format!("{label}: nullcline_crossing_kappa"), nk, 1e-6));
    out.push(Check::below(S, format!("{label}: nullcline_crossing_F"), nf, 1e-6));

    let h0 = orbit.h.eval(0.0);
    let want = 1.0 / (1.0 + orbit.c0 * orbit.c0 * h0 * h0).sqrt();
    let slope = orbit
        .axis_contacts()
        .iter()
        .map(|st| (st.phi.cos().abs() - want).abs())
        .fold(0.0, f64::max);
    out.push(Check::below(S, format!("{label}: axis_slope"), slope, 1e-6));
    out
}

fn rhs(h: &HFunction, c0: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + '_ {
    move |_s, v| {
        let (sn, cs) = v[2].sin_cos();
        [cs, sn, kappa(h, c0, v[0], v[2])]
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Reversibility and reflection symmetry of the flow from `start`.
///
/// Always: integrating `span` forward then back returns to `start`. For even
/// `h` also: the orbit from `(x, pi - phi)` run backward is the mirror image
/// `(x, pi - phi)` of the forward orbit. Returns the largest deviation in
/// `x` and `phi` over ten checkpoints.
pub fn time_reversal(
    h: &HFunction,
    c0: f64,
    start: &CurveState,
    span: f64,
    opts: &SolverOptions,
) -> (f64, Option<f64>) {
    let f = rhs(h, c0);
    let y0 = [start.x, start.z, start.phi];
    // approaching the axis is unstable, so the window ends well before it
    let guard = [Event::new(|_s, v: &[f64; 3]| v[0].abs() - 0.05).terminal()];
    let (s_cap, _) = ode::solve(&f, 0.0, y0, span, opts, &guard).last();
    let span = if s_cap < span { 0.9 * s_cap } else { span };
    let mut retrace: f64 = 0.0;
    let mut mirror: f64 = 0.0;
    let even = profile_of(h).is_even;
    for k in 1..=10 {
        let s1 = span * k as f64 / 10.0;
        let fwd = ode::solve(&f, 0.0, y0, s1, opts, &[]);
        let (_, end) = fwd.last();
        let back = ode::solve(&f, s1, end, 0.0, opts, &[]);
        let (_, b) = back.last();
        retrace = retrace.max((b[0] - y0[0]).abs()).max(angle_gap(b[2], y0[2]));
        if even {
            let ym = [start.x, -start.z, std::f64::consts::PI - start.phi];
            let rev = ode::solve(&f, 0.0, ym, -s1, opts, &[]);
            let (_, r) = rev.last();
            mirror = mirror
                .max((r[0] - end[0]).abs())
                .max(angle_gap(std::f64::consts::PI - r[2], end[2]));
        }
    }
    (retrace, even.then_some(mirror))
}

/// Largest gap between `(x, cos phi)` and a direct integration of the `(x, y)`
/// system with fixed `eps = sign(sin phi)`, stopping `0.05` short of `|y| = 1`.
pub fn formulation_consistency(m: &PhaseModel, start: PhasePoint, span: f64, opts: &SolverOptions) -> f64 {
    let e = m.eps.sign();
    let fxy = |_s: f64, v: &[f64; 2]| match m.vector_field(PhasePoint { x: v[0], y: v[1] }) {
        Ok((dx, dy)) => [dx, dy],
        Err(_) => [f64::NAN, f64::NAN],
    };
    let guard = [Event::new(|_s, v: &[f64; 2]| v[1].abs() - 0.95).terminal()];
    let xy = ode::solve(fxy, 0.0, [start.x, start.y], span, opts, &guard);
    let phi0 = e * start.y.acos();
    let phi0 = if e > 0.0 { phi0 } else { -start.y.acos() };
    let f = rhs(&m.h, m.c0);
    let mut worst: f64 = 0.0;
    let n = xy.ts.len();
    for idx in [n / 4, n / 2, 3 * n / 4, n - 1] {
        let s1 = xy.ts[idx];
        let v = xy.ys[idx];
        let tr = ode::solve(&f, 0.0, [start.x, 0.0, phi0], s1, opts, &[]);
        let (_, w) = tr.last();
        worst = worst.max((w[0] - v[0]).abs()).max((w[2].cos() - v[1]).abs());
    }
    worst
}

/// Mesh checks: unit normals, `nu` formula, two-route curvature, angle invariance,
/// tangency of the normal, and the prescription residual.
pub fn mesh_suite(mesh: &HelicoidMesh, profile: &ProfileCurve, label: &str) -> Vec<Check> {
    const S: &str = "geometry";
    let c0 = mesh.c0;
    let mut unit: f64 = 0.0;
    let mut nu_dev: f64 = 0.0;
    let mut nu_max: f64 = 0.0;
    for (i, n) in mesh.normals.iter().enumerate() {
        unit = unit.max((norm(*n) - 1.0).abs());
        nu_max = nu_max.max(mesh.nu[i].abs());
    }
    let mut routes: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    let row_samples: Vec<_> = mesh
        .row_s
        .iter()
        .map(|&s| {
            *profile
                .samples
                .iter()
                .find(|p| p.s == s)
                .expect("mesh rows come from profile samples")
        })
        .collect();
    for (r, p) in row_samples.iter().enumerate() {
        let j = p.jet();
        let closed = mean_curvature(c0, &j).unwrap_or(f64::NAN);
        let nu_formula = geometry::angle_function(c0, j.x, j.xp);
        for k in 0..mesh.n_theta {
            let v = r * mesh.n_theta + k;
            nu_dev = nu_dev.max((mesh.nu[v] - nu_formula).abs());
            routes = routes.max((mesh.mean_curvature[v] - closed).abs());
            let theta = mesh.theta(k);
            ortho = ortho.max(tangency(c0, p.z, &j, theta));
        }
    }
    vec![
        Check::below(S, format!("{label}: unit_normal"), unit, 1e-12),
        Check::below(S, format!("{label}: nu_formula"), nu_dev, 1e-10),
        Check::below(S, format!("{label}: nu_bound"), nu_max, 1.0),
        Check::below(S, format!("{label}: curvature_routes_agree"), routes, 1e-10),
        Check::below(S, format!("{label}: theta_invariance"), mesh.theta_spread(), 1e-10),
        Check::below(S, format!("{label}: normal_orthogonal_to_tangents"), ortho, 1e-8),
        Check::below(S, format!("{label}: mesh_residual"), mesh.max_residual(), 1e-6),
    ]
}

/// `max(|<eta, Psi_s>|, |<eta, Psi_theta>|)` with central-difference tangents.
///
/// The profile near the sample is its second-order Taylor expansion.
fn tangency(c0: f64, z: f64, j: &Jet, theta: f64) -> f64 {
    let d = 1e-6;
    let at = |ds: f64, dt: f64| {
        let x = j.x + ds * j.xp + 0.5 * ds * ds * j.xpp;
        let zz = z + ds * j.zp + 0.5 * ds * ds * j.zpp;
        immersion(c0, x, zz, theta + dt)
    };
    let Ok(eta) = gauss_map(c0, j.x, j.xp, j.zp, theta) else {
        return f64::NAN;
    };
    let (p, q) = (at(d, 0.0), at(-d, 0.0));
    let ts = [
        (p[0] - q[0]) / (2.0 * d),
        (p[1] - q[1]) / (2.0 * d),
        (p[2] - q[2]) / (2.0 * d),
    ];
    let (p, q) = (at(0.0, d), at(0.0, -d));
    let tt = [
        (p[0] - q[0]) / (2.0 * d),
        (p[1] - q[1]) / (2.0 * d),
        (p[2] - q[2]) / (2.0 * d),
    ];
    let dot = |a: [f64; 3], b: [f64; 3]| (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / norm(b);
    dot(eta, ts).abs().max(dot(eta, tt).abs())
}

/// Two-route curvature agreement on random jets; returns the largest gap.
pub fn random_jet_agreement(c0: f64, count: usize, seed: u64) -> f64 {
    // xorshift keeps the core free of an RNG dependency for this one use
    let mut state = seed.max(1);
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let x = 0.05 + 3.0 * next();
        let phi = std::f64::consts::TAU * next();
        let k = -5.0 + 10.0 * next();
        let theta = std::f64::consts::TAU * next();
        let j = Jet::from_angle(x, phi, k);
        if let (Ok(a), Ok(b)) = (mean_curvature(c0, &j), mean_curvature_fundamental(c0, &j, theta)) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// `nu` at every orbit sample is strictly inside `(-1, 1)`.
pub fn nu_bound(orbit: &Orbit) -> f64 {
    orbit
        .samples
        .iter()
        .map(|st| state_nu(orbit.c0, st.x, st.phi).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub x_max: f64,
    pub grid: usize,
    /// Arclength of the sample orbits.
    pub s_max: f64,
    pub tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            x_max: 4.0,
            grid: 400,
            s_max: 30.0,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        all_pass(&self.checks)
    }
}

/// Runs every suite for one prescription and pitch.
///
/// Sample orbits: the axis orbit, and an orbit through `(1.3 e0, 0)` or
/// `(1, 0)` when there is no equilibrium. Numerical failures of a sample orbit
/// are reported as failed checks rather than errors.
pub fn run_suites(h: &HFunction, c0: f64, cfg: &SuiteConfig) -> SuiteReport {
    use crate::geometry::{build_mesh, build_profile, glue_check};
    use crate::orbit::{axis_orientation, integrate, trace_from_axis, IntegrateOptions};
    use crate::phase::{trace_nullcline, Orientation, PhaseError};

    let mut checks = prescription_suite(h);
    let mut warnings = Vec::new();
    let hp = profile_of(h);
    if !hp.classification_applies() {
        let mut why = Vec::new();
        if !hp.is_positive {
            why.push("not positive");
        }
        if !hp.is_even {
            why.push("not even");
        }
        if !hp.is_increasing_on_0_1 {
            why.push("not increasing on [0, 1]");
        }
        warnings.push(format!(
            "h is {}; the five-case surface list does not apply",
            why.join(", ")
        ));
    }

    for eps in [Orientation::Plus, Orientation::Minus] {
        let Ok(m) = PhaseModel::new(h.clone(), c0, eps) else {
            checks.push(Check::flag("phase", "valid_pitch", false));
            return SuiteReport { checks, warnings };
        };
        match trace_nullcline(&m, cfg.x_max, cfg.grid) {
            Ok(curve) => checks.extend(nullcline_suite(&m, &curve).into_iter().map(|mut c| {
                c.name = format!("eps={:+}: {}", eps.sign(), c.name);
                c
            })),
            Err(PhaseError::EmptyNullcline) => {}
            Err(e) => {
                checks.push(Check::flag(
                    "phase",
                    format!("eps={:+}: nullcline ({e})", eps.sign()),
                    false,
                ));
            }
        }
        checks.extend(linearization_suite(&m));
    }

    let opts = IntegrateOptions::default().with_tolerance(cfg.tol);
    let m = PhaseModel::new(h.clone(), c0, axis_orientation(h)).expect("pitch checked above");
    match trace_from_axis(&m, cfg.s_max, &opts) {
        Ok(o) => checks.extend(orbit_suite(&o, "axis orbit")),
        Err(e) => checks.push(Check::flag("orbit", format!("axis orbit ({e})"), false)),
    }

    let (m, x) = match [Orientation::Plus, Orientation::Minus]
        .into_iter()
        .filter_map(|eps| {
            let m = PhaseModel::new(h.clone(), c0, eps).ok()?;
            let e0 = m.equilibrium()?;
            Some((m, 1.3 * e0.x))
        })
        .next()
    {
        Some(v) => v,
        None => (m, 1.0),
    };
    let start = CurveState {
        s: 0.0,
        x,
        z: 0.0,
        phi: m.eps.sign() * std::f64::consts::FRAC_PI_2,
    };
    let sample = integrate(&m, start, cfg.s_max.min(40.0), &opts.with_max_step(0.05));
    match sample {
        Ok(o) => {
            checks.extend(orbit_suite(&o, "sample orbit"));
            match build_profile(&o) {
                Ok(p) => {
                    let (unit, second) = p.jet_identity_errors();
                    checks.push(Check::below("geometry", "sample orbit: unit_speed", unit, 1e-10));
                    checks.push(Check::below(
                        "geometry",
                        "sample orbit: second_derivative_identity",
                        second,
                        1e-8,
                    ));
                    match build_mesh(&p, h, (0.0, std::f64::consts::TAU), 32, 120) {
                        Ok(mesh) => checks.extend(mesh_suite(&mesh, &p, "sample orbit")),
                        Err(e) => checks.push(Check::flag("geometry", format!("sample mesh ({e})"), false)),
                    }
                }
                Err(e) => checks.push(Check::flag("geometry", format!("sample profile ({e})"), false)),
            }
            if o.events_of(EventKind::EpsilonSwitch).next().is_some() {
                match glue_check(&o) {
                    Ok(g) => checks.push(Check::below(
                        "geometry",
                        "sample orbit: glue_mismatch",
                        g.max_mismatch,
                        1e-8,
                    )),
                    Err(e) => checks.push(Check::flag("geometry", format!("sample orbit: glue ({e})"), false)),
                }
            }
        }
        Err(e) => checks.push(Check::flag("orbit", format!("sample orbit ({e})"), false)),
    }

    let tight = SolverOptions {
        rtol: 1e-12,
        atol: 1e-12,
        ..SolverOptions::default()
    };
    let (retrace, mirror) = time_reversal(h, c0, &start, REVERSAL_SPAN, &tight);
    checks.push(Check::below("orbit", "time_reversal_retrace", retrace, 1e-6));
    if let Some(mirror) = mirror {
        checks.push(Check::below("orbit", "time_reversal_reflection", mirror, 1e-6));
    }
    if let Ok(p) = PhasePoint::new(x, 0.3) {
        let gap = formulation_consistency(&m, p, 3.0, &tight);
        checks.push(Check::below("orbit", "xy_system_consistency", gap, 1e-6));
    }
    checks.push(Check::below(
        "geometry",
        "random_jets_curvature_routes",
        random_jet_agreement(c0, 1000, 0x5eed),
        1e-10,
    ));
    SuiteReport { checks, warnings }
}

/// Arclength of the reversal window. Near attracting asymptotes the backward
/// flow expands errors exponentially, so the window is kept short.
pub const REVERSAL_SPAN: f64 = 2.0;
