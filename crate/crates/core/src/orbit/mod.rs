//! Profile curves integrated in tangent-angle form.
//!
//! The state is `(s, x, z, phi)` with `x' = cos phi`, `z' = sin phi` and
//! `phi' = kappa`, the geodesic curvature of the profile. The right-hand side
//! stays smooth where `|x'| = 1`, so the two orientations `eps = sign(z')`
//! glue together without special handling. `x` is signed: a profile that
//! crosses the axis continues into `x < 0`, which is the rotation by `pi`
//! of the sheet `x > 0` shifted vertically by `c0 pi`.

mod classify;

use serde::Serialize;
use thiserror::Error;

use crate::ode::{self, Event, SolverOptions, Stop};
use crate::phase::{Orientation, PhaseError, PhaseModel};
use crate::prescription::{profile_of, HFunction};

pub use classify::{classify, ClassifyOptions, OrbitClass};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("x must be positive, got {0}")]
    Domain(f64),
    #[error("step size underflow at s = {}, x = {}, phi = {}", state.s, state.x, state.phi)]
    StepFailure { state: CurveState },
    #[error("start state leaves the admissible domain: {0}")]
    DomainExit(String),
    #[error("no axis orbit: eps*h(0) = {0} < 0")]
    NoAxisOrbit(f64),
    #[error("orbit does not end or start on the axis")]
    NotAtAxis,
    #[error("no return to the section within the horizon")]
    NoReturn,
    #[error("h is not even; the mirror completion does not apply")]
    NotEven,
    #[error("orbit has no y = 0 crossing to mirror at")]
    NoYZeroCrossing,
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Phase(#[from] PhaseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveState {
    pub s: f64,
    pub x: f64,
    pub z: f64,
    pub phi: f64,
}

impl CurveState {
    /// `y = x' = cos phi`.
    pub fn y(&self) -> f64 {
        self.phi.cos()
    }

    /// `sign(z')`, or `None` on the gluing boundary `z' = 0`.
    pub fn eps(&self) -> Option<f64> {
        let s = self.phi.sin();
        (s != 0.0).then(|| s.signum())
    }

    fn vec(&self) -> [f64; 3] {
        [self.x, self.z, self.phi]
    }

    fn from_vec(s: f64, v: &[f64; 3]) -> Self {
        CurveState {
            s,
            x: v[0],
            z: v[1],
            phi: v[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    AxisApproach,
    EpsilonSwitch,
    NullclineCrossing,
    YZeroCrossing,
    PoincareReturn,
    WindowExit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitEvent {
    pub kind: EventKind,
    pub s: f64,
    pub state: CurveState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrbitStop {
    Horizon,
    AxisApproach,
    WindowExit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub h: HFunction,
    pub c0: f64,
    pub samples: Vec<CurveState>,
    pub events: Vec<OrbitEvent>,
    pub classification: Option<OrbitClass>,
    pub h_residual_max: f64,
    /// The first sample sits at `|x| = delta` on a curve leaving the axis.
    pub axis_start: bool,
    pub stop: OrbitStop,
    pub delta_axis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegrateOptions {
    pub solver: SolverOptions,
    /// Stop once `|x|` exceeds this radius.
    pub x_window: Option<f64>,
    /// Integrate toward decreasing `s`.
    pub backward: bool,
    pub delta_axis: Option<f64>,
}

impl IntegrateOptions {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.solver.rtol = tol;
        self.solver.atol = tol;
        self
    }

    pub fn with_max_step(mut self, step: f64) -> Self {
        self.solver.max_step = step;
        self
    }
}

/// `delta_axis = 1e-6 max(1, |c0|)`.
pub fn default_delta_axis(c0: f64) -> f64 {
    1e-6 * c0.abs().max(1.0)
}

/// `nu = x cos phi / sqrt(x^2 + c0^2 cos^2 phi)`.
pub fn state_nu(c0: f64, x: f64, phi: f64) -> f64 {
    crate::phase::nu(c0, x, phi.cos())
}

/// `phi'` for signed `x != 0`.
pub(crate) fn kappa(h: &HFunction, c0: f64, x: f64, phi: f64) -> f64 {
    let (sn, cs) = phi.sin_cos();
    let c2 = c0 * c0;
    let q = x * x + c2 * cs * cs;
    let nu = x * cs / q.sqrt();
    (2.0 * h.eval(nu) * q * q.sqrt() - sn * (x * x + 2.0 * c2 * cs * cs)) / (x * x * x + c2 * x)
}

/// `dphi/ds` at a state with `x > 0`; independent of the orientation.
pub fn phi_rate(h: &HFunction, c0: f64, state: &CurveState) -> Result<f64, OrbitError> {
    if !(state.x > 0.0) {
        return Err(OrbitError::Domain(state.x));
    }
    Ok(kappa(h, c0, state.x, state.phi))
}

/// Mean curvature minus `h(nu)` at a state, using the closed-form curvature.
pub(crate) fn residual(h: &HFunction, c0: f64, st: &CurveState) -> f64 {
    let k = kappa(h, c0, st.x, st.phi);
    let big_h = crate::geometry::mean_curvature_closed(c0, st.x, st.phi, k);
    (big_h - h.eval(state_nu(c0, st.x, st.phi))).abs()
}

/// State at `|x| = delta` on the unique profile through the axis.
///
/// `cos phi0 = direction / r`, `sin phi0 = |c0| h(0) / r`, `r = sqrt(1 + c0^2 h(0)^2)`.
/// The axis is reached at `s = 0`, `z = 0`; the state is the first-order
/// Taylor predictor from there, so `s0 = delta / cos phi0`.
pub fn start_from_axis(m: &PhaseModel, direction: f64) -> Result<CurveState, OrbitError> {
    let h0 = m.h.eval(0.0);
    if m.eps.sign() * h0 < 0.0 {
        return Err(OrbitError::NoAxisOrbit(m.eps.sign() * h0));
    }
    let delta = default_delta_axis(m.c0);
    Ok(axis_state(m.c0, h0, direction.signum(), delta, 1.0))
}

/// Axis-adjacent state on side `side = sign(x)` moving with `x' = dir |x'|`.
fn axis_state(c0: f64, h0: f64, dir: f64, delta: f64, side: f64) -> CurveState {
    let r = (1.0 + c0 * c0 * h0 * h0).sqrt();
    let cs = dir / r;
    let sn = c0.abs() * h0 / r;
    let phi = sn.atan2(cs);
    let s = side * delta / cs;
    CurveState {
        s,
        x: side * delta,
        z: sn * s,
        phi,
    }
}

fn rhs<'a>(h: &'a HFunction, c0: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + 'a {
    move |_s, v| {
        let (sn, cs) = v[2].sin_cos();
        [cs, sn, kappa(h, c0, v[0], v[2])]
    }
}

/// Integrates `span` units of arclength from `start`.
pub fn integrate(m: &PhaseModel, start: CurveState, span: f64, opts: &IntegrateOptions) -> Result<Orbit, OrbitError> {
    integrate_parts(&m.h, m.c0, start, span, opts)
}

pub(crate) fn integrate_parts(
    h: &HFunction,
    c0: f64,
    start: CurveState,
    span: f64,
    opts: &IntegrateOptions,
) -> Result<Orbit, OrbitError> {
    let vals = [start.x, start.z, start.phi, start.s];
    if vals.iter().any(|v| !v.is_finite()) || start.x == 0.0 {
        return Err(OrbitError::DomainExit(format!(
            "start (s, x, z, phi) = ({}, {}, {}, {})",
            start.s, start.x, start.z, start.phi
        )));
    }
    let delta = opts.delta_axis.unwrap_or_else(|| default_delta_axis(c0));
    let f = rhs(h, c0);

    let kinds = [
        EventKind::AxisApproach,
        EventKind::EpsilonSwitch,
        EventKind::YZeroCrossing,
        EventKind::NullclineCrossing,
        EventKind::WindowExit,
    ];
    let mut events: Vec<Event<'_, 3>> = vec![
        Event::new(move |_s, v: &[f64; 3]| v[0].abs() - delta).terminal(),
        Event::new(|_s, v: &[f64; 3]| v[2].sin()),
        Event::new(|_s, v: &[f64; 3]| v[2].cos()),
        Event::new(move |_s, v: &[f64; 3]| kappa(h, c0, v[0], v[2])),
    ];
    if let Some(xw) = opts.x_window {
        events.push(Event::new(move |_s, v: &[f64; 3]| v[0].abs() - xw).terminal());
    }

    let dir = if opts.backward { -1.0 } else { 1.0 };
    let traj = ode::solve(&f, start.s, start.vec(), start.s + dir * span, &opts.solver, &events);

    let samples: Vec<CurveState> = traj
        .ts
        .iter()
        .zip(&traj.ys)
        .map(|(&s, v)| CurveState::from_vec(s, v))
        .collect();
    let stop = match traj.stop {
        Stop::Reached => OrbitStop::Horizon,
        Stop::Terminal(0) => OrbitStop::AxisApproach,
        Stop::Terminal(_) => OrbitStop::WindowExit,
        Stop::StepFailure | Stop::MaxSteps => {
            return Err(OrbitError::StepFailure {
                state: *samples.last().unwrap(),
            })
        }
    };
    // a start that sits on a section up to rounding would report it again
    let at_start = |t: f64| (t - start.s).abs() <= 1e-9 * start.s.abs().max(1.0);
    let events = traj
        .events
        .iter()
        .filter(|e| {
            !(at_start(e.t)
                && matches!(
                    kinds[e.index],
                    EventKind::EpsilonSwitch | EventKind::YZeroCrossing | EventKind::NullclineCrossing
                ))
        })
        .map(|e| OrbitEvent {
            kind: kinds[e.index],
            s: e.t,
            state: CurveState::from_vec(e.t, &e.y),
        })
        .collect();
    let axis_start = start.x.abs() <= delta * (1.0 + 1e-9);
    let mut orbit = Orbit {
        h: h.clone(),
        c0,
        samples,
        events,
        classification: None,
        h_residual_max: 0.0,
        axis_start,
        stop,
        delta_axis: delta,
    };
    orbit.refresh();
    Ok(orbit)
}

impl Orbit {
    fn refresh(&mut self) {
        self.events.retain(|e| e.kind != EventKind::PoincareReturn);
        self.events.sort_by(|a, b| a.s.total_cmp(&b.s));
        self.mark_returns();
        self.h_residual_max = self
            .samples
            .iter()
            .map(|st| residual(&self.h, self.c0, st))
            .fold(0.0, f64::max);
    }

    /// Tags each `y = 0` crossing that repeats the reference crossing.
    ///
    /// The reference is the start when it lies on `y = 0`, else the first
    /// crossing. A repeat has the same sign of `z'` and the same direction
    /// of `y`.
    fn mark_returns(&mut self) {
        let signature = |st: &CurveState| {
            let k = kappa(&self.h, self.c0, st.x, st.phi);
            let (sn, _) = st.phi.sin_cos();
            (sn > 0.0, -sn * k > 0.0)
        };
        let first = self.samples[0];
        let reference = if first.phi.cos().abs() < 1e-12 {
            Some(signature(&first))
        } else {
            self.events
                .iter()
                .find(|e| e.kind == EventKind::YZeroCrossing)
                .map(|e| signature(&e.state))
        };
        let Some(reference) = reference else { return };
        let returns: Vec<OrbitEvent> = self
            .events
            .iter()
            .filter(|e| e.kind == EventKind::YZeroCrossing && signature(&e.state) == reference)
            .skip(if first.phi.cos().abs() < 1e-12 { 0 } else { 1 })
            .map(|e| OrbitEvent {
                kind: EventKind::PoincareReturn,
                ..*e
            })
            .collect();
        self.events.extend(returns);
        self.events.sort_by(|a, b| a.s.total_cmp(&b.s));
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &OrbitEvent> + '_ {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn first(&self) -> &CurveState {
        &self.samples[0]
    }

    pub fn last(&self) -> &CurveState {
        self.samples.last().unwrap()
    }

    /// `phi'` at each sample.
    pub fn kappas(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|st| kappa(&self.h, self.c0, st.x, st.phi))
            .collect()
    }

    pub fn nu_at(&self, st: &CurveState) -> f64 {
        state_nu(self.c0, st.x, st.phi)
    }

    /// Maps `x < 0` samples to the sheet `x > 0`: `(x, z, phi) -> (-x, z + c0 pi, pi - phi)`.
    pub fn rotated_sheet(&self) -> Orbit {
        let map = |st: &CurveState| {
            if st.x < 0.0 {
                CurveState {
                    s: st.s,
                    x: -st.x,
                    z: st.z + self.c0 * std::f64::consts::PI,
                    phi: std::f64::consts::PI - st.phi,
                }
            } else {
                *st
            }
        };
        let mut o = self.clone();
        o.samples = self.samples.iter().map(map).collect();
        for e in &mut o.events {
            e.state = map(&e.state);
        }
        o
    }

    /// Axis contacts: the start if it leaves the axis, plus every `AxisApproach`.
    pub fn axis_contacts(&self) -> Vec<CurveState> {
        let mut out = Vec::new();
        if self.axis_start {
            out.push(self.samples[0]);
        }
        out.extend(self.events_of(EventKind::AxisApproach).map(|e| e.state));
        out
    }
}

/// Orientation in which an orbit can leave the axis: `eps h(0) >= 0`.
pub fn axis_orientation(h: &HFunction) -> Orientation {
    if h.eval(0.0) < 0.0 {
        Orientation::Minus
    } else {
        Orientation::Plus
    }
}

/// Orbit leaving the axis with `x' > 0`. For even `h` an orbit that turns
/// back is completed by reflection, so it returns to the axis exactly.
pub fn trace_from_axis(m: &PhaseModel, span: f64, opts: &IntegrateOptions) -> Result<Orbit, OrbitError> {
    let o = integrate(m, start_from_axis(m, 1.0)?, span, opts)?;
    if profile_of(&m.h).is_even && o.events_of(EventKind::YZeroCrossing).next().is_some() {
        return complete_by_symmetry(&o);
    }
    Ok(o)
}

/// Mirrors an orbit of an even `h` across its first `y = 0` crossing.
///
/// The reflection `(x, z, phi)(s_h + t) = (x, 2 z_h - z, 2 phi_h - phi)(s_h - t)`
/// solves the same system when `h(-t) = h(t)`. An orbit leaving the axis
/// thereby returns to it with exactly the mandated slope.
pub fn complete_by_symmetry(orbit: &Orbit) -> Result<Orbit, OrbitError> {
    if !profile_of(&orbit.h).is_even {
        return Err(OrbitError::NotEven);
    }
    let pivot = orbit
        .events_of(EventKind::YZeroCrossing)
        .next()
        .copied()
        .ok_or(OrbitError::NoYZeroCrossing)?;
    let (sh, zh, ph) = (pivot.s, pivot.state.z, pivot.state.phi);
    let mut samples: Vec<CurveState> = orbit.samples.iter().copied().filter(|st| st.s < sh).collect();
    samples.push(pivot.state);
    let mirror = |st: &CurveState| CurveState {
        s: 2.0 * sh - st.s,
        x: st.x,
        z: 2.0 * zh - st.z,
        phi: 2.0 * ph - st.phi,
    };
    let tail: Vec<CurveState> = samples[..samples.len() - 1].iter().rev().map(mirror).collect();
    samples.extend(tail);

    let mut events: Vec<OrbitEvent> = orbit.events.iter().copied().filter(|e| e.s <= sh).collect();
    let mirrored: Vec<OrbitEvent> = events
        .iter()
        .filter(|e| e.s < sh)
        .map(|e| OrbitEvent {
            kind: e.kind,
            s: 2.0 * sh - e.s,
            state: mirror(&e.state),
        })
        .collect();
    events.extend(mirrored);
    let mut stop = OrbitStop::Horizon;
    if orbit.axis_start {
        let end = mirror(&orbit.samples[0]);
        events.push(OrbitEvent {
            kind: EventKind::AxisApproach,
            s: end.s,
            state: end,
        });
        stop = OrbitStop::AxisApproach;
    }
    let mut out = Orbit {
        samples,
        events,
        classification: None,
        stop,
        ..orbit.clone()
    };
    out.refresh();
    Ok(out)
}

/// Continues an orbit through the rotation axis.
///
/// An orbit that ends with `AxisApproach` is resumed on the far side of the
/// axis in signed coordinates; an orbit that starts on the axis is extended
/// backward. In both cases the continuation leaves the axis, the stable
/// direction, from the exact axis slope. `span` is the arclength added.
pub fn continue_through_axis(orbit: &Orbit, span: f64, opts: &IntegrateOptions) -> Result<Orbit, OrbitError> {
    let h0 = orbit.h.eval(0.0);
    let delta = orbit.delta_axis;
    let r = (1.0 + orbit.c0 * orbit.c0 * h0 * h0).sqrt();
    let wrap = |phi: f64, near: f64| {
        let k = ((near - phi) / std::f64::consts::TAU).round();
        phi + k * std::f64::consts::TAU
    };
    if orbit.stop == OrbitStop::AxisApproach {
        let a = *orbit.last();
        let side = a.x.signum();
        let cs = a.phi.cos().signum() / r;
        let sn = orbit.c0.abs() * h0 / r;
        let phi = wrap(sn.atan2(cs), a.phi);
        let ds = delta / cs.abs();
        let start = CurveState {
            s: a.s + 2.0 * ds,
            x: -side * delta,
            z: a.z + 2.0 * sn * ds,
            phi,
        };
        let ext = integrate_parts(
            &orbit.h,
            orbit.c0,
            start,
            span,
            &IntegrateOptions {
                backward: false,
                delta_axis: Some(delta),
                ..*opts
            },
        )?;
        let mut out = orbit.clone();
        out.samples.extend(ext.samples);
        out.events.extend(ext.events);
        out.stop = ext.stop;
        out.classification = None;
        out.refresh();
        return Ok(out);
    }
    if orbit.axis_start {
        let a = orbit.samples[0];
        let side = a.x.signum();
        let cs = a.phi.cos();
        let ds = delta / cs.abs();
        let start = CurveState {
            s: a.s - 2.0 * ds,
            x: -side * delta,
            z: a.z - 2.0 * a.phi.sin() * ds,
            phi: a.phi,
        };
        let ext = integrate_parts(
            &orbit.h,
            orbit.c0,
            start,
            span,
            &IntegrateOptions {
                backward: true,
                delta_axis: Some(delta),
                ..*opts
            },
        )?;
        let mut out = orbit.clone();
        let mut samples: Vec<CurveState> = ext.samples.into_iter().rev().collect();
        samples.extend(orbit.samples.iter().copied());
        out.samples = samples;
        out.events.extend(ext.events);
        // the far side now leads; the axis is crossed in the interior
        out.axis_start = ext.stop == OrbitStop::AxisApproach;
        out.events.push(OrbitEvent {
            kind: EventKind::AxisApproach,
            s: a.s,
            state: a,
        });
        out.classification = None;
        out.refresh();
        return Ok(out);
    }
    Err(OrbitError::NotAtAxis)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareResult {
    pub x_return: f64,
    /// Arclength to the next crossing of `y = 0` in the opposite direction.
    pub half_period: f64,
    /// Arclength to the next crossing in the same direction.
    pub period: f64,
    pub dz: f64,
    /// Opposite-side section coordinate.
    pub x_opposite: f64,
}

/// First return to the section `y = 0` from `(x_start, y = 0)`.
pub fn poincare_return(
    m: &PhaseModel,
    x_start: f64,
    horizon: f64,
    opts: &IntegrateOptions,
) -> Result<PoincareResult, OrbitError> {
    let e0 = m
        .equilibrium()
        .ok_or(PhaseError::NoEquilibrium(m.eps.sign() * m.h.eval(0.0)))?;
    if !(x_start > 0.0) {
        return Err(OrbitError::Domain(x_start));
    }
    let phi0 = m.eps.sign() * std::f64::consts::FRAC_PI_2;
    if x_start == e0.x || kappa(&m.h, m.c0, x_start, phi0) == 0.0 {
        return Ok(PoincareResult {
            x_return: x_start,
            half_period: 0.0,
            period: 0.0,
            dz: 0.0,
            x_opposite: x_start,
        });
    }
    let start = CurveState {
        s: 0.0,
        x: x_start,
        z: 0.0,
        phi: phi0,
    };
    let o = integrate(m, start, horizon, opts)?;
    let ret = o
        .events_of(EventKind::PoincareReturn)
        .next()
        .ok_or(OrbitError::NoReturn)?;
    let half = o
        .events_of(EventKind::YZeroCrossing)
        .find(|e| e.s < ret.s)
        .ok_or(OrbitError::NoReturn)?;
    Ok(PoincareResult {
        x_return: ret.state.x,
        half_period: half.s,
        period: ret.s,
        dz: ret.state.z,
        x_opposite: half.state.x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prescription::parse_h;

    fn model(h: &str) -> PhaseModel {
        PhaseModel::new(parse_h(h).unwrap(), 1.0, Orientation::Plus).unwrap()
    }

    #[test]
    fn phi_rate_rejects_axis() {
        let m = model("1");
        let st = CurveState {
            s: 0.0,
            x: 0.0,
            z: 0.0,
            phi: 1.0,
        };
        assert_eq!(phi_rate(&m.h, 1.0, &st), Err(OrbitError::Domain(0.0)));
    }

    #[test]
    fn reflection_identity_of_kappa() {
        // kappa(-x, pi - phi) = -kappa(x, phi) for every h
        let h = parse_h("(t-0.5)*(t+2)").unwrap();
        for &(x, phi) in &[(0.3, 0.2), (1.7, -2.0), (0.05, 3.0)] {
            let a = kappa(&h, 1.3, x, phi);
            let b = kappa(&h, 1.3, -x, std::f64::consts::PI - phi);
            assert!((a + b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn axis_start_geometry() {
        let m = model("t^2+1");
        let st = start_from_axis(&m, 1.0).unwrap();
        assert!((st.phi.cos() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((st.x - 1e-6).abs() < 1e-20);
        assert!((st.s - 1e-6 * 2f64.sqrt()).abs() < 1e-18);
    }

    #[test]
    fn wrong_orientation_has_no_axis_orbit() {
        let m = model("t^2+1").with_eps(Orientation::Minus);
        assert!(matches!(start_from_axis(&m, 1.0), Err(OrbitError::NoAxisOrbit(_))));
    }
}
