use serde::Serialize;

use super::{EventKind, Orbit, OrbitError, OrbitStop};
use crate::phase::PhaseModel;
use crate::prescription::profile_of;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyOptions {
    pub equilibrium_tol: f64,
    pub closure_tol: f64,
    pub asymptote_tol: f64,
    /// Trailing share of the arclength over which an asymptote must hold.
    pub trailing_fraction: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            equilibrium_tol: 1e-8,
            closure_tol: 1e-5,
            asymptote_tol: 1e-2,
            trailing_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "tag")]
pub enum OrbitClass {
    Equilibrium {
        radius: f64,
    },
    AxisMeeting {
        slope: f64,
        contacts: usize,
        spacing: Option<f64>,
    },
    ClosedUnduloidType {
        period: f64,
        dz: f64,
    },
    NodoidType {
        period: f64,
        dz: f64,
        switches_per_period: usize,
    },
    TubeClosedProfile {
        period: f64,
    },
    EscapeUnbounded {
        x_exit: f64,
    },
    AsymptoteToLine {
        t0: f64,
        deviation: f64,
    },
    AsymptoteToYZeroAxis {
        deviation: f64,
        x_end: f64,
    },
}

impl OrbitClass {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitClass::Equilibrium { .. } => "Equilibrium",
            OrbitClass::AxisMeeting { .. } => "AxisMeeting",
            OrbitClass::ClosedUnduloidType { .. } => "ClosedUnduloidType",
            OrbitClass::NodoidType { .. } => "NodoidType",
            OrbitClass::TubeClosedProfile { .. } => "TubeClosedProfile",
            OrbitClass::EscapeUnbounded { .. } => "EscapeUnbounded",
            OrbitClass::AsymptoteToLine { .. } => "AsymptoteToLine",
            OrbitClass::AsymptoteToYZeroAxis { .. } => "AsymptoteToYZeroAxis",
        }
    }
}

/// Trailing samples of the `x > 0` part, by arclength.
fn trailing(orbit: &Orbit, fraction: f64) -> Vec<(f64, f64)> {
    let pos: Vec<_> = orbit.samples.iter().filter(|s| s.x > 0.0).collect();
    if pos.len() < 2 {
        return Vec::new();
    }
    let (s0, s1) = (pos[0].s, pos[pos.len() - 1].s);
    let cut = s1 - fraction * (s1 - s0);
    pos.iter().filter(|st| st.s >= cut).map(|st| (st.x, st.y())).collect()
}

fn asymptote(orbit: &Orbit, m: &PhaseModel, o: &ClassifyOptions) -> Option<OrbitClass> {
    let tail = trailing(orbit, o.trailing_fraction);
    if tail.len() < 2 {
        return None;
    }
    let max_abs = |t0: f64| tail.iter().map(|&(_, y)| (y - t0).abs()).fold(0.0, f64::max);
    let growing = tail.last().unwrap().0 > tail[0].0;
    let dev0 = max_abs(0.0);
    if dev0 < o.asymptote_tol && growing {
        return Some(OrbitClass::AsymptoteToYZeroAxis {
            deviation: dev0,
            x_end: tail.last().unwrap().0,
        });
    }
    profile_of(&m.h)
        .zeros
        .iter()
        .map(|&t0| (t0, max_abs(t0)))
        .filter(|&(_, d)| d < o.asymptote_tol)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t0, deviation)| OrbitClass::AsymptoteToLine { t0, deviation })
}

/// Labels an integrated orbit. `m` supplies `h(0)` and the equilibrium.
pub fn classify(orbit: &Orbit, m: &PhaseModel, o: &ClassifyOptions) -> Result<OrbitClass, OrbitError> {
    let first = orbit.samples[0];

    if let Some(eps) = first.eps() {
        let h0 = m.h.eval(0.0);
        if eps * h0 > 0.0 {
            let x0 = 1.0 / (2.0 * eps * h0);
            let dev = orbit.samples.iter().map(|s| (s.x - x0).abs()).fold(0.0, f64::max);
            if dev < o.equilibrium_tol {
                return Ok(OrbitClass::Equilibrium { radius: x0 });
            }
        }
    }

    let contacts = orbit.axis_contacts();
    if !contacts.is_empty() {
        let slope = contacts[0].y().abs();
        let spacing = (contacts.len() >= 2).then(|| contacts[1].s - contacts[0].s);
        let meeting = OrbitClass::AxisMeeting {
            slope,
            contacts: contacts.len(),
            spacing,
        };
        if contacts.len() >= 2 {
            return Ok(meeting);
        }
        return Ok(asymptote(orbit, m, o).unwrap_or(meeting));
    }

    if let Some(ret) = orbit.events_of(EventKind::PoincareReturn).next() {
        let reference = if first.y().abs() < 1e-12 {
            first
        } else {
            orbit
                .events_of(EventKind::YZeroCrossing)
                .next()
                .map(|e| e.state)
                .unwrap_or(first)
        };
        let dx = (ret.state.x - reference.x).abs();
        if dx < o.closure_tol {
            let period = ret.s - reference.s;
            let dz = ret.state.z - reference.z;
            let switches = orbit
                .events_of(EventKind::EpsilonSwitch)
                .filter(|e| e.s > reference.s && e.s <= ret.s)
                .count();
            if switches >= 1 {
                if dz.abs() < o.closure_tol {
                    return Ok(OrbitClass::TubeClosedProfile { period });
                }
                return Ok(OrbitClass::NodoidType {
                    period,
                    dz,
                    switches_per_period: switches,
                });
            }
            let monotone = orbit
                .samples
                .windows(2)
                .filter(|w| w[0].s >= reference.s && w[1].s <= ret.s)
                .all(|w| (w[1].z - w[0].z) * dz.signum() > 0.0);
            if monotone {
                return Ok(OrbitClass::ClosedUnduloidType { period, dz });
            }
        }
    }

    if let Some(a) = asymptote(orbit, m, o) {
        return Ok(a);
    }
    if orbit.stop == OrbitStop::WindowExit {
        return Ok(OrbitClass::EscapeUnbounded {
            x_exit: orbit.last().x.abs(),
        });
    }
    let last = orbit.last();
    Err(OrbitError::Inconclusive(format!(
        "{} samples over s in [{}, {}], {} events, last (x, y) = ({}, {})",
        orbit.samples.len(),
        first.s,
        last.s,
        orbit.events.len(),
        last.x,
        last.y()
    )))
}
