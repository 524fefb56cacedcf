use std::collections::HashMap;

use serde::Serialize;

use super::{GeometryError, Jet};
use crate::orbit::{CurveState, EventKind, Orbit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub s: f64,
    pub x: f64,
    pub z: f64,
    pub phi: f64,
    pub kappa: f64,
}

impl ProfileSample {
    pub fn jet(&self) -> Jet {
        Jet::from_angle(self.x, self.phi, self.kappa)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileCurve {
    pub c0: f64,
    pub samples: Vec<ProfileSample>,
    /// States where `z' = 0`, i.e. `|x'| = 1`.
    pub switches: Vec<CurveState>,
    /// Pairs of crossing segment indices with the crossing point `(x, z)`.
    pub self_intersections: Vec<(usize, usize, [f64; 2])>,
}

impl ProfileCurve {
    pub fn is_embedded(&self) -> bool {
        self.self_intersections.is_empty()
    }

    pub fn z_strictly_monotone(&self) -> bool {
        let d: Vec<f64> = self.samples.windows(2).map(|w| w[1].z - w[0].z).collect();
        d.iter().all(|&v| v > 0.0) || d.iter().all(|&v| v < 0.0)
    }

    /// Largest `|x'^2 + z'^2 - 1|` and largest `|z'' + eps x' x'' / sqrt(1 - x'^2)|`
    /// over samples with `|z'| > 1e-6`.
    pub fn jet_identity_errors(&self) -> (f64, f64) {
        let mut unit: f64 = 0.0;
        let mut second: f64 = 0.0;
        for p in &self.samples {
            let j = p.jet();
            unit = unit.max((j.xp * j.xp + j.zp * j.zp - 1.0).abs());
            if j.zp.abs() > 1e-6 {
                let eps = j.zp.signum();
                let rhs = -eps * j.xp * j.xpp / (1.0 - j.xp * j.xp).sqrt();
                second = second.max((j.zpp - rhs).abs());
            }
        }
        (unit, second)
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Proper crossing of segments `ab` and `cd`, with orientation tolerance `1e-12`.
fn crossing(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Option<[f64; 2]> {
    const TOL: f64 = 1e-12;
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    let strict = |p: f64, q: f64| (p > TOL && q < -TOL) || (p < -TOL && q > TOL);
    if strict(o1, o2) && strict(o3, o4) {
        let t = o3 / (o3 - o4);
        Some([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
    } else {
        None
    }
}

/// Crossings of non-adjacent segments of a polyline, via uniform-grid buckets.
pub(crate) fn self_intersections(pts: &[[f64; 2]]) -> Vec<(usize, usize, [f64; 2])> {
    let n = pts.len();
    if n < 4 {
        return Vec::new();
    }
    let mut lens: Vec<f64> = pts
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .collect();
    lens.sort_by(f64::total_cmp);
    let cell = (4.0 * lens[lens.len() / 2]).max(1e-9);
    let key = |v: f64| (v / cell).floor() as i64;
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n - 1 {
        let (a, b) = (pts[i], pts[i + 1]);
        for gx in key(a[0].min(b[0]))..=key(a[0].max(b[0])) {
            for gz in key(a[1].min(b[1]))..=key(a[1].max(b[1])) {
                buckets.entry((gx, gz)).or_default().push(i);
            }
        }
    }
    let mut found = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut keys: Vec<_> = buckets.keys().copied().collect();
    keys.sort();
    for k in keys {
        let segs = &buckets[&k];
        for (u, &i) in segs.iter().enumerate() {
            for &j in &segs[u + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if j <= i + 1 || !seen.insert((i, j)) {
                    continue;
                }
                if let Some(p) = crossing(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                    found.push((i, j, p));
                }
            }
        }
    }
    found.sort_by_key(|a| (a.0, a.1));
    found
}

/// Reads the profile `(s, x, z)` and its jet off an integrated orbit.
pub fn build_profile(orbit: &Orbit) -> Result<ProfileCurve, GeometryError> {
    if orbit.samples.len() < 2 {
        return Err(GeometryError::DegenerateProfile(format!(
            "{} samples",
            orbit.samples.len()
        )));
    }
    let kappas = orbit.kappas();
    let samples: Vec<ProfileSample> = orbit
        .samples
        .iter()
        .zip(kappas)
        .map(|(st, kappa)| ProfileSample {
            s: st.s,
            x: st.x,
            z: st.z,
            phi: st.phi,
            kappa,
        })
        .collect();
    let pts: Vec<[f64; 2]> = samples.iter().map(|p| [p.x, p.z]).collect();
    Ok(ProfileCurve {
        c0: orbit.c0,
        switches: orbit.events_of(EventKind::EpsilonSwitch).map(|e| e.state).collect(),
        self_intersections: self_intersections(&pts),
        samples,
    })
}
