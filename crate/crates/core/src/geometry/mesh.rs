use serde::Serialize;

use super::{cross, dot, gauss_map, immersion, mean_curvature_fundamental, norm, GeometryError, ProfileCurve, V3};
use crate::ode::{self, SolverOptions};
use crate::orbit::{kappa, CurveState, EventKind, Orbit};
use crate::prescription::HFunction;

/// `gamma(t) = (x0 cos t, x0 sin t, a + c0 t)`, where the profile meets `|x'| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryHelix {
    pub s: f64,
    pub x0: f64,
    pub a: f64,
    pub c0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HelicoidMesh {
    pub c0: f64,
    pub rows: usize,
    pub n_theta: usize,
    pub theta_range: (f64, f64),
    /// Row-major: vertex `r * n_theta + k` sits at profile row `r`, angle `k`.
    pub vertices: Vec<V3>,
    pub normals: Vec<V3>,
    pub nu: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    pub residual: Vec<f64>,
    /// Profile parameter of each row.
    pub row_s: Vec<f64>,
    pub triangles: Vec<[u32; 3]>,
    pub boundary_helices: Vec<BoundaryHelix>,
    pub self_intersecting: bool,
}

impl HelicoidMesh {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }

    pub fn theta(&self, k: usize) -> f64 {
        let (a, b) = self.theta_range;
        a + (b - a) * k as f64 / (self.n_theta - 1) as f64
    }

    /// Largest spread of `H` along a row.
    pub fn theta_spread(&self) -> f64 {
        self.mean_curvature
            .chunks(self.n_theta)
            .map(|row| {
                let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

/// Samples `Psi` on the profile rows (decimated to at most `max_rows`) times
/// `n_theta` angles, with per-vertex normal, `nu`, `H` and `|H - h(nu)|`.
pub fn build_mesh(
    profile: &ProfileCurve,
    h: &HFunction,
    theta_range: (f64, f64),
    n_theta: usize,
    max_rows: usize,
) -> Result<HelicoidMesh, GeometryError> {
    if n_theta < 8 {
        return Err(GeometryError::DegenerateProfile(format!("n_theta = {n_theta} < 8")));
    }
    if profile.samples.len() < 2 || !(theta_range.1 > theta_range.0) {
        return Err(GeometryError::DegenerateProfile(
            "fewer than two rows or empty angle range".into(),
        ));
    }
    let c0 = profile.c0;
    let n = profile.samples.len();
    let rows_wanted = max_rows.max(2).min(n);
    let mut idx: Vec<usize> = (0..rows_wanted)
        .map(|r| ((r as f64) * (n - 1) as f64 / (rows_wanted - 1) as f64).round() as usize)
        .collect();
    idx.dedup();

    let mut mesh = HelicoidMesh {
        c0,
        rows: idx.len(),
        n_theta,
        theta_range,
        vertices: Vec::with_capacity(idx.len() * n_theta),
        normals: Vec::new(),
        nu: Vec::new(),
        mean_curvature: Vec::new(),
        residual: Vec::new(),
        row_s: Vec::new(),
        triangles: Vec::new(),
        boundary_helices: profile
            .switches
            .iter()
            .map(|st| BoundaryHelix {
                s: st.s,
                x0: st.x,
                a: st.z,
                c0,
            })
            .collect(),
        self_intersecting: !profile.is_embedded(),
    };
    for &i in &idx {
        let p = profile.samples[i];
        let j = p.jet();
        mesh.row_s.push(p.s);
        for k in 0..n_theta {
            let theta = mesh.theta(k);
            let eta = gauss_map(c0, j.x, j.xp, j.zp, theta)?;
            let hh = mean_curvature_fundamental(c0, &j, theta)?;
            mesh.vertices.push(immersion(c0, p.x, p.z, theta));
            mesh.normals.push(eta);
            mesh.nu.push(eta[2]);
            mesh.mean_curvature.push(hh);
            mesh.residual.push((hh - h.eval(eta[2])).abs());
        }
    }
    let nt = n_theta as u32;
    for r in 0..mesh.rows as u32 - 1 {
        for k in 0..nt - 1 {
            let a = r * nt + k;
            let b = a + 1;
            let c = a + nt;
            let d = c + 1;
            for tri in [[a, c, b], [b, c, d]] {
                mesh.triangles.push(oriented(&mesh, tri));
            }
        }
    }
    Ok(mesh)
}

/// Winds a triangle so its face normal lies in the hemisphere of the vertex normals.
fn oriented(mesh: &HelicoidMesh, t: [u32; 3]) -> [u32; 3] {
    let v = |i: u32| mesh.vertices[i as usize];
    let e1 = sub(v(t[1]), v(t[0]));
    let e2 = sub(v(t[2]), v(t[0]));
    let face = cross(e1, e2);
    let mut avg = [0.0; 3];
    for &i in &t {
        let nrm = mesh.normals[i as usize];
        for k in 0..3 {
            avg[k] += nrm[k];
        }
    }
    if dot(face, avg) < 0.0 {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlueSwitch {
    pub s: f64,
    /// Radius of the boundary helix.
    pub x0: f64,
    pub sin_phi: f64,
    /// Normal at `theta = 0` from the left and right one-sided jets.
    pub left: V3,
    pub right: V3,
    /// `x' (c0 sin t, -c0 cos t, x0) / sqrt(c0^2 + x0^2)` at `t = 0`.
    pub boundary_normal: V3,
    pub mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlueReport {
    pub switches: Vec<GlueSwitch>,
    pub max_mismatch: f64,
}

/// Propagates a sample to the switch arclength with a tight local integration.
fn one_sided(h: &HFunction, c0: f64, from: &CurveState, s_to: f64) -> CurveState {
    let f = |_s: f64, v: &[f64; 3]| {
        let (sn, cs) = v[2].sin_cos();
        [cs, sn, kappa(h, c0, v[0], v[2])]
    };
    let opts = SolverOptions {
        rtol: 1e-13,
        atol: 1e-13,
        max_step: 1e-2,
        initial_step: 1e-5,
        ..SolverOptions::default()
    };
    let tr = ode::solve(f, from.s, [from.x, from.z, from.phi], s_to, &opts, &[]);
    let (s, v) = tr.last();
    CurveState {
        s,
        x: v[0],
        z: v[1],
        phi: v[2],
    }
}

/// Checks that the normals of the two sides agree at every `z' = 0` switch.
pub fn glue_check(orbit: &Orbit) -> Result<GlueReport, GeometryError> {
    let switches: Vec<_> = orbit.events_of(EventKind::EpsilonSwitch).copied().collect();
    if switches.is_empty() {
        return Err(GeometryError::NoSwitch);
    }
    let c0 = orbit.c0;
    let mut out = Vec::new();
    let mut max_mismatch: f64 = 0.0;
    for ev in switches {
        let before = orbit.samples.iter().rev().find(|st| st.s < ev.s - 1e-9);
        let after = orbit.samples.iter().find(|st| st.s > ev.s + 1e-9);
        let (Some(b), Some(a)) = (before, after) else {
            continue;
        };
        let l = one_sided(&orbit.h, c0, b, ev.s);
        let r = one_sided(&orbit.h, c0, a, ev.s);
        let nl = gauss_map(c0, l.x, l.phi.cos(), l.phi.sin(), 0.0)?;
        let nr = gauss_map(c0, r.x, r.phi.cos(), r.phi.sin(), 0.0)?;
        let x0 = ev.state.x;
        let xp = ev.state.phi.cos().signum();
        let d = (c0 * c0 + x0 * x0).sqrt();
        let boundary_normal = [0.0, -xp * c0 / d, xp * x0 / d];
        let mismatch = norm(sub(nl, nr)).max(norm(sub(nl, boundary_normal)));
        if !(mismatch < 1e-8) {
            return Err(GeometryError::NormalMismatch { s: ev.s, mismatch });
        }
        max_mismatch = max_mismatch.max(mismatch);
        out.push(GlueSwitch {
            s: ev.s,
            x0,
            sin_phi: ev.state.phi.sin(),
            left: nl,
            right: nr,
            boundary_normal,
            mismatch,
        });
    }
    if out.is_empty() {
        return Err(GeometryError::NoSwitch);
    }
    Ok(GlueReport {
        switches: out,
        max_mismatch,
    })
}
