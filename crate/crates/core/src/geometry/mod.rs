//! Profile curves, the immersion `Psi(s, theta) = (x cos theta, x sin theta, z + c0 theta)`,
//! its Gauss map and mean curvature.

mod mesh;
mod profile;
mod taxonomy;

use thiserror::Error;

pub use mesh::{build_mesh, glue_check, BoundaryHelix, GlueReport, GlueSwitch, HelicoidMesh};
pub use profile::{build_profile, ProfileCurve, ProfileSample};
pub use taxonomy::{surface_taxonomy, SurfaceLabel, TaxonomyReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate jet: x = {x}, x' = {xp}")]
    DegenerateJet { x: f64, xp: f64 },
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),
    #[error("orbit has no epsilon switch to check")]
    NoSwitch,
    #[error("normals disagree by {mismatch} at s = {s}")]
    NormalMismatch { s: f64, mismatch: f64 },
    #[error("unclassified: {0}")]
    Unclassified(String),
}

/// Second-order jet of an arclength profile at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub x: f64,
    pub xp: f64,
    pub zp: f64,
    pub xpp: f64,
    pub zpp: f64,
}

impl Jet {
    /// Jet of the state `(x, phi)` with curvature `kappa = phi'`.
    pub fn from_angle(x: f64, phi: f64, kappa: f64) -> Jet {
        let (sn, cs) = phi.sin_cos();
        Jet {
            x,
            xp: cs,
            zp: sn,
            xpp: -sn * kappa,
            zpp: cs * kappa,
        }
    }

    fn check(&self, c0: f64) -> Result<f64, GeometryError> {
        let d2 = c0 * c0 * self.xp * self.xp + self.x * self.x;
        if d2 > 0.0 && d2.is_finite() {
            Ok(d2)
        } else {
            Err(GeometryError::DegenerateJet { x: self.x, xp: self.xp })
        }
    }
}

type V3 = [f64; 3];

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

/// `Psi(s, theta)`.
pub fn immersion(c0: f64, x: f64, z: f64, theta: f64) -> V3 {
    let (st, ct) = theta.sin_cos();
    [x * ct, x * st, z + c0 * theta]
}

/// `eta = (c0 sin t x' - cos t z' x, -sin t x z' - c0 cos t x', x x') / sqrt(c0^2 x'^2 + x^2)`.
pub fn gauss_map(c0: f64, x: f64, xp: f64, zp: f64, theta: f64) -> Result<V3, GeometryError> {
    let d2 = c0 * c0 * xp * xp + x * x;
    if !(d2 > 0.0) {
        return Err(GeometryError::DegenerateJet { x, xp });
    }
    let d = d2.sqrt();
    let (st, ct) = theta.sin_cos();
    Ok([
        (c0 * st * xp - ct * zp * x) / d,
        (-st * x * zp - c0 * ct * xp) / d,
        x * xp / d,
    ])
}

/// Angle function `nu = <eta, e3> = x x' / sqrt(c0^2 x'^2 + x^2)`.
pub fn angle_function(c0: f64, x: f64, xp: f64) -> f64 {
    crate::phase::nu(c0, x, xp)
}

/// Closed-form mean curvature
/// `H = [(x'z'' - z'x'')(x^3 + c0^2 x) + z'(2 c0^2 x'^2 + x^2)] / (2 (c0^2 x'^2 + x^2)^{3/2})`.
pub fn mean_curvature(c0: f64, j: &Jet) -> Result<f64, GeometryError> {
    let d2 = j.check(c0)?;
    let k = j.xp * j.zpp - j.zp * j.xpp;
    let c2 = c0 * c0;
    Ok((k * (j.x * j.x * j.x + c2 * j.x) + j.zp * (2.0 * c2 * j.xp * j.xp + j.x * j.x)) / (2.0 * d2 * d2.sqrt()))
}

pub(crate) fn mean_curvature_closed(c0: f64, x: f64, phi: f64, kappa: f64) -> f64 {
    mean_curvature(c0, &Jet::from_angle(x, phi, kappa)).unwrap_or(f64::NAN)
}

/// Mean curvature from the fundamental forms of `Psi` at angle `theta`,
/// `H = (eG - 2fF + gE) / (2 (EG - F^2))`.
pub fn mean_curvature_fundamental(c0: f64, j: &Jet, theta: f64) -> Result<f64, GeometryError> {
    j.check(c0)?;
    let (st, ct) = theta.sin_cos();
    let ps = [j.xp * ct, j.xp * st, j.zp];
    let pt = [-j.x * st, j.x * ct, c0];
    let pss = [j.xpp * ct, j.xpp * st, j.zpp];
    let pst = [-j.xp * st, j.xp * ct, 0.0];
    let ptt = [-j.x * ct, -j.x * st, 0.0];
    let n = cross(ps, pt);
    let nn = norm(n);
    let eta = [n[0] / nn, n[1] / nn, n[2] / nn];
    let (e_, f_, g_) = (dot(ps, ps), dot(ps, pt), dot(pt, pt));
    let (e, f, g) = (dot(pss, eta), dot(pst, eta), dot(ptt, eta));
    let det = e_ * g_ - f_ * f_;
    if !(det > 0.0) {
        return Err(GeometryError::DegenerateJet { x: j.x, xp: j.xp });
    }
    Ok((e * g_ - 2.0 * f * f_ + g * e_) / (2.0 * det))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_curvature() {
        let j = Jet::from_angle(2.0, std::f64::consts::FRAC_PI_2, 0.0);
        assert!((mean_curvature(1.3, &j).unwrap() - 0.25).abs() < 1e-15);
        assert!((mean_curvature_fundamental(1.3, &j, 0.7).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn axis_normal() {
        for &(c0, xp) in &[(1.0, 1.0), (-2.0, 1.0), (0.5, -1.0)] {
            let eta = gauss_map(c0, 0.0, xp, 0.0, 0.0).unwrap();
            let expect = [0.0, -c0.signum() * xp, 0.0];
            for k in 0..3 {
                assert!((eta[k] - expect[k]).abs() < 1e-15);
            }
        }
        assert!(gauss_map(1.0, 0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn axis_limit_of_curvature() {
        // at x = 0 the formula reduces to z' / (|c0| |x'|)
        let j = Jet::from_angle(0.0, 0.9, 5.0);
        let h = mean_curvature(2.0, &j).unwrap();
        assert!((h - 0.9f64.sin() / (2.0 * 0.9f64.cos())).abs() < 1e-14);
    }
}
