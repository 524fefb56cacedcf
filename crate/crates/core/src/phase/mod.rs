//! The phase plane `(x, y = x')` of one orientation `eps = sign(z')`.

mod nullcline;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::prescription::{profile_of, HFunction};

pub use nullcline::{trace_nullcline, EndpointKind, NullclineComponent, NullclineCurve, NullclineEnd};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("pitch c0 must be finite and non-zero, got {0}")]
    InvalidPitch(f64),
    #[error("point ({x}, {y}) is outside the open strip x > 0, |y| < 1")]
    Domain { x: f64, y: f64 },
    #[error("(u, v) = ({u}, {v}) is outside the image of the strip")]
    OutsideImage { u: f64, v: f64 },
    #[error("no equilibrium: eps*h(0) = {0} is not positive")]
    NoEquilibrium(f64),
    #[error("the nullcline is empty in the window")]
    EmptyNullcline,
    #[error("point ({x}, {y}) lies on a nullcline")]
    OnNullcline { x: f64, y: f64 },
    #[error("invalid window: x_max = {x_max}, grid = {grid} (need x_max > 0, grid >= 64)")]
    InvalidWindow { x_max: f64, grid: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Plus,
    Minus,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Plus => 1.0,
            Orientation::Minus => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Option<Self> {
        if s == 1.0 {
            Some(Orientation::Plus)
        } else if s == -1.0 {
            Some(Orientation::Minus)
        } else {
            None
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Orientation::Plus => Orientation::Minus,
            Orientation::Minus => Orientation::Plus,
        }
    }
}

/// A point of the open strip `x > 0, |y| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64) -> Result<Self, PhaseError> {
        if x > 0.0 && y.abs() < 1.0 && x.is_finite() {
            Ok(PhasePoint { x, y })
        } else {
            Err(PhaseError::Domain { x, y })
        }
    }
}

/// A point on the closure of the strip, such as `p_eps` on `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
}

impl BoundaryPoint {
    pub fn dist(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

/// The constant-angle curve `nu = t0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Beta0 {
    pub t0: f64,
    /// Horizontal asymptote `y = t0`.
    pub asymptote: f64,
    /// Where the curve meets `|y| = 1`; `None` for `t0 = 0`.
    pub boundary: Option<BoundaryPoint>,
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub equilibrium: PhasePoint,
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
    pub fd_jacobian: [[f64; 2]; 2],
    pub fd_max_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseModel {
    pub h: HFunction,
    pub c0: f64,
    pub eps: Orientation,
}

/// `nu = x y / sqrt(c0^2 y^2 + x^2)`, zero at the origin.
pub fn nu(c0: f64, x: f64, y: f64) -> f64 {
    let d = (c0 * c0 * y * y + x * x).sqrt();
    if d == 0.0 {
        0.0
    } else {
        x * y / d
    }
}

impl PhaseModel {
    pub fn new(h: HFunction, c0: f64, eps: Orientation) -> Result<Self, PhaseError> {
        if c0 == 0.0 || !c0.is_finite() {
            return Err(PhaseError::InvalidPitch(c0));
        }
        Ok(PhaseModel { h, c0, eps })
    }

    pub fn with_eps(&self, eps: Orientation) -> Self {
        PhaseModel { eps, ..self.clone() }
    }

    fn e(&self) -> f64 {
        self.eps.sign()
    }

    pub fn nu(&self, x: f64, y: f64) -> f64 {
        nu(self.c0, x, y)
    }

    /// `(dx/ds, dy/ds)`.
    pub fn vector_field(&self, p: PhasePoint) -> Result<(f64, f64), PhaseError> {
        let (x, y) = (p.x, p.y);
        if !(x > 0.0 && y.abs() < 1.0) {
            return Err(PhaseError::Domain { x, y });
        }
        let c2 = self.c0 * self.c0;
        let q = c2 * y * y + x * x;
        let w = 1.0 - y * y;
        let num =
            w * (x * x + 2.0 * c2 * y * y) - 2.0 * self.e() * self.h.eval(self.nu(x, y)) * w.sqrt() * q * q.sqrt();
        Ok((y, num / (x * x * x + c2 * x)))
    }

    /// `F_eps(x, y)`, whose zero set is the nullcline. Defined on the closure.
    pub fn f_eps(&self, x: f64, y: f64) -> f64 {
        let c2 = self.c0 * self.c0;
        let q = x * x + c2 * y * y;
        let w = (1.0 - y * y).max(0.0);
        2.0 * self.e() * self.h.eval(self.nu(x, y)) * q * q.sqrt() - (x * x + 2.0 * c2 * y * y) * w.sqrt()
    }

    /// `f_eps(x, y)`; the nullcline of a constant `h = H0` is the level set `f_1 = H0`.
    pub fn f_eps_level(&self, x: f64, y: f64) -> f64 {
        let c2 = self.c0 * self.c0;
        let q = x * x + c2 * y * y;
        let w = (1.0 - y * y).max(0.0);
        self.e() * (x * x + 2.0 * c2 * y * y) * w.sqrt() / (2.0 * q * q.sqrt())
    }

    /// `F2(u, v) = 2 eps h(v) u^2 - (u + c0^2 v^2) sqrt(u (1 - v^2) - c0^2 v^2)`
    /// and its gradient, in the coordinates `u = x^2`, `v = nu`.
    pub fn f2_and_gradient(&self, u: f64, v: f64) -> Result<(f64, [f64; 2]), PhaseError> {
        let c2 = self.c0 * self.c0;
        let r = u * (1.0 - v * v) - c2 * v * v;
        if !(u > 0.0 && r > 0.0) {
            return Err(PhaseError::OutsideImage { u, v });
        }
        let sr = r.sqrt();
        let (h, dh) = self.h.eval_with_deriv(v);
        let eh = self.e() * h;
        let value = 2.0 * eh * u * u - (u + c2 * v * v) * sr;
        let du = (c2 * v * v * (v * v + 1.0) + 3.0 * u * (v * v - 1.0) + 8.0 * eh * u * sr) / (2.0 * sr);
        let dv = v * (u * u + 3.0 * c2 * c2 * v * v + c2 * u * (3.0 * v * v - 1.0)) / sr + 2.0 * self.e() * u * u * dh;
        Ok((value, [du, dv]))
    }

    /// `e0 = (1 / (2 eps h(0)), 0)` when `eps h(0) > 0`.
    pub fn equilibrium(&self) -> Option<PhasePoint> {
        let eh0 = self.e() * self.h.eval(0.0);
        (eh0 > 0.0).then(|| PhasePoint {
            x: 1.0 / (2.0 * eh0),
            y: 0.0,
        })
    }

    /// `(p_eps, -p_eps)` with `p_eps = (0, 1/sqrt(1 + c0^2 h(0)^2))`, when `eps h(0) >= 0`.
    pub fn axis_points(&self) -> Option<(BoundaryPoint, BoundaryPoint)> {
        let h0 = self.h.eval(0.0);
        if self.e() * h0 < 0.0 {
            return None;
        }
        let y = 1.0 / (1.0 + self.c0 * self.c0 * h0 * h0).sqrt();
        Some((BoundaryPoint { x: 0.0, y }, BoundaryPoint { x: 0.0, y: -y }))
    }

    /// Samples `beta0` for `x` in `(x_start, x_max]`.
    pub fn beta0(&self, t0: f64, x_max: f64, samples: usize) -> Beta0 {
        let c = self.c0.abs();
        let boundary = (t0 != 0.0).then(|| BoundaryPoint {
            x: c * t0.abs() / (1.0 - t0 * t0).sqrt(),
            y: t0.signum(),
        });
        let x_start = boundary.map_or(0.0, |b| b.x);
        let n = samples.max(2);
        let mut pts = Vec::with_capacity(n);
        for k in 1..=n {
            // cluster samples near the boundary point, where the curve is steep
            let s = k as f64 / n as f64;
            let x = x_start + (x_max - x_start) * s * s;
            if x <= x_start {
                continue;
            }
            let y = t0 * x / (x * x - c * c * t0 * t0).sqrt();
            if y.abs() < 1.0 {
                pts.push((x, y));
            }
        }
        Beta0 {
            t0,
            asymptote: t0,
            boundary,
            samples: pts,
        }
    }

    /// Jacobian at `e0`, its eigenvalues, and a central-difference check.
    pub fn linearize_at_equilibrium(&self) -> Result<Linearization, PhaseError> {
        let e0 = self
            .equilibrium()
            .ok_or(PhaseError::NoEquilibrium(self.e() * self.h.eval(0.0)))?;
        let h0 = self.h.eval(0.0);
        let dh0 = self.h.deriv(0.0);
        let c2 = self.c0 * self.c0;
        let x0 = e0.x;
        let a = -4.0 * h0 * h0 / (1.0 + 4.0 * c2 * h0 * h0);
        let b = -2.0 * self.e() * dh0 * x0 * x0 / (x0 * x0 + c2);
        let jacobian = [[0.0, 1.0], [a, b]];

        let disc = Complex64::new(b * b + 4.0 * a, 0.0).sqrt();
        let eigenvalues = [(b + disc) / 2.0, (b - disc) / 2.0];

        let step = 1e-6;
        let field = |x: f64, y: f64| {
            let (dx, dy) = self.vector_field(PhasePoint { x, y })?;
            Ok::<_, PhaseError>([dx, dy])
        };
        let fx_plus = field(x0 + step, 0.0)?;
        let fx_minus = field(x0 - step, 0.0)?;
        let fy_plus = field(x0, step)?;
        let fy_minus = field(x0, -step)?;
        let mut fd = [[0.0; 2]; 2];
        let mut fd_max_diff: f64 = 0.0;
        for r in 0..2 {
            fd[r][0] = (fx_plus[r] - fx_minus[r]) / (2.0 * step);
            fd[r][1] = (fy_plus[r] - fy_minus[r]) / (2.0 * step);
            for c in 0..2 {
                fd_max_diff = fd_max_diff.max((fd[r][c] - jacobian[r][c]).abs());
            }
        }
        Ok(Linearization {
            equilibrium: e0,
            jacobian,
            eigenvalues,
            fd_jacobian: fd,
            fd_max_diff,
        })
    }

    /// Strict signs of `(dx/ds, dy/ds)` off the nullclines.
    pub fn monotonicity_region(&self, p: PhasePoint) -> Result<(i8, i8), PhaseError> {
        let f = self.f_eps(p.x, p.y);
        if f.abs() <= 1e-10 || p.y.abs() <= 1e-10 {
            return Err(PhaseError::OnNullcline { x: p.x, y: p.y });
        }
        self.vector_field(p)?;
        // dy/ds = -sqrt(1 - y^2) F_eps / (x^3 + c0^2 x)
        let sy = if f < 0.0 { 1 } else { -1 };
        let sx = if p.y > 0.0 { 1 } else { -1 };
        Ok((sx, sy))
    }

    /// Zeros `t0` of `h` that carry a `beta0` curve.
    pub fn h_zeros(&self) -> Vec<f64> {
        profile_of(&self.h).zeros
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prescription::parse_h;

    fn model(h: &str, c0: f64, eps: Orientation) -> PhaseModel {
        PhaseModel::new(parse_h(h).unwrap(), c0, eps).unwrap()
    }

    #[test]
    fn zero_pitch_rejected() {
        let h = parse_h("1").unwrap();
        assert_eq!(
            PhaseModel::new(h, 0.0, Orientation::Plus),
            Err(PhaseError::InvalidPitch(0.0))
        );
    }

    #[test]
    fn field_outside_strip() {
        let m = model("1", 1.0, Orientation::Plus);
        assert!(m.vector_field(PhasePoint { x: 0.0, y: 0.2 }).is_err());
        assert!(m.vector_field(PhasePoint { x: 1.0, y: 1.0 }).is_err());
    }

    #[test]
    fn dy_sign_follows_f() {
        let m = model("t^2+1", 1.3, Orientation::Minus);
        for &(x, y) in &[(0.3, 0.4), (1.2, -0.7), (2.0, 0.1)] {
            let (_, dy) = m.vector_field(PhasePoint { x, y }).unwrap();
            let (_, sy) = m.monotonicity_region(PhasePoint { x, y }).unwrap();
            assert_eq!(dy.signum() as i8, sy);
        }
    }

    #[test]
    fn beta0_negative_zero() {
        let m = model("t+0.5", 1.0, Orientation::Plus);
        let b = m.beta0(-0.5, 5.0, 200);
        let p = b.boundary.unwrap();
        assert!((p.x - 3f64.sqrt() / 3.0).abs() < 1e-15);
        assert_eq!(p.y, -1.0);
        for &(x, y) in &b.samples {
            assert!((m.nu(x, y) + 0.5).abs() < 1e-12);
        }
    }
}
