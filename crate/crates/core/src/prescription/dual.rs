use std::ops::{Add, Div, Mul, Neg, Sub};

/// First-order dual number `re + du·ε` with `ε² = 0`.
///
/// Evaluating an expression at `Dual::variable(t)` yields the value in `re`
/// and the exact derivative in `du`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub du: f64,
}

impl Dual {
    pub const fn new(re: f64, du: f64) -> Self {
        Dual { re, du }
    }

    pub const fn constant(re: f64) -> Self {
        Dual { re, du: 0.0 }
    }

    pub const fn variable(re: f64) -> Self {
        Dual { re, du: 1.0 }
    }

    pub fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.du * self.re.cos())
    }

    pub fn cos(self) -> Self {
        Dual::new(self.re.cos(), -self.du * self.re.sin())
    }

    pub fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.du * e)
    }

    pub fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual::new(r, self.du / (2.0 * r))
    }

    pub fn ln(self) -> Self {
        // ln of a non-positive value is NaN or -inf; the domain check rejects it.
        let v = if self.re > 0.0 { self.re.ln() } else { f64::NAN };
        Dual::new(v, self.du / self.re)
    }

    /// `self ^ rhs`.
    ///
    /// A constant integer exponent goes through `powi` so negative bases work
    /// (`(t-0.6)^2` at `t < 0.6`). Otherwise `a^b = exp(b ln a)`.
    pub fn pow(self, rhs: Dual) -> Self {
        let (a, b) = (self, rhs);
        if b.du == 0.0 && b.re.fract() == 0.0 && b.re.abs() <= i32::MAX as f64 {
            let n = b.re as i32;
            let value = a.re.powi(n);
            let du = if n == 0 {
                0.0
            } else {
                f64::from(n) * a.re.powi(n - 1) * a.du
            };
            return Dual::new(value, du);
        }
        if b.du == 0.0 {
            let value = a.re.powf(b.re);
            return Dual::new(value, b.re * a.re.powf(b.re - 1.0) * a.du);
        }
        let value = a.re.powf(b.re);
        let du = value * (b.du * a.re.ln() + b.re * a.du / a.re);
        Dual::new(value, du)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.du.is_finite()
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.re + o.re, self.du + o.du)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.re - o.re, self.du - o.du)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.re * o.re, self.re * o.du + self.du * o.re)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.re / o.re, (self.du * o.re - self.re * o.du) / (o.re * o.re))
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.du)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let t = Dual::variable(2.0);
        let p = t * t * t;
        assert_eq!(p, Dual::new(8.0, 12.0));
        let q = Dual::constant(1.0) / t;
        assert_eq!(q, Dual::new(0.5, -0.25));
    }

    #[test]
    fn integer_power_of_negative_base() {
        let t = Dual::variable(-0.5);
        let p = t.pow(Dual::constant(3.0));
        assert_eq!(p, Dual::new(-0.125, 0.75));
    }

    #[test]
    fn sqrt_at_zero_has_infinite_slope() {
        let d = Dual::variable(0.0).sqrt();
        assert_eq!(d.re, 0.0);
        assert!(!d.du.is_finite());
    }

    #[test]
    fn variable_exponent() {
        // d/dt 2^t = 2^t ln 2
        let d = Dual::constant(2.0).pow(Dual::variable(1.5));
        assert!((d.re - 2f64.powf(1.5)).abs() < 1e-15);
        assert!((d.du - 2f64.powf(1.5) * 2f64.ln()).abs() < 1e-14);
    }
}
