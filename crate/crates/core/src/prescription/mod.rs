//! The prescription `h` on `[-1, 1]`: parsing, exact derivatives and
//! structural predicates.

mod dual;
mod expr;
mod profile;

use thiserror::Error;

pub use dual::Dual;
pub use expr::{parse_expr, BinOp, Expr, Func};
pub use profile::{profile_of, HProfile};

/// Number of uniform grid points on `[-1, 1]` used for every grid decision.
pub const GRID_POINTS: usize = 2001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrescriptionError {
    #[error("syntax error at offset {position}: expected one of {}, found {found}", expected.join(", "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("h is not C1 at t = {t}: h = {value}, h' = {deriv}")]
    Domain { t: f64, value: f64, deriv: f64 },
}

/// `t_i = -1 + i / 1000`.
pub fn grid_point(i: usize) -> f64 {
    -1.0 + i as f64 / ((GRID_POINTS - 1) as f64 / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum HSource {
    Expression(String),
    Constant(f64),
    /// Coefficients in increasing degree.
    Polynomial(Vec<f64>),
}

/// A validated prescription. Value and derivative come from the same tree.
#[derive(Debug, Clone, PartialEq)]
pub struct HFunction {
    source: HSource,
    expr: Expr,
}

impl HFunction {
    pub fn parse(text: &str) -> Result<Self, PrescriptionError> {
        let expr = parse_expr(text)?;
        Self::from_expr(HSource::Expression(text.trim().to_string()), expr)
    }

    pub fn constant(c: f64) -> Result<Self, PrescriptionError> {
        Self::from_expr(HSource::Constant(c), Expr::Num(c))
    }

    pub fn polynomial(coeffs: &[f64]) -> Result<Self, PrescriptionError> {
        // Horner form: c0 + t*(c1 + t*(c2 + ...))
        let mut expr = Expr::Num(*coeffs.last().unwrap_or(&0.0));
        for &c in coeffs.iter().rev().skip(1) {
            expr = Expr::bin(BinOp::Add, Expr::Num(c), Expr::bin(BinOp::Mul, Expr::Var, expr));
        }
        Self::from_expr(HSource::Polynomial(coeffs.to_vec()), expr)
    }

    fn from_expr(source: HSource, expr: Expr) -> Result<Self, PrescriptionError> {
        for i in 0..GRID_POINTS {
            let t = grid_point(i);
            let d = expr.eval_dual(Dual::variable(t));
            if !d.is_finite() {
                return Err(PrescriptionError::Domain {
                    t,
                    value: d.re,
                    deriv: d.du,
                });
            }
        }
        Ok(HFunction { source, expr })
    }

    pub fn source(&self) -> &HSource {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Text that parses back to an equivalent prescription.
    pub fn text(&self) -> String {
        match &self.source {
            HSource::Expression(s) => s.clone(),
            _ => self.expr.to_string(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.expr.eval(t)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.expr.deriv(t)
    }

    pub fn eval_with_deriv(&self, t: f64) -> (f64, f64) {
        let d = self.expr.eval_dual(Dual::variable(t));
        (d.re, d.du)
    }

    /// Largest excess of `|h'_AD - h'_FD|` over `1e-6 + 1e-4 |h'|` on the grid.
    ///
    /// Central differences use step `1e-6`; non-positive means the check passes.
    pub fn derivative_check(&self) -> DerivativeCheck {
        let step = 1e-6;
        let mut worst = DerivativeCheck {
            t: -1.0,
            ad: 0.0,
            fd: 0.0,
            excess: f64::NEG_INFINITY,
        };
        for i in 0..GRID_POINTS {
            let t = grid_point(i);
            let ad = self.deriv(t);
            let fd = (self.eval(t + step) - self.eval(t - step)) / (2.0 * step);
            let excess = (ad - fd).abs() - (1e-6 + 1e-4 * ad.abs());
            if excess > worst.excess {
                worst = DerivativeCheck { t, ad, fd, excess };
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub t: f64,
    pub ad: f64,
    pub fd: f64,
    pub excess: f64,
}

impl DerivativeCheck {
    pub fn passes(&self) -> bool {
        self.excess <= 0.0
    }
}

/// Parses and validates a prescription.
pub fn parse_h(text: &str) -> Result<HFunction, PrescriptionError> {
    HFunction::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_exact_at_the_ends() {
        assert_eq!(grid_point(0), -1.0);
        assert_eq!(grid_point(1000), 0.0);
        assert_eq!(grid_point(2000), 1.0);
    }

    #[test]
    fn polynomial_matches_expression() {
        let p = HFunction::polynomial(&[1.0, 0.0, 1.0]).unwrap();
        let q = parse_h("t^2+1").unwrap();
        for i in 0..GRID_POINTS {
            let t = grid_point(i);
            assert!((p.eval(t) - q.eval(t)).abs() < 1e-15);
            assert!((p.deriv(t) - q.deriv(t)).abs() < 1e-15);
        }
        let r = parse_h(&p.text()).unwrap();
        assert_eq!(r.expr(), p.expr());
    }

    #[test]
    fn domain_check_rejects_non_c1() {
        match parse_h("sqrt(t^2)") {
            Err(PrescriptionError::Domain { t, .. }) => assert_eq!(t, 0.0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_h("log(t)"), Err(PrescriptionError::Domain { .. })));
        assert!(matches!(parse_h("1/t"), Err(PrescriptionError::Domain { .. })));
        assert!(parse_h("sqrt(t+2)").is_ok());
    }
}
