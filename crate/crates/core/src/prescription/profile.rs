use serde::Serialize;

use super::{grid_point, HFunction, GRID_POINTS};

const GRID_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-10;

/// Structural facts about `h` decided on the 2001-point grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HProfile {
    pub is_positive: bool,
    pub is_even: bool,
    pub is_increasing_on_0_1: bool,
    /// Zeros in the open interval, ascending.
    pub zeros: Vec<f64>,
    /// Zeros where `h` changes sign, a subset of `zeros`.
    pub sign_changes: Vec<f64>,
    pub min_value: f64,
    pub max_value: f64,
}

impl HProfile {
    /// Whether `h` is positive, even and increasing on `[0, 1]`, the
    /// hypotheses of the five-case classification.
    pub fn classification_applies(&self) -> bool {
        self.is_positive && self.is_even && self.is_increasing_on_0_1
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

pub fn profile_of(h: &HFunction) -> HProfile {
    let ts: Vec<f64> = (0..GRID_POINTS).map(grid_point).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| h.eval(t)).collect();

    let min_value = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max_value = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let n = GRID_POINTS - 1;
    let is_even = (0..GRID_POINTS).all(|i| (vals[i] - vals[n - i]).abs() < GRID_TOL);
    let is_increasing_on_0_1 = ts.iter().filter(|&&t| t >= 0.0).all(|&t| h.deriv(t) >= -GRID_TOL);

    let mut zeros: Vec<f64> = Vec::new();
    let mut sign_changes: Vec<f64> = Vec::new();
    let push = |list: &mut Vec<f64>, t: f64| {
        if t > -1.0 && t < 1.0 && h.eval(t).abs() < ZERO_TOL {
            list.push(t);
        }
    };

    for i in 0..n {
        if vals[i] * vals[i + 1] < 0.0 {
            let t = bisect(|t| h.eval(t), ts[i], ts[i + 1]);
            push(&mut zeros, t);
            push(&mut sign_changes, t);
        }
    }
    for i in 1..n {
        if vals[i] == 0.0 {
            push(&mut zeros, ts[i]);
            if vals[i - 1] * vals[i + 1] < 0.0 {
                push(&mut sign_changes, ts[i]);
            }
            continue;
        }
        let local_min = vals[i].abs() <= vals[i - 1].abs() && vals[i].abs() <= vals[i + 1].abs();
        let same_sign = vals[i - 1] * vals[i] > 0.0 && vals[i] * vals[i + 1] > 0.0;
        if local_min && same_sign {
            let (da, db) = (h.deriv(ts[i - 1]), h.deriv(ts[i + 1]));
            if da * db <= 0.0 {
                let t = bisect(|t| h.deriv(t), ts[i - 1], ts[i + 1]);
                push(&mut zeros, t);
            }
        }
    }

    for list in [&mut zeros, &mut sign_changes] {
        list.sort_by(f64::total_cmp);
        list.dedup_by(|a, b| (*a - *b).abs() < 1e-7);
    }

    HProfile {
        is_positive: zeros.is_empty() && min_value > GRID_TOL,
        is_even,
        is_increasing_on_0_1,
        zeros,
        sign_changes,
        min_value,
        max_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prescription::parse_h;

    #[test]
    fn touching_zero_off_grid() {
        let h = parse_h("(t-0.6003)^2").unwrap();
        let p = profile_of(&h);
        assert_eq!(p.zeros.len(), 1);
        assert!((p.zeros[0] - 0.6003).abs() < 1e-5);
        assert!(p.sign_changes.is_empty());
        assert!(!p.is_positive);
    }

    #[test]
    fn nonzero_minimum_is_not_a_zero() {
        let p = profile_of(&parse_h("(t-0.3)^2 + 0.001").unwrap());
        assert!(p.zeros.is_empty());
        assert!(p.is_positive);
    }

    #[test]
    fn non_positive_without_zeros() {
        let p = profile_of(&parse_h("-1 - t^2").unwrap());
        assert!(p.zeros.is_empty());
        assert!(!p.is_positive);
        assert_eq!(p.max_value, -1.0);
    }
}
