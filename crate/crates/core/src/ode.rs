//! Dormand-Prince 5(4) with step-size control and event location.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    pub max_steps: usize,
    /// Event localization width in `t`.
    pub event_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rtol: 1e-9,
            atol: 1e-9,
            max_step: 0.05,
            initial_step: 1e-4,
            max_steps: 5_000_000,
            event_tol: 1e-12,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One step of size `h`: the fifth-order solution and the embedded error estimate.
pub fn rk_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N]) {
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        t + C5 * h,
        &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let ynew = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &ynew);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (ynew, err)
}

fn error_norm<const N: usize>(y: &[f64; N], ynew: &[f64; N], err: &[f64; N], o: &SolverOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y[i].abs().max(ynew[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    let e = (acc / N as f64).sqrt();
    if e.is_finite() && ynew.iter().all(|v| v.is_finite()) {
        e
    } else {
        f64::INFINITY
    }
}

type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + 'a>;

/// An event function `g(t, y)`; a hit is a strict sign change of `g` across a step.
pub struct Event<'a, const N: usize> {
    pub g: EventFn<'a, N>,
    pub terminal: bool,
    /// `+1` only rising crossings, `-1` only falling, `0` both.
    pub direction: i8,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(g: impl Fn(f64, &[f64; N]) -> f64 + 'a) -> Self {
        Event {
            g: Box::new(g),
            terminal: false,
            direction: 0,
        }
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    pub fn direction(mut self, d: i8) -> Self {
        self.direction = d;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<const N: usize> {
    pub index: usize,
    pub t: f64,
    pub y: [f64; N],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    Reached,
    Terminal(usize),
    StepFailure,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    /// Accepted step ends and event states, in integration order.
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub events: Vec<EventHit<N>>,
    pub stop: Stop,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.ts.last().unwrap(), *self.ys.last().unwrap())
    }
}

fn crossed(g0: f64, g1: f64, direction: i8) -> bool {
    if g0 == 0.0 || g0.is_nan() || g1.is_nan() {
        return false;
    }
    let sign_change = g1 == 0.0 || (g0 < 0.0) != (g1 < 0.0);
    sign_change
        && match direction {
            1 => g0 < 0.0,
            -1 => g0 > 0.0,
            _ => true,
        }
}

/// Integrates from `t0` to `t_end` (either direction), recording every accepted step.
pub fn solve<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &SolverOptions,
    events: &[Event<'_, N>],
) -> Trajectory<N> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.initial_step.min(opts.max_step).min((t_end - t0).abs()) * dir;
    let mut traj = Trajectory {
        ts: vec![t0],
        ys: vec![y0],
        events: Vec::new(),
        stop: Stop::Reached,
    };
    if t0 == t_end {
        return traj;
    }
    let mut gs: Vec<f64> = events.iter().map(|e| (e.g)(t, &y)).collect();
    let mut steps = 0;
    loop {
        if steps >= opts.max_steps {
            traj.stop = Stop::MaxSteps;
            return traj;
        }
        steps += 1;
        let remaining = t_end - t;
        let last = h.abs() >= remaining.abs();
        if last {
            h = remaining;
        }
        let (ynew, err) = rk_step(&f, t, &y, h);
        let e = error_norm(&y, &ynew, &err, opts);
        if e > 1.0 {
            let fac = if e.is_finite() {
                (0.9 * e.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h *= fac;
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                traj.stop = Stop::StepFailure;
                return traj;
            }
            continue;
        }
        let tnew = if last { t_end } else { t + h };

        let gnew: Vec<f64> = events.iter().map(|ev| (ev.g)(tnew, &ynew)).collect();
        let mut hits: Vec<EventHit<N>> = Vec::new();
        for (k, ev) in events.iter().enumerate() {
            if crossed(gs[k], gnew[k], ev.direction) {
                let (mut lo, mut hi) = (0.0, tnew - t);
                let g_lo = gs[k];
                let mut y_hi = ynew;
                while (hi - lo).abs() > opts.event_tol {
                    let mid = 0.5 * (lo + hi);
                    if mid == lo || mid == hi {
                        break;
                    }
                    let (ym, _) = rk_step(&f, t, &y, mid);
                    let gm = (ev.g)(t + mid, &ym);
                    if gm == 0.0 {
                        hi = mid;
                        y_hi = ym;
                        break;
                    }
                    if (gm < 0.0) == (g_lo < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                        y_hi = ym;
                    }
                }
                hits.push(EventHit {
                    index: k,
                    t: t + hi,
                    y: y_hi,
                });
            }
        }
        hits.sort_by(|a, b| ((a.t - t) * dir).total_cmp(&((b.t - t) * dir)));

        let mut terminal = None;
        for hit in hits {
            if let Some(tt) = terminal {
                if ((hit.t - tt) * dir) > 0.0 {
                    break;
                }
            }
            if events[hit.index].terminal && terminal.is_none() {
                terminal = Some(hit.t);
                traj.stop = Stop::Terminal(hit.index);
            }
            if traj.ts.last() != Some(&hit.t) {
                traj.ts.push(hit.t);
                traj.ys.push(hit.y);
            }
            traj.events.push(hit);
        }
        if terminal.is_some() {
            return traj;
        }

        t = tnew;
        y = ynew;
        gs = gnew;
        traj.ts.push(t);
        traj.ys.push(y);
        if last {
            traj.stop = Stop::Reached;
            return traj;
        }
        let fac = if e == 0.0 {
            5.0
        } else {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * fac).abs().min(opts.max_step) * dir;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let ev = [Event::new(|_t, y: &[f64; 2]| y[1]).direction(-1)];
        let tr = solve(f, 0.0, [0.0, 1.0], 10.0, &SolverOptions::default(), &ev);
        assert_eq!(tr.stop, Stop::Reached);
        // y' = cos t falls through zero at pi/2 and 5pi/2
        let ts: Vec<f64> = tr.events.iter().map(|e| e.t).collect();
        assert_eq!(ts.len(), 2);
        assert!((ts[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        assert!((ts[1] - 2.5 * std::f64::consts::PI).abs() < 1e-9);
        let (_, y) = tr.last();
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn backward_and_terminal() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let ev = [Event::new(|_t, y: &[f64; 1]| y[0] - 0.5).terminal()];
        let tr = solve(f, 0.0, [1.0], -5.0, &SolverOptions::default(), &ev);
        assert_eq!(tr.stop, Stop::Terminal(0));
        let (t, y) = tr.last();
        assert!((t + 2f64.ln()).abs() < 1e-10);
        assert!((y[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn blow_up_reports_failure() {
        let f = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let tr = solve(f, 0.0, [1.0], 2.0, &SolverOptions::default(), &[]);
        assert!(matches!(tr.stop, Stop::StepFailure | Stop::MaxSteps));
        assert!(tr.last().0 < 1.0);
    }
}
