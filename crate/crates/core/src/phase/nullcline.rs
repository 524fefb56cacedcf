use std::collections::HashMap;

use serde::Serialize;

use super::{BoundaryPoint, Orientation, PhaseError, PhaseModel, PhasePoint};

/// Where an open component leaves the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EndpointKind {
    /// Continues to the axis `x = 0`.
    Axis,
    /// Continues to the boundary `|y| = 1`.
    Boundary,
    /// Leaves through `x = x_max`.
    WindowEdge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullclineEnd {
    pub kind: EndpointKind,
    /// Last continuation point before the closure.
    pub approach: BoundaryPoint,
    /// Nearest zero of `F_eps` restricted to the relevant boundary line.
    pub limit: Option<BoundaryPoint>,
    pub snap_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullclineComponent {
    pub points: Vec<PhasePoint>,
    /// `|F_eps|` at each point.
    pub residuals: Vec<f64>,
    /// `|grad F2| > 1e-6` at each point.
    pub regular: Vec<bool>,
    pub closed: bool,
    /// Start and end of an open component.
    pub ends: Option<[NullclineEnd; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullclineCurve {
    pub eps: Orientation,
    pub x_max: f64,
    pub grid: usize,
    pub components: Vec<NullclineComponent>,
}

impl NullclineCurve {
    pub fn samples(&self) -> impl Iterator<Item = (usize, &PhasePoint)> + '_ {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(k, c)| c.points.iter().map(move |p| (k, p)))
    }

    pub fn sample_count(&self) -> usize {
        self.components.iter().map(|c| c.points.len()).sum()
    }
}

const RECORD_GAP: f64 = 1e-6;

fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    if g(a).abs() <= g(b).abs() {
        a
    } else {
        b
    }
}

/// Root of `g` nearest to `center` inside `[lo, hi]`, by an expanding search.
fn nearest_root(g: &impl Fn(f64) -> f64, center: f64, lo: f64, hi: f64) -> Option<f64> {
    let g0 = g(center);
    if g0 == 0.0 {
        return Some(center);
    }
    let (mut prev_up, mut prev_dn) = (center, center);
    let mut d = 1e-9;
    loop {
        let up = (center + d).min(hi);
        let dn = (center - d).max(lo);
        let ru = ((g(up) < 0.0) != (g0 < 0.0)).then(|| bisect(g, prev_up, up));
        let rd = ((g(dn) < 0.0) != (g0 < 0.0)).then(|| bisect(g, dn, prev_dn));
        match (ru, rd) {
            (Some(u), Some(v)) => return Some(if u - center <= center - v { u } else { v }),
            (Some(u), None) => return Some(u),
            (None, Some(v)) => return Some(v),
            _ => {}
        }
        if up >= hi && dn <= lo {
            return None;
        }
        prev_up = up;
        prev_dn = dn;
        d *= 2.0;
    }
}

/// Golden-section minimizer of `|g|` on `[a, b]`.
fn minimize_abs(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if g(c).abs() < g(d).abs() {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

/// Zeros of `g` on `[lo, hi]`: sign changes and touching minima.
fn boundary_zeros(g: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let n = 4000;
    let ts: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| g(t)).collect();
    let mut out = Vec::new();
    for k in 0..n {
        if vs[k] == 0.0 {
            out.push(ts[k]);
        } else if vs[k] * vs[k + 1] < 0.0 {
            out.push(bisect(g, ts[k], ts[k + 1]));
        }
    }
    if vs[n] == 0.0 {
        out.push(ts[n]);
    }
    for k in 1..n {
        let a = vs[k].abs();
        if a > 0.0 && a <= vs[k - 1].abs() && a <= vs[k + 1].abs() && vs[k - 1] * vs[k + 1] > 0.0 {
            let t = minimize_abs(g, ts[k - 1], ts[k + 1]);
            if g(t).abs() < 1e-10 {
                out.push(t);
            }
        }
    }
    for (t, v) in [(ts[0], vs[0]), (ts[n], vs[n])] {
        if v.abs() < 1e-10 {
            out.push(t);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
enum Edge {
    /// Between nodes `(i, j)` and `(i + 1, j)`.
    H(usize, usize),
    /// Between nodes `(i, j)` and `(i, j + 1)`.
    V(usize, usize),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

struct Grid<'a> {
    m: &'a PhaseModel,
    n: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    vals: Vec<f64>,
}

impl Grid<'_> {
    fn f(&self, x: f64, y: f64) -> f64 {
        self.m.f_eps(x, y)
    }

    fn val(&self, i: usize, j: usize) -> f64 {
        self.vals[i * self.n + j]
    }

    fn positive(&self, i: usize, j: usize) -> bool {
        self.val(i, j) >= 0.0
    }

    fn crosses(&self, e: Edge) -> bool {
        match e {
            Edge::H(i, j) => self.positive(i, j) != self.positive(i + 1, j),
            Edge::V(i, j) => self.positive(i, j) != self.positive(i, j + 1),
        }
    }

    fn root(&self, e: Edge) -> (f64, f64) {
        match e {
            Edge::H(i, j) => {
                let y = self.ys[j];
                (bisect(&|x| self.f(x, y), self.xs[i], self.xs[i + 1]), y)
            }
            Edge::V(i, j) => {
                let x = self.xs[i];
                (x, bisect(&|y| self.f(x, y), self.ys[j], self.ys[j + 1]))
            }
        }
    }

    fn side(&self, e: Edge) -> Option<Side> {
        let last = self.n - 1;
        match e {
            Edge::V(0, _) => Some(Side::Left),
            Edge::V(i, _) if i == last => Some(Side::Right),
            Edge::H(_, 0) => Some(Side::Bottom),
            Edge::H(_, j) if j == last => Some(Side::Top),
            _ => None,
        }
    }
}

/// Traces `F_eps = 0` on `(0, x_max] x (-1, 1)` with an `n x n` node grid.
pub fn trace_nullcline(m: &PhaseModel, x_max: f64, n: usize) -> Result<NullclineCurve, PhaseError> {
    if !(x_max > 0.0 && x_max.is_finite()) || n < 64 {
        return Err(PhaseError::InvalidWindow { x_max, grid: n });
    }
    let xs: Vec<f64> = (0..n).map(|i| x_max * (i + 1) as f64 / n as f64).collect();
    let ys: Vec<f64> = (0..n).map(|j| -1.0 + (2 * j + 1) as f64 / n as f64).collect();
    let mut vals = Vec::with_capacity(n * n);
    for &x in &xs {
        for &y in &ys {
            vals.push(m.f_eps(x, y));
        }
    }
    let grid = Grid { m, n, xs, ys, vals };

    let mut adj: HashMap<Edge, Vec<Edge>> = HashMap::new();
    let mut link = |a: Edge, b: Edge| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let bottom = Edge::H(i, j);
            let right = Edge::V(i + 1, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            let hit: Vec<Edge> = [bottom, right, top, left]
                .into_iter()
                .filter(|&e| grid.crosses(e))
                .collect();
            match hit.len() {
                2 => link(hit[0], hit[1]),
                4 => {
                    let cx = 0.5 * (grid.xs[i] + grid.xs[i + 1]);
                    let cy = 0.5 * (grid.ys[j] + grid.ys[j + 1]);
                    if (grid.f(cx, cy) >= 0.0) == grid.positive(i, j) {
                        link(bottom, right);
                        link(left, top);
                    } else {
                        link(bottom, left);
                        link(right, top);
                    }
                }
                _ => {}
            }
        }
    }

    let mut keys: Vec<Edge> = adj.keys().copied().collect();
    keys.sort();
    let mut visited: HashMap<Edge, bool> = HashMap::new();
    let mut chains: Vec<(Vec<Edge>, bool)> = Vec::new();
    let walk = |start: Edge, visited: &mut HashMap<Edge, bool>| {
        let mut chain = vec![start];
        visited.insert(start, true);
        let mut cur = start;
        let mut closed = false;
        loop {
            let next = adj[&cur]
                .iter()
                .copied()
                .find(|e| !visited.get(e).copied().unwrap_or(false));
            match next {
                Some(e) => {
                    visited.insert(e, true);
                    chain.push(e);
                    cur = e;
                }
                None => {
                    if chain.len() > 2 && adj[&cur].contains(&start) {
                        closed = true;
                    }
                    break;
                }
            }
        }
        (chain, closed)
    };
    for &k in &keys {
        if adj[&k].len() == 1 && !visited.get(&k).copied().unwrap_or(false) {
            chains.push(walk(k, &mut visited));
        }
    }
    for &k in &keys {
        if !visited.get(&k).copied().unwrap_or(false) {
            chains.push(walk(k, &mut visited));
        }
    }

    let mut components = Vec::with_capacity(chains.len());
    for (chain, closed) in chains {
        let mut pts: Vec<(f64, f64)> = chain.iter().map(|&e| grid.root(e)).collect();
        let mut ends = None;
        if !closed {
            let first = *chain.first().unwrap();
            let last = *chain.last().unwrap();
            let (head_pts, head_end) = continue_end(&grid, first, pts[0], x_max);
            let (tail_pts, tail_end) = continue_end(&grid, last, *pts.last().unwrap(), x_max);
            let mut all: Vec<(f64, f64)> = head_pts.into_iter().rev().collect();
            all.append(&mut pts);
            all.extend(tail_pts);
            pts = all;
            ends = Some([head_end, tail_end]);
        }
        let mut points = Vec::with_capacity(pts.len());
        let mut residuals = Vec::with_capacity(pts.len());
        let mut regular = Vec::with_capacity(pts.len());
        for (x, y) in pts {
            points.push(PhasePoint { x, y });
            residuals.push(m.f_eps(x, y).abs());
            let ok = m
                .f2_and_gradient(x * x, m.nu(x, y))
                .map(|(_, g)| g[0].hypot(g[1]) > 1e-6)
                .unwrap_or(false);
            regular.push(ok);
        }
        components.push(NullclineComponent {
            points,
            residuals,
            regular,
            closed,
            ends,
        });
    }

    if components.is_empty() {
        return Err(PhaseError::EmptyNullcline);
    }
    Ok(NullclineCurve {
        eps: m.eps,
        x_max,
        grid: n,
        components,
    })
}

/// Follows a chain end out of the node grid toward the closure of the strip.
///
/// Returns the recorded samples (ordered away from the grid) and the end metadata.
fn continue_end(grid: &Grid<'_>, edge: Edge, at: (f64, f64), x_max: f64) -> (Vec<(f64, f64)>, NullclineEnd) {
    let side = grid.side(edge);
    let mut out = Vec::new();
    let (mut x, mut y) = at;
    match side {
        Some(Side::Left) => {
            let mut xk = x;
            while xk > 1e-12 {
                xk *= 0.5;
                match nearest_root(&|yy| grid.f(xk, yy), y, -1.0, 1.0) {
                    Some(r) if r.abs() < 1.0 => {
                        x = xk;
                        y = r;
                        if xk >= RECORD_GAP {
                            out.push((x, y));
                        }
                    }
                    _ => break,
                }
            }
            let zeros = boundary_zeros(&|yy| grid.f(0.0, yy), -1.0, 1.0);
            let limit = zeros
                .iter()
                .map(|&yy| BoundaryPoint { x: 0.0, y: yy })
                .min_by(|a, b| a.dist(x, y).total_cmp(&b.dist(x, y)));
            let snap_distance = limit.map_or(f64::INFINITY, |l| l.dist(x, y));
            (
                out,
                NullclineEnd {
                    kind: EndpointKind::Axis,
                    approach: BoundaryPoint { x, y },
                    limit,
                    snap_distance,
                },
            )
        }
        Some(Side::Top) | Some(Side::Bottom) => {
            let sign = if side == Some(Side::Top) { 1.0 } else { -1.0 };
            let mut gap = 1.0 - y.abs();
            while gap > 1e-15 {
                gap *= 0.5;
                let yk = sign * (1.0 - gap);
                match nearest_root(&|xx| grid.f(xx, yk), x, 0.0, 2.0 * x_max) {
                    Some(r) if r > 0.0 => {
                        x = r;
                        y = yk;
                        if gap >= RECORD_GAP {
                            out.push((x, y));
                        }
                    }
                    _ => break,
                }
            }
            let zeros = boundary_zeros(&|xx| grid.f(xx, sign), 0.0, 2.0 * x_max);
            let limit = zeros
                .iter()
                .map(|&xx| BoundaryPoint { x: xx, y: sign })
                .min_by(|a, b| a.dist(x, y).total_cmp(&b.dist(x, y)));
            let snap_distance = limit.map_or(f64::INFINITY, |l| l.dist(x, y));
            (
                out,
                NullclineEnd {
                    kind: EndpointKind::Boundary,
                    approach: BoundaryPoint { x, y },
                    limit,
                    snap_distance,
                },
            )
        }
        _ => (
            out,
            NullclineEnd {
                kind: EndpointKind::WindowEdge,
                approach: BoundaryPoint { x, y },
                limit: None,
                snap_distance: 0.0,
            },
        ),
    }
}
