//! Minimal SVG writer for the phase strip `[0, x_max] x [-1, 1]`.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 400.0;
const PAD: f64 = 40.0;

pub struct PhasePlot {
    x_max: f64,
    body: String,
    open_group: bool,
}

fn f(v: f64) -> String {
    format!("{v:.2}")
}

impl PhasePlot {
    pub fn new(x_max: f64, title: &str) -> Self {
        let mut p = PhasePlot {
            x_max,
            body: String::new(),
            open_group: false,
        };
        let (x0, y0) = p.map(0.0, 1.0);
        let (x1, y1) = p.map(x_max, -1.0);
        let _ = writeln!(
            p.body,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            f(x0),
            f(y0),
            f(x1 - x0),
            f(y1 - y0)
        );
        let (ax, ay) = p.map(0.0, 0.0);
        let (bx, _) = p.map(x_max, 0.0);
        let _ = writeln!(
            p.body,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
            f(ax),
            f(ay),
            f(bx),
            f(ay)
        );
        let _ = writeln!(
            p.body,
            r#"<text x="{}" y="24" font-size="14" font-family="sans-serif">{}</text>"#,
            PAD,
            escape(title)
        );
        let _ = writeln!(
            p.body,
            r#"<text x="{}" y="{}" font-size="11" font-family="sans-serif">x = {}</text>"#,
            f(x1 - 40.0),
            f(y1 + 16.0),
            x_max
        );
        p
    }

    /// Data `(x, y)` to pixels.
    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (
            PAD + (W - 2.0 * PAD) * x / self.x_max,
            PAD + (H - 2.0 * PAD) * (1.0 - y) / 2.0,
        )
    }

    pub fn group(&mut self, id: &str, style: &str) {
        self.end_group();
        let _ = writeln!(self.body, r#"<g id="{id}" {style}>"#);
        self.open_group = true;
    }

    fn end_group(&mut self) {
        if self.open_group {
            self.body.push_str("</g>\n");
            self.open_group = false;
        }
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)]) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (u, v) = self.map(x, y);
                format!("{},{}", f(u), f(v))
            })
            .collect();
        let _ = writeln!(self.body, r#"<polyline points="{}"/>"#, coords.join(" "));
    }

    /// Short segment of pixel length `len` through `(x, y)` along `(dx, dy)` in data units.
    pub fn glyph(&mut self, x: f64, y: f64, dx: f64, dy: f64, len: f64) {
        let (u, v) = self.map(x, y);
        let (pu, pv) = self.map(x + dx, y + dy);
        let (gu, gv) = (pu - u, pv - v);
        let n = gu.hypot(gv);
        if n.is_nan() || n == 0.0 {
            return;
        }
        let (gu, gv) = (gu / n * len, gv / n * len);
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/><circle cx="{}" cy="{}" r="1.2"/>"#,
            f(u - gu / 2.0),
            f(v - gv / 2.0),
            f(u + gu / 2.0),
            f(v + gv / 2.0),
            f(u + gu / 2.0),
            f(v + gv / 2.0)
        );
    }

    pub fn marker(&mut self, x: f64, y: f64, label: &str) {
        let (u, v) = self.map(x, y);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="4"/><text x="{}" y="{}" font-size="12" font-family="sans-serif">{}</text>"#,
            f(u),
            f(v),
            f(u + 6.0),
            f(v - 6.0),
            escape(label)
        );
    }

    pub fn finish(mut self) -> String {
        self.end_group();
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n{}</svg>\n",
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
