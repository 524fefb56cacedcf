use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use helicoid_core::export;
use helicoid_core::geometry::{build_mesh, build_profile, glue_check, surface_taxonomy, GlueReport, TaxonomyReport};
use helicoid_core::orbit::{
    axis_orientation, classify, continue_through_axis, integrate, trace_from_axis, ClassifyOptions, EventKind,
    IntegrateOptions, OrbitError, OrbitStop,
};
use helicoid_core::phase::{trace_nullcline, NullclineCurve, PhaseError};
use helicoid_core::verify::{orbit_suite, run_suites, Check, SuiteConfig};
use helicoid_core::{CurveState, Orbit, OrbitClass, Orientation, PhaseModel, PhasePoint};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig, Start};
use crate::svg::PhasePlot;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Text for stdout and whether every invariant held.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub pass: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            3
        }
    }
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<String, CliError> {
    let path = dir.join(name);
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err)?;
    Ok(path.display().to_string())
}

fn options(cfg: &RunConfig) -> IntegrateOptions {
    let mut o = IntegrateOptions::default()
        .with_tolerance(cfg.tol)
        .with_max_step(cfg.max_step);
    o.x_window = cfg.x_window;
    o
}

fn model(cfg: &RunConfig, eps: Orientation) -> Result<PhaseModel, CliError> {
    PhaseModel::new(cfg.h.clone(), cfg.c0, eps).map_err(numeric)
}

/// State on the profile through the phase point `p` in orientation `eps`.
pub fn state_at(p: PhasePoint, eps: Orientation) -> CurveState {
    let sn = eps.sign() * (1.0 - p.y * p.y).sqrt();
    CurveState {
        s: 0.0,
        x: p.x,
        z: 0.0,
        phi: sn.atan2(p.y),
    }
}

pub struct OrbitRun {
    pub model: PhaseModel,
    pub orbit: Orbit,
    pub class: Result<OrbitClass, OrbitError>,
}

/// Integrates the configured start and classifies the orbit.
pub fn run_orbit(cfg: &RunConfig) -> Result<OrbitRun, CliError> {
    let opts = options(cfg);
    let (m, orbit) = match cfg.start {
        None => {
            return Err(ConfigError {
                path: "start".into(),
                message: "give start.point (--start x,y) or start.from_axis (--from-axis)".into(),
            }
            .into())
        }
        Some(Start::Axis) => {
            let m = model(cfg, cfg.eps.unwrap_or_else(|| axis_orientation(&cfg.h)))?;
            let o = trace_from_axis(&m, cfg.s_max, &opts).map_err(numeric)?;
            (m, o)
        }
        Some(Start::Point(p)) => {
            let m = model(cfg, cfg.orientation())?;
            let o = integrate(&m, state_at(p, m.eps), cfg.s_max, &opts).map_err(numeric)?;
            (m, o)
        }
    };
    let class = classify(&orbit, &m, &ClassifyOptions::default());
    Ok(OrbitRun { model: m, orbit, class })
}

fn taxonomy(run: &OrbitRun) -> Option<Result<TaxonomyReport, String>> {
    let class = run.class.as_ref().ok()?;
    Some(
        build_profile(&run.orbit)
            .and_then(|p| surface_taxonomy(&run.orbit, &p, class))
            .map_err(|e| e.to_string()),
    )
}

fn fmt_class(c: &OrbitClass) -> String {
    match c {
        OrbitClass::Equilibrium { radius } => format!("Equilibrium (radius {radius})"),
        OrbitClass::AxisMeeting {
            slope,
            contacts,
            spacing,
        } => format!(
            "AxisMeeting (slope {slope}, contacts {contacts}{})",
            spacing.map_or(String::new(), |s| format!(", spacing {s}"))
        ),
        OrbitClass::ClosedUnduloidType { period, dz } => format!("ClosedUnduloidType (period {period}, dz {dz})"),
        OrbitClass::NodoidType {
            period,
            dz,
            switches_per_period,
        } => format!("NodoidType (period {period}, dz {dz}, switches per period {switches_per_period})"),
        OrbitClass::TubeClosedProfile { period } => format!("TubeClosedProfile (period {period})"),
        OrbitClass::EscapeUnbounded { x_exit } => format!("EscapeUnbounded (x exit {x_exit})"),
        OrbitClass::AsymptoteToLine { t0, deviation } => format!("AsymptoteToLine (t0 {t0}, deviation {deviation})"),
        OrbitClass::AsymptoteToYZeroAxis { deviation, x_end } => {
            format!("AsymptoteToYZeroAxis (deviation {deviation}, x end {x_end})")
        }
    }
}

fn fmt_taxonomy(t: &TaxonomyReport) -> String {
    let mut s = match serde_json::to_value(&t.label) {
        Ok(serde_json::Value::Object(map)) => {
            let args: Vec<String> = map
                .iter()
                .filter(|(k, _)| *k != "label")
                .map(|(k, v)| format!("{k} {v}"))
                .collect();
            if args.is_empty() {
                t.label.name().to_string()
            } else {
                format!("{} ({})", t.label.name(), args.join(", "))
            }
        }
        _ => t.label.name().to_string(),
    };
    let _ = write!(
        s,
        "; embedded profile {}, z monotone {}",
        t.embedded_profile, t.z_monotone
    );
    for w in &t.warnings {
        let _ = write!(s, "\nwarning: {w}");
    }
    s
}

fn orbit_summary(cfg: &RunConfig, run: &OrbitRun) -> String {
    let o = &run.orbit;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "h = {}, c0 = {}, eps = {:+}",
        cfg.h_text,
        cfg.c0,
        run.model.eps.sign()
    );
    let first = o.first();
    let _ = writeln!(
        s,
        "start: x = {}, y = {}{}",
        first.x,
        first.y(),
        if o.axis_start { " (axis)" } else { "" }
    );
    let _ = writeln!(
        s,
        "samples: {}, arclength: {}, stop: {:?}",
        o.samples.len(),
        o.last().s - first.s,
        o.stop
    );
    for kind in [
        EventKind::EpsilonSwitch,
        EventKind::YZeroCrossing,
        EventKind::NullclineCrossing,
        EventKind::AxisApproach,
    ] {
        let n = o.events_of(kind).count();
        if n > 0 {
            let _ = writeln!(s, "events {kind:?}: {n}");
        }
    }
    let _ = writeln!(s, "max |H - h(nu)|: {:e}", o.h_residual_max);
    match &run.class {
        Ok(c) => {
            let _ = writeln!(s, "classification: {}", fmt_class(c));
        }
        Err(e) => {
            let _ = writeln!(s, "classification: {e}");
        }
    }
    match taxonomy(run) {
        Some(Ok(t)) => {
            let _ = writeln!(s, "surface: {}", fmt_taxonomy(&t));
        }
        Some(Err(e)) => {
            let _ = writeln!(s, "surface: {e}");
        }
        None => {}
    }
    s
}

/// Phase-plane points `(x, cos phi)` of the stretches with `sign(sin phi) = eps`.
fn projected(orbit: &Orbit, eps: Orientation) -> Vec<Vec<(f64, f64)>> {
    let mut out = vec![Vec::new()];
    for st in &orbit.samples {
        let on = st.x > 0.0 && st.phi.sin() * eps.sign() > 0.0;
        let cur = out.last_mut().unwrap();
        if on {
            cur.push((st.x, st.y()));
        } else if !cur.is_empty() {
            out.push(Vec::new());
        }
    }
    out.retain(|v| v.len() > 1);
    out
}

fn nullcline_or_empty(m: &PhaseModel, cfg: &RunConfig) -> Result<Option<NullclineCurve>, CliError> {
    match trace_nullcline(m, cfg.x_max, cfg.grid) {
        Ok(c) => Ok(Some(c)),
        Err(PhaseError::EmptyNullcline) => Ok(None),
        Err(e) => Err(numeric(e)),
    }
}

fn draw_nullcline(plot: &mut PhasePlot, curve: &NullclineCurve) {
    plot.group("nullcline", r##"fill="none" stroke="#c03" stroke-width="1.6""##);
    for c in &curve.components {
        let mut pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p.x, p.y)).collect();
        if c.closed {
            pts.push(pts[0]);
        }
        plot.polyline(&pts);
    }
}

pub fn orbit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let run = run_orbit(cfg)?;
    let csv = write_file(&cfg.out, "orbit.csv", |w| export::write_orbit_csv(&run.orbit, w))?;
    let eps = run.model.eps;
    let mut plot = PhasePlot::new(
        cfg.x_max,
        &format!("h = {}, c0 = {}, eps = {:+}", cfg.h_text, cfg.c0, eps.sign()),
    );
    if let Some(curve) = nullcline_or_empty(&run.model, cfg)? {
        draw_nullcline(&mut plot, &curve);
    }
    plot.group("orbit", r##"fill="none" stroke="#036" stroke-width="1.4""##);
    for piece in projected(&run.orbit, eps) {
        let inside: Vec<_> = piece.into_iter().filter(|p| p.0 <= cfg.x_max).collect();
        plot.polyline(&inside);
    }
    let svg_text = plot.finish();
    let svg = write_file(&cfg.out, "orbit.svg", |w| w.write_all(svg_text.as_bytes()))?;
    let mut summary = orbit_summary(cfg, &run);
    let _ = writeln!(summary, "wrote {csv}\nwrote {svg}");
    Ok(Outcome { summary, pass: true })
}

#[derive(Serialize)]
struct ClassifyRecord<'a> {
    h: &'a str,
    c0: f64,
    eps: f64,
    stop: OrbitStop,
    arclength: f64,
    h_residual_max: f64,
    classification: &'a OrbitClass,
    surface: Option<&'a TaxonomyReport>,
    surface_error: Option<String>,
}

pub fn classify_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let run = run_orbit(cfg)?;
    let class = run.class.as_ref().map_err(numeric)?;
    let tax = taxonomy(&run);
    let (surface, surface_error) = match &tax {
        Some(Ok(t)) => (Some(t), None),
        Some(Err(e)) => (None, Some(e.clone())),
        None => (None, None),
    };
    let rec = ClassifyRecord {
        h: &cfg.h_text,
        c0: cfg.c0,
        eps: run.model.eps.sign(),
        stop: run.orbit.stop,
        arclength: run.orbit.last().s - run.orbit.first().s,
        h_residual_max: run.orbit.h_residual_max,
        classification: class,
        surface,
        surface_error,
    };
    let summary = serde_json::to_string_pretty(&rec).map_err(numeric)? + "\n";
    Ok(Outcome { summary, pass: true })
}

#[derive(Serialize)]
struct MeshReport<'a> {
    h: &'a str,
    c0: f64,
    rows: usize,
    n_theta: usize,
    theta_range: (f64, f64),
    max_residual: f64,
    theta_spread: f64,
    self_intersecting: bool,
    surface: Option<&'a TaxonomyReport>,
    glue: Option<&'a GlueReport>,
}

pub fn surface(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let run = run_orbit(cfg)?;
    let mut orbit = run.orbit.clone();
    if cfg.through_axis && orbit.stop == OrbitStop::AxisApproach {
        orbit = continue_through_axis(&orbit, cfg.s_max, &options(cfg)).map_err(numeric)?;
    }
    let profile = build_profile(&orbit).map_err(numeric)?;
    let mesh = build_mesh(&profile, &cfg.h, cfg.theta_range, cfg.n_theta, cfg.rows).map_err(numeric)?;
    let tax = taxonomy(&run);
    let glue = if orbit.events_of(EventKind::EpsilonSwitch).next().is_some() {
        Some(glue_check(&orbit).map_err(numeric)?)
    } else {
        None
    };

    let obj = write_file(&cfg.out, "surface.obj", |w| export::write_obj(&mesh, w))?;
    let scalars = write_file(&cfg.out, "surface_scalars.csv", |w| {
        export::write_mesh_scalars_csv(&mesh, w)
    })?;
    let prof = write_file(&cfg.out, "surface_profile.csv", |w| {
        export::write_profile_csv(&profile, w)
    })?;
    let report = MeshReport {
        h: &cfg.h_text,
        c0: cfg.c0,
        rows: mesh.rows,
        n_theta: mesh.n_theta,
        theta_range: mesh.theta_range,
        max_residual: mesh.max_residual(),
        theta_spread: mesh.theta_spread(),
        self_intersecting: mesh.self_intersecting,
        surface: tax.as_ref().and_then(|t| t.as_ref().ok()),
        glue: glue.as_ref(),
    };
    let json = serde_json::to_string_pretty(&report).map_err(numeric)?;
    let rep = write_file(&cfg.out, "surface_report.json", |w| writeln!(w, "{json}"))?;

    let mut s = orbit_summary(cfg, &run);
    let _ = writeln!(
        s,
        "mesh: {} rows x {} angles, max |H - h(nu)| = {:e}, self-intersecting {}",
        mesh.rows,
        mesh.n_theta,
        mesh.max_residual(),
        mesh.self_intersecting
    );
    if let Some(g) = &glue {
        let _ = writeln!(
            s,
            "glue: {} switches, max normal mismatch {:e}",
            g.switches.len(),
            g.max_mismatch
        );
    }
    let _ = writeln!(s, "wrote {obj}\nwrote {scalars}\nwrote {prof}\nwrote {rep}");
    Ok(Outcome { summary: s, pass: true })
}

/// Default seeds: near the equilibrium, well outside it, and in the upper half strip.
fn default_seeds(m: &PhaseModel, x_max: f64) -> Vec<PhasePoint> {
    let mut v = Vec::new();
    if let Some(e0) = m.equilibrium() {
        for k in [1.3, 3.0] {
            if k * e0.x < x_max {
                v.push(PhasePoint { x: k * e0.x, y: 0.0 });
            }
        }
    }
    v.push(PhasePoint { x: 0.5 * x_max, y: 0.5 });
    v
}

fn seed_orbits(m: &PhaseModel, cfg: &RunConfig) -> Vec<(String, Result<Orbit, OrbitError>)> {
    let mut opts = options(cfg);
    opts.x_window = Some(cfg.x_max);
    let seeds = cfg.seeds.clone().unwrap_or_else(|| default_seeds(m, cfg.x_max));
    let axis = cfg.axis_seed && m.axis_points().is_some();
    let span = cfg.seed_span;
    std::thread::scope(|sc| {
        let mut handles = Vec::new();
        if axis {
            handles.push(("axis".to_string(), sc.spawn(move || trace_from_axis(m, span, &opts))));
        }
        for p in seeds {
            let label = format!("({}, {})", p.x, p.y);
            handles.push((label, sc.spawn(move || integrate(m, state_at(p, m.eps), span, &opts))));
        }
        handles
            .into_iter()
            .map(|(l, h)| (l, h.join().expect("seed integration panicked")))
            .collect()
    })
}

pub fn phase_portrait(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let eps = cfg.orientation();
    let m = model(cfg, eps)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "h = {}, c0 = {}, eps = {:+}", cfg.h_text, cfg.c0, eps.sign());
    let mut plot = PhasePlot::new(
        cfg.x_max,
        &format!("h = {}, c0 = {}, eps = {:+}", cfg.h_text, cfg.c0, eps.sign()),
    );

    // direction field
    let n = cfg.glyphs;
    let mut field = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = cfg.x_max * (i as f64 + 0.5) / n as f64;
            let y = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
            if let Ok(v) = m.vector_field(PhasePoint { x, y }) {
                field.push((x, y, v.0, v.1));
            }
        }
    }
    let scale = cfg.x_max / n as f64;
    plot.group("field", r##"stroke="#999" fill="#999" stroke-width="0.8""##);
    for &(x, y, dx, dy) in &field {
        let nrm = dx.hypot(dy);
        if nrm > 0.0 {
            plot.glyph(x, y, dx / nrm * scale, dy / nrm * scale, 12.0);
        }
    }

    let curve = nullcline_or_empty(&m, cfg)?;
    match &curve {
        Some(c) => {
            draw_nullcline(&mut plot, c);
            let _ = writeln!(summary, "nullcline components: {}", c.components.len());
        }
        None => {
            let _ = writeln!(summary, "nullcline: empty in the window");
        }
    }

    let betas: Vec<_> = m
        .h_zeros()
        .into_iter()
        .filter(|t| t.abs() < 1.0)
        .map(|t0| m.beta0(t0, cfg.x_max, 200))
        .collect();
    if !betas.is_empty() {
        plot.group("beta0", r##"fill="none" stroke="#070" stroke-dasharray="6 3""##);
        for b in &betas {
            plot.polyline(&b.samples);
        }
    }

    let mut markers: Vec<(String, f64, f64)> = Vec::new();
    if let Some(e0) = m.equilibrium() {
        markers.push(("e0".into(), e0.x, e0.y));
    }
    if let Some((p, q)) = m.axis_points() {
        markers.push(("p".into(), p.x, p.y));
        markers.push(("-p".into(), q.x, q.y));
    }
    for b in &betas {
        if let Some(p) = b.boundary {
            markers.push((format!("p0({})", b.t0), p.x, p.y));
        }
    }
    plot.group("markers", r##"fill="#000""##);
    for (name, x, y) in &markers {
        plot.marker(*x, *y, name);
        let _ = writeln!(summary, "{name}: ({x}, {y})");
    }

    let orbits = seed_orbits(&m, cfg);
    plot.group("orbits", r##"fill="none" stroke="#036" stroke-width="1.2""##);
    let mut orbit_rows = Vec::new();
    for (k, (label, o)) in orbits.iter().enumerate() {
        match o {
            Ok(o) => {
                for piece in projected(o, eps) {
                    plot.polyline(&piece);
                }
                orbit_rows.extend(o.samples.iter().map(|st| (k, *st)));
            }
            Err(e) => {
                let _ = writeln!(summary, "seed {label}: {e}");
            }
        }
    }
    let _ = writeln!(summary, "seed orbits: {}", orbits.len());

    let dir = &cfg.out;
    let svg_text = plot.finish();
    let mut wrote = vec![write_file(dir, "portrait.svg", |w| w.write_all(svg_text.as_bytes()))?];
    wrote.push(write_file(dir, "portrait_field.csv", |w| {
        writeln!(w, "x,y,dx,dy")?;
        for (x, y, dx, dy) in &field {
            writeln!(w, "{x},{y},{dx},{dy}")?;
        }
        Ok(())
    })?);
    wrote.push(write_file(dir, "portrait_nullcline.csv", |w| match &curve {
        Some(c) => export::write_nullcline_csv(c, &m, w),
        None => writeln!(w, "component_id,x,y,F_residual,regular_flag"),
    })?);
    wrote.push(write_file(dir, "portrait_beta0.csv", |w| {
        writeln!(w, "t0,x,y")?;
        for b in &betas {
            for (x, y) in &b.samples {
                writeln!(w, "{},{x},{y}", b.t0)?;
            }
        }
        Ok(())
    })?);
    wrote.push(write_file(dir, "portrait_markers.csv", |w| {
        writeln!(w, "name,x,y")?;
        for (name, x, y) in &markers {
            writeln!(w, "{name},{x},{y}")?;
        }
        Ok(())
    })?);
    wrote.push(write_file(dir, "portrait_orbits.csv", |w| {
        writeln!(w, "seed,s,x,y,phi")?;
        for (k, st) in &orbit_rows {
            writeln!(w, "{k},{},{},{},{}", st.s, st.x, st.y(), st.phi)?;
        }
        Ok(())
    })?);
    for p in wrote {
        let _ = writeln!(summary, "wrote {p}");
    }
    Ok(Outcome { summary, pass: true })
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    config: &'a str,
    h: &'a str,
    c0: f64,
    pass: bool,
    checks: &'a [Check],
    warnings: &'a [String],
}

/// Every suite for `h` and `c0`, plus the orbit suite of the configured start if any.
pub fn verify_checks(cfg: &RunConfig) -> Result<(Vec<Check>, Vec<String>), CliError> {
    let report = run_suites(
        &cfg.h,
        cfg.c0,
        &SuiteConfig {
            x_max: cfg.x_max,
            grid: cfg.grid,
            s_max: cfg.s_max.min(30.0),
            tol: cfg.tol,
        },
    );
    let mut checks = report.checks;
    if cfg.start.is_some() {
        match run_orbit(cfg) {
            Ok(run) => checks.extend(orbit_suite(&run.orbit, "configured orbit")),
            Err(CliError::Numeric(e)) => checks.push(Check::flag("orbit", format!("configured orbit ({e})"), false)),
            Err(e) => return Err(e),
        }
    }
    Ok((checks, report.warnings))
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (checks, warnings) = verify_checks(cfg)?;
    let pass = checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        config: &cfg.name,
        h: &cfg.h_text,
        c0: cfg.c0,
        pass,
        checks: &checks,
        warnings: &warnings,
    };
    let json = serde_json::to_string_pretty(&report).map_err(numeric)?;
    let path = write_file(&cfg.out, "verify.json", |w| writeln!(w, "{json}"))?;
    let mut s = String::new();
    for c in &checks {
        let _ = writeln!(
            s,
            "{} [{}] {}: {:e} (tol {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.measured,
            c.tolerance
        );
    }
    for w in &warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(s, "{} checks, {failed} failed\nwrote {path}", checks.len());
    Ok(Outcome { summary: s, pass })
}
