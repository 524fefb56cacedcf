//! Browser bindings. Each entry point takes plain numbers and strings and
//! returns JSON text for the page script.

use std::f64::consts::TAU;

use helicoid_core::geometry::{build_mesh, build_profile, surface_taxonomy};
use helicoid_core::orbit::{axis_orientation, classify, integrate, trace_from_axis, ClassifyOptions, IntegrateOptions};
use helicoid_core::phase::{trace_nullcline, PhaseError};
use helicoid_core::{parse_h, CurveState, Orbit, Orientation, PhaseModel, PhasePoint};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn model(h: &str, c0: f64, eps: f64) -> Result<PhaseModel, String> {
    let h = parse_h(h).map_err(|e| e.to_string())?;
    let eps = Orientation::from_sign(eps).ok_or_else(|| format!("eps must be 1 or -1, got {eps}"))?;
    PhaseModel::new(h, c0, eps).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Portrait {
    x_max: f64,
    eps: f64,
    field: Vec<[f64; 4]>,
    nullcline: Vec<Vec<[f64; 2]>>,
    beta0: Vec<Vec<[f64; 2]>>,
    markers: Vec<(String, f64, f64)>,
    axis_orbit: Vec<Vec<[f64; 2]>>,
}

/// Stretches of `(x, cos phi)` with `sign(sin phi) = eps`.
fn projected(o: &Orbit, eps: f64) -> Vec<Vec<[f64; 2]>> {
    let mut out = vec![Vec::new()];
    for st in &o.samples {
        if st.x > 0.0 && st.phi.sin() * eps > 0.0 {
            out.last_mut().unwrap().push([st.x, st.y()]);
        } else if !out.last().unwrap().is_empty() {
            out.push(Vec::new());
        }
    }
    out.retain(|v| v.len() > 1);
    out
}

pub fn portrait_json(h: &str, c0: f64, eps: f64, x_max: f64) -> Result<String, String> {
    let m = model(h, c0, eps)?;
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(format!("x_max must be positive, got {x_max}"));
    }
    let n = 20;
    let mut field = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = x_max * (i as f64 + 0.5) / n as f64;
            let y = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
            if let Ok((dx, dy)) = m.vector_field(PhasePoint { x, y }) {
                field.push([x, y, dx, dy]);
            }
        }
    }
    let nullcline = match trace_nullcline(&m, x_max, 200) {
        Ok(c) => c
            .components
            .iter()
            .map(|k| {
                let mut v: Vec<[f64; 2]> = k.points.iter().map(|p| [p.x, p.y]).collect();
                if k.closed {
                    v.push(v[0]);
                }
                v
            })
            .collect(),
        Err(PhaseError::EmptyNullcline) => Vec::new(),
        Err(e) => return Err(e.to_string()),
    };
    let beta0 = m
        .h_zeros()
        .into_iter()
        .filter(|t| t.abs() < 1.0)
        .map(|t0| {
            m.beta0(t0, x_max, 120)
                .samples
                .into_iter()
                .map(|(x, y)| [x, y])
                .collect()
        })
        .collect();
    let mut markers = Vec::new();
    if let Some(e0) = m.equilibrium() {
        markers.push(("e0".to_string(), e0.x, e0.y));
    }
    let mut axis_orbit = Vec::new();
    if let Some((p, q)) = m.axis_points() {
        markers.push(("p".to_string(), p.x, p.y));
        markers.push(("-p".to_string(), q.x, q.y));
        let opts = IntegrateOptions {
            x_window: Some(x_max),
            ..IntegrateOptions::default()
        };
        if let Ok(o) = trace_from_axis(&m, 40.0, &opts) {
            axis_orbit = projected(&o, eps);
        }
    }
    let out = Portrait {
        x_max,
        eps,
        field,
        nullcline,
        beta0,
        markers,
        axis_orbit,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

fn run_orbit(
    h: &str,
    c0: f64,
    eps: f64,
    x: f64,
    y: f64,
    from_axis: bool,
    span: f64,
) -> Result<(PhaseModel, Orbit), String> {
    if !(span > 0.0 && span.is_finite()) {
        return Err(format!("span must be positive, got {span}"));
    }
    let opts = IntegrateOptions::default();
    if from_axis {
        let hf = parse_h(h).map_err(|e| e.to_string())?;
        let m = model(h, c0, axis_orientation(&hf).sign())?;
        let o = trace_from_axis(&m, span, &opts).map_err(|e| e.to_string())?;
        return Ok((m, o));
    }
    let m = model(h, c0, eps)?;
    let p = PhasePoint::new(x, y).map_err(|e| e.to_string())?;
    let start = CurveState {
        s: 0.0,
        x: p.x,
        z: 0.0,
        phi: (eps * (1.0 - y * y).sqrt()).atan2(y),
    };
    let o = integrate(&m, start, span, &opts).map_err(|e| e.to_string())?;
    Ok((m, o))
}

#[derive(Serialize)]
struct OrbitView {
    eps: f64,
    phase: Vec<Vec<[f64; 2]>>,
    profile: Vec<[f64; 2]>,
    switches: usize,
    classification: String,
    surface: String,
    residual: f64,
}

pub fn orbit_json(h: &str, c0: f64, eps: f64, x: f64, y: f64, from_axis: bool, span: f64) -> Result<String, String> {
    let (m, o) = run_orbit(h, c0, eps, x, y, from_axis, span)?;
    let class = classify(&o, &m, &ClassifyOptions::default());
    let surface = match &class {
        Ok(c) => build_profile(&o)
            .and_then(|p| surface_taxonomy(&o, &p, c))
            .map(|t| t.label.name().to_string())
            .unwrap_or_else(|e| e.to_string()),
        Err(_) => "unclassified".to_string(),
    };
    let view = OrbitView {
        eps: m.eps.sign(),
        phase: projected(&o, m.eps.sign()),
        profile: o.samples.iter().map(|s| [s.x, s.z]).collect(),
        switches: o.events_of(helicoid_core::orbit::EventKind::EpsilonSwitch).count(),
        classification: match &class {
            Ok(c) => c.name().to_string(),
            Err(e) => e.to_string(),
        },
        surface,
        residual: o.h_residual_max,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct MeshView {
    vertices: Vec<f32>,
    triangles: Vec<u32>,
    nu: Vec<f32>,
    max_residual: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn mesh_json(
    h: &str,
    c0: f64,
    eps: f64,
    x: f64,
    y: f64,
    from_axis: bool,
    span: f64,
    n_theta: usize,
) -> Result<String, String> {
    let (m, o) = run_orbit(h, c0, eps, x, y, from_axis, span)?;
    let p = build_profile(&o).map_err(|e| e.to_string())?;
    let mesh = build_mesh(&p, &m.h, (0.0, TAU), n_theta, 160).map_err(|e| e.to_string())?;
    let view = MeshView {
        vertices: mesh.vertices.iter().flat_map(|v| v.map(|c| c as f32)).collect(),
        triangles: mesh.triangles.iter().flatten().copied().collect(),
        nu: mesh.nu.iter().map(|&v| v as f32).collect(),
        max_residual: mesh.max_residual(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn portrait(h: &str, c0: f64, eps: f64, x_max: f64) -> Result<String, JsValue> {
    portrait_json(h, c0, eps, x_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn orbit(h: &str, c0: f64, eps: f64, x: f64, y: f64, from_axis: bool, span: f64) -> Result<String, JsValue> {
    orbit_json(h, c0, eps, x, y, from_axis, span).map_err(|e| JsValue::from_str(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn mesh(
    h: &str,
    c0: f64,
    eps: f64,
    x: f64,
    y: f64,
    from_axis: bool,
    span: f64,
    n_theta: usize,
) -> Result<String, JsValue> {
    mesh_json(h, c0, eps, x, y, from_axis, span, n_theta).map_err(|e| JsValue::from_str(&e))
}
